//! Finite-volume index pairing of Fermi projections with the Dirac phase,
//! and the real-space Chern oracle used to cross-check it.
//!
//! For a projection `P` with orthonormal frame `F`, the compression of the
//! site-diagonal phase `U = diag(u(x - c))` to `Ran P` is `B = F^† U F`. Its
//! small singular values (below `τ`) come in left/right pairs; the index
//! counts the right (kernel) vectors living in the bulk minus the left
//! (cokernel) vectors living in the bulk. Boundary-localized partners of
//! bulk zero modes are what the window truncation leaves behind, and the
//! bulk weighting discards them.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::exterior::SpinorReduction;
use crate::error::{Error, Result};
use crate::models::{build_hamiltonian, DisorderSpec, ModelKind, ModelSpec};
use crate::roe_ops::{classify_decay, DecayClassification, DecayOptions};
use crate::spectral::{bulk_gap, eigendecompose, fermi_projection, BulkGap, BulkGapOptions, FermiProjection};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingOptions {
    /// Singular-value threshold.
    pub tau: f64,
    /// Pick `τ` in the widest multiplicative gap of the singular values.
    pub auto_threshold: bool,
    /// Phase centre offset from the window centre along every axis.
    pub center_offset: f64,
    /// A vector is bulk-weighted by its mass in `|x|_∞ <= bulk_fraction * L`.
    pub bulk_fraction: f64,
}

impl Default for PairingOptions {
    fn default() -> Self {
        PairingOptions { tau: 0.05, auto_threshold: false, center_offset: 0.5, bulk_fraction: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowPairing {
    pub half_width: i64,
    /// Bulk-weighted kernel minus cokernel count before rounding.
    pub raw_index: f64,
    pub index: i64,
    pub tau: f64,
    /// Smallest singular value at or above `τ` (`inf` if none).
    pub smallest_retained: f64,
    /// Largest singular value below `τ` (`0` if none).
    pub largest_discarded: f64,
    /// Ascending singular values of the compressed phase.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingResult {
    /// Index of the largest window.
    pub index: i64,
    /// Set iff the last two windows agree.
    pub converged: bool,
    pub windows: Vec<WindowPairing>,
}

/// Picks `τ` as the geometric mean across the largest ratio between
/// consecutive singular values; falls back to `default` when no ratio
/// exceeds 10.
pub fn auto_threshold(sorted: &[f64], default: f64) -> f64 {
    let floor = 1e-300;
    let mut best = (10.0, default);
    for w in sorted.windows(2) {
        let (a, b) = (w[0].max(floor), w[1]);
        if b > 1.0 + 1e-9 {
            break;
        }
        let ratio = b / a;
        if ratio > best.0 {
            best = (ratio, (a * b).sqrt());
        }
    }
    best.1
}

fn bulk_mask(p: &FermiProjection, fraction: f64) -> Vec<bool> {
    let w = p.geometry.window();
    (0..p.geometry.len())
        .map(|i| {
            let s = w.site_at(i);
            s.0.iter().zip(w.half_widths()).all(|(&c, &l)| (c.abs() as f64) <= fraction * l as f64)
        })
        .collect()
}

/// Phase centre: the window centre shifted by `offset` along every axis.
fn center(p: &FermiProjection, offset: f64) -> Vec<f64> {
    vec![offset; p.geometry.dim()]
}

/// Index of a single projection.
pub fn pairing_window(p: &FermiProjection, opts: &PairingOptions) -> Result<WindowPairing> {
    let d = p.geometry.dim();
    let red = SpinorReduction::standard(d)?;
    let k = red.rank();
    let n = p.internal_dim;
    let r = p.rank();
    let half_width = p.geometry.window().half_width();
    if r == 0 {
        return Ok(WindowPairing {
            half_width,
            raw_index: 0.0,
            index: 0,
            tau: opts.tau,
            smallest_retained: f64::INFINITY,
            largest_discarded: 0.0,
            singular_values: vec![],
            rank: 0,
            warnings: vec![],
        });
    }
    let c = center(p, opts.center_offset);
    let phases: Vec<DMatrix<Complex64>> = (0..p.geometry.len())
        .map(|x| {
            let rel: Vec<f64> = p.geometry.position(x).iter().zip(&c).map(|(a, b)| a - b).collect();
            red.phase(&rel)
        })
        .collect::<Result<_>>()?;

    // B[(c1, a), (c2, b)] = sum_rows conj(F[row, c1]) u_ab(site(row)) F[row, c2]
    let f = &p.frame;
    let mut b = DMatrix::<Complex64>::zeros(r * k, r * k);
    for a in 0..k {
        for bb in 0..k {
            let mut uf = f.clone();
            for row in 0..f.nrows() {
                let u = phases[row / n][(a, bb)];
                for col in 0..r {
                    uf[(row, col)] *= u;
                }
            }
            let block = f.adjoint() * uf;
            for c1 in 0..r {
                for c2 in 0..r {
                    b[(c1 * k + a, c2 * k + bb)] = block[(c1, c2)];
                }
            }
        }
    }
    let svd = b.svd(true, true);
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    let tau = if opts.auto_threshold { auto_threshold(&sorted, opts.tau) } else { opts.tau };

    let left = svd.u.as_ref().expect("left vectors requested");
    let right_t = svd.v_t.as_ref().expect("right vectors requested");
    let mask = bulk_mask(p, opts.bulk_fraction);
    // mass of F~ y on bulk sites, F~ = F (x) 1_k
    let bulk_weight = |y: &dyn Fn(usize) -> Complex64| -> f64 {
        let mut total = 0.0;
        for row in 0..f.nrows() {
            if !mask[row / n] {
                continue;
            }
            for a in 0..k {
                let mut z = Complex64::new(0.0, 0.0);
                for col in 0..r {
                    z += f[(row, col)] * y(col * k + a);
                }
                total += z.norm_sqr();
            }
        }
        total
    };
    let mut raw = 0.0;
    for &i in order.iter().filter(|&&i| sv[i] < tau) {
        let kernel = bulk_weight(&|j| right_t[(i, j)].conj());
        let cokernel = bulk_weight(&|j| left[(j, i)]);
        raw += kernel - cokernel;
    }
    let smallest_retained = sorted.iter().copied().find(|&s| s >= tau).unwrap_or(f64::INFINITY);
    let largest_discarded = sorted.iter().copied().filter(|&s| s < tau).fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if let Some(s) = sorted.iter().find(|&&s| s > tau / 10.0 && s < tau * 10.0) {
        warnings.push(format!("ill-conditioned threshold: singular value {s:.3e} within 10x of tau = {tau:.3e}"));
    }
    if (raw - raw.round()).abs() > 0.25 {
        warnings.push(format!("raw index {raw:.3} is far from an integer"));
    }
    Ok(WindowPairing {
        half_width,
        raw_index: raw,
        index: raw.round() as i64,
        tau,
        smallest_retained,
        largest_discarded,
        singular_values: sorted,
        rank: r,
        warnings,
    })
}

/// Indices over a ladder of projections, smallest window first.
pub fn index_pairing(projections: &[FermiProjection], opts: &PairingOptions) -> Result<PairingResult> {
    if projections.is_empty() {
        return Err(Error::invalid("empty window ladder"));
    }
    let windows = projections.iter().map(|p| pairing_window(p, opts)).collect::<Result<Vec<_>>>()?;
    Ok(ladder_result(windows))
}

fn ladder_result(windows: Vec<WindowPairing>) -> PairingResult {
    let index = windows.last().map(|w| w.index).unwrap_or(0);
    let converged = windows.len() >= 2 && windows[windows.len() - 2].index == index;
    PairingResult { index, converged, windows }
}

/// Three counterclockwise 120° sectors of a disc.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tripartition {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Tripartition {
    /// Radius `L/2` around the window centre shifted by `(0.5, 0.5)`.
    pub fn standard(half_width: i64) -> Self {
        Tripartition { center: vec![0.5, 0.5], radius: half_width as f64 / 2.0 }
    }

    /// Sector (0, 1, 2) of a position, or `None` outside the disc.
    pub fn sector(&self, pos: &[f64]) -> Option<usize> {
        let (dx, dy) = (pos[0] - self.center[0], pos[1] - self.center[1]);
        if (dx * dx + dy * dy).sqrt() > self.radius {
            return None;
        }
        let theta = dy.atan2(dx).rem_euclid(TAU);
        Some(((theta / (TAU / 3.0)) as usize).min(2))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub warnings: Vec<String>,
}

/// `12 π i sum_{j∈A, k∈B, l∈C} (P_jk P_kl P_lj - P_jl P_lk P_kj)`.
pub fn kitaev_chern_oracle(p: &FermiProjection, parts: &Tripartition) -> Result<OracleResult> {
    if p.geometry.dim() != 2 {
        return Err(Error::invalid("the Chern oracle is defined for d = 2"));
    }
    let n = p.internal_dim;
    let w = p.geometry.window();
    let mut rows: [Vec<usize>; 3] = Default::default();
    let mut warnings = Vec::new();
    let mut touches = false;
    for x in 0..p.geometry.len() {
        if let Some(s) = parts.sector(p.geometry.position(x)) {
            let site = w.site_at(x);
            if site.0.iter().zip(w.half_widths()).any(|(&c, &l)| c.abs() >= l) {
                touches = true;
            }
            rows[s].extend((0..n).map(|a| x * n + a));
        }
    }
    if touches {
        warnings.push("sectors touch the window boundary".to_string());
    }
    let sub = |a: &[usize], b: &[usize]| DMatrix::from_fn(a.len(), b.len(), |i, j| p.projector[(a[i], b[j])]);
    let [ra, rb, rc] = &rows;
    let t1 = (sub(ra, rb) * sub(rb, rc) * sub(rc, ra)).trace();
    let t2 = (sub(ra, rc) * sub(rc, rb) * sub(rb, ra)).trace();
    let value = (Complex64::new(0.0, 12.0 * std::f64::consts::PI) * (t1 - t2)).re;
    Ok(OracleResult { value, warnings })
}

/// One rung of a model-driven pairing ladder.
#[derive(Clone, Debug, Serialize)]
pub struct LadderStep {
    pub half_width: i64,
    pub gap: BulkGap,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingExperiment {
    pub result: PairingResult,
    pub steps: Vec<LadderStep>,
    /// Chern oracle on the largest window (d = 2 only).
    pub oracle: Option<OracleResult>,
    /// Decay class of the largest-window projection, when requested.
    pub decay: Option<DecayClassification>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentOptions {
    pub fermi_energy: f64,
    pub ladder: Vec<i64>,
    pub pairing: PairingOptions,
    pub gap: BulkGapOptions,
    pub oracle: bool,
    pub decay: Option<DecayOptions>,
}

impl ExperimentOptions {
    pub fn new(fermi_energy: f64, ladder: Vec<i64>) -> Self {
        ExperimentOptions {
            fermi_energy,
            ladder,
            pairing: PairingOptions::default(),
            gap: BulkGapOptions::default(),
            oracle: false,
            decay: None,
        }
    }
}

/// The Fermi projection of `spec` at half-width `l`, after the bulk-gap check.
pub fn gapped_projection(spec: &ModelSpec, dis: &DisorderSpec, l: i64, e_f: f64, gap: &BulkGapOptions) -> Result<(FermiProjection, BulkGap)> {
    let h = build_hamiltonian(&spec.clone().with_half_width(l), dis)?;
    let data = eigendecompose(&h)?;
    let g = bulk_gap(&data, e_f, gap)?;
    Ok((fermi_projection(&data, e_f)?, g))
}

/// Builds, diagonalizes and pairs the model at every ladder half-width.
/// Aborts with `GapClosed` as soon as a window has no bulk gap.
pub fn run_pairing_experiment(spec: &ModelSpec, dis: &DisorderSpec, opts: &ExperimentOptions) -> Result<PairingExperiment> {
    if opts.ladder.is_empty() {
        return Err(Error::invalid("empty window ladder"));
    }
    let mut windows = Vec::new();
    let mut steps = Vec::new();
    let mut oracle = None;
    let mut decay = None;
    for (i, &l) in opts.ladder.iter().enumerate() {
        let (p, gap) = gapped_projection(spec, dis, l, opts.fermi_energy, &opts.gap)?;
        windows.push(pairing_window(&p, &opts.pairing)?);
        steps.push(LadderStep { half_width: l, gap });
        if i + 1 == opts.ladder.len() {
            if opts.oracle && spec.dim() == 2 {
                oracle = Some(kitaev_chern_oracle(&p, &Tripartition::standard(l))?);
            }
            if let Some(d) = &opts.decay {
                decay = Some(classify_decay(&p.decay_profile(), d)?);
            }
        }
    }
    Ok(PairingExperiment { result: ladder_result(windows), steps, oracle, decay })
}

/// Pairing of a stacked SSH insulator at `E_F = 0`, expected to vanish.
pub fn weak_phase_experiment(spec: &ModelSpec, dis: &DisorderSpec, ladder: Vec<i64>) -> Result<PairingExperiment> {
    if !matches!(spec.kind, ModelKind::SshStack { .. }) || spec.dim() != 2 {
        return Err(Error::invalid("the weak-phase experiment runs on a two-dimensional ssh_stack"));
    }
    let mut opts = ExperimentOptions::new(0.0, ladder);
    opts.decay = Some(DecayOptions { window_margin: 2.0, ..Default::default() });
    run_pairing_experiment(spec, dis, &opts)
}

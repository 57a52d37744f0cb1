//! Dense eigensolves, gap detection, Fermi projections and strip edge
//! spectra.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Geometry;
use crate::models::{build_hamiltonian, DisorderSpec, GaugeChoice, ModelKind, ModelSpec};
use crate::roe_ops::{BlockOperator, DecayProfile};

/// Eigenvalues closer than this to `E_F` close the gap.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SpectralData {
    pub geometry: Arc<Geometry>,
    pub internal_dim: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: DMatrix<Complex64>,
}

impl SpectralData {
    /// Largest `||H v - lambda v||` over eigenpairs.
    pub fn max_residual(&self, h: &BlockOperator) -> f64 {
        let hd = h.to_dense();
        let hv = &hd * &self.eigenvectors;
        (0..self.eigenvalues.len())
            .map(|i| (hv.column(i) - self.eigenvectors.column(i) * Complex64::new(self.eigenvalues[i], 0.0)).norm())
            .fold(0.0, f64::max)
    }
}

fn sorted_eigen(m: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Full dense hermitian eigensolve.
pub fn eigendecompose(h: &BlockOperator) -> Result<SpectralData> {
    if !h.is_hermitian_flagged() {
        return Err(Error::precondition("hermitian", "operator is not flagged hermitian"));
    }
    let dev = h.hermitian_deviation();
    if dev > crate::roe_ops::HERMITIAN_TOL {
        return Err(Error::precondition("hermitian", format!("max |H_xy - H_yx^*| = {dev:.3e}")));
    }
    let (eigenvalues, eigenvectors) = sorted_eigen(h.to_dense());
    Ok(SpectralData { geometry: h.geometry().clone(), internal_dim: h.internal_dim(), eigenvalues, eigenvectors })
}

/// Eigenvalues bracketing `E_F`; `below` is `-inf` (`above` is `+inf`) when
/// the whole spectrum lies on one side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralGap {
    pub fermi_energy: f64,
    pub below: f64,
    pub above: f64,
    pub width: f64,
}

fn bracket(values: impl Iterator<Item = f64>, e_f: f64) -> SpectralGap {
    let (mut below, mut above) = (f64::NEG_INFINITY, f64::INFINITY);
    for v in values {
        if v < e_f {
            below = below.max(v);
        } else {
            above = above.min(v);
        }
    }
    SpectralGap { fermi_energy: e_f, below, above, width: above - below }
}

pub fn spectral_gap(data: &SpectralData, e_f: f64) -> Result<SpectralGap> {
    if let Some(v) = data.eigenvalues.iter().find(|v| (*v - e_f).abs() < DEGENERACY_TOL) {
        return Err(Error::GapClosed {
            fermi_energy: e_f,
            detail: format!("eigenvalue {v} within {DEGENERACY_TOL:e}"),
        });
    }
    Ok(bracket(data.eigenvalues.iter().copied(), e_f))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BulkGapOptions {
    /// Aborts when a bulk level lies within `min_gap / 2` of `E_F`.
    pub min_gap: f64,
    /// A state is bulk when its weight in the inner box, divided by the
    /// inner box's share of the sites, is at least this.
    pub bulk_ratio: f64,
}

impl Default for BulkGapOptions {
    fn default() -> Self {
        BulkGapOptions { min_gap: 0.1, bulk_ratio: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BulkGap {
    pub gap: SpectralGap,
    pub bulk_states: usize,
    pub edge_states: usize,
}

/// Sites with `|x_a| <= L_a / 2` on every open axis.
pub fn inner_box(geometry: &Geometry) -> Vec<bool> {
    let w = geometry.window();
    (0..geometry.len())
        .map(|i| {
            let s = w.site_at(i);
            (0..w.dim()).all(|a| geometry.is_periodic(a) || 2 * s.0[a].abs() <= w.half_widths()[a])
        })
        .collect()
}

/// Gap detector that ignores boundary-localized states.
///
/// Only eigenvectors carrying a fair share of their weight in the inner box
/// are used to bracket `E_F`. On periodic windows every state is bulk.
pub fn bulk_gap(data: &SpectralData, e_f: f64, opts: &BulkGapOptions) -> Result<BulkGap> {
    let inner = inner_box(&data.geometry);
    let n = data.internal_dim;
    let share = inner.iter().filter(|&&b| b).count() as f64 / inner.len() as f64;
    let mut bulk = Vec::new();
    for (i, &e) in data.eigenvalues.iter().enumerate() {
        let col = data.eigenvectors.column(i);
        let w: f64 = (0..col.len()).filter(|r| inner[r / n]).map(|r| col[r].norm_sqr()).sum();
        if w / share >= opts.bulk_ratio {
            bulk.push(e);
        }
    }
    let gap = bracket(bulk.iter().copied(), e_f);
    let result = BulkGap { gap, bulk_states: bulk.len(), edge_states: data.eigenvalues.len() - bulk.len() };
    let clearance = (e_f - gap.below).min(gap.above - e_f);
    if 2.0 * clearance < opts.min_gap {
        return Err(Error::GapClosed {
            fermi_energy: e_f,
            detail: format!(
                "bulk gap [{:.6}, {:.6}] leaves clearance {:.3e} < {} / 2 around E_F",
                gap.below, gap.above, clearance, opts.min_gap
            ),
        });
    }
    Ok(result)
}

/// Spectral projection onto the eigenvalues below `E_F`.
#[derive(Clone, Debug)]
pub struct FermiProjection {
    pub geometry: Arc<Geometry>,
    pub internal_dim: usize,
    pub fermi_energy: f64,
    pub gap: Option<SpectralGap>,
    /// Orthonormal columns spanning the range.
    pub frame: DMatrix<Complex64>,
    pub projector: DMatrix<Complex64>,
}

impl FermiProjection {
    /// Projection onto the span of orthonormal `frame` columns.
    pub fn from_frame(geometry: Arc<Geometry>, internal_dim: usize, frame: DMatrix<Complex64>) -> Result<Self> {
        let dim = geometry.len() * internal_dim;
        if frame.nrows() != dim {
            return Err(Error::invalid(format!("frame has {} rows, expected {dim}", frame.nrows())));
        }
        let projector = &frame * frame.adjoint();
        Ok(FermiProjection { geometry, internal_dim, fermi_energy: f64::NAN, gap: None, frame, projector })
    }

    pub fn rank(&self) -> usize {
        self.frame.ncols()
    }

    pub fn trace(&self) -> f64 {
        self.projector.trace().re
    }

    pub fn dim(&self) -> usize {
        self.projector.nrows()
    }

    /// `||P^2 - P||`, entrywise max.
    pub fn idempotency_error(&self) -> f64 {
        (&self.projector * &self.projector - &self.projector).camax()
    }

    /// `||P - P^dagger||`, entrywise max.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.projector - self.projector.adjoint()).camax()
    }

    pub fn to_block_operator(&self) -> Result<BlockOperator> {
        BlockOperator::from_dense(self.geometry.clone(), self.internal_dim, &self.projector)
    }

    pub fn decay_profile(&self) -> DecayProfile {
        DecayProfile::from_dense(&self.geometry, self.internal_dim, &self.projector)
    }

    /// `P (+) Q` on the same window with internal dimension `N_P + N_Q`.
    pub fn direct_sum(&self, other: &FermiProjection) -> Result<FermiProjection> {
        if *self.geometry != *other.geometry {
            return Err(Error::invalid("direct sum needs a common window"));
        }
        let (n1, n2) = (self.internal_dim, other.internal_dim);
        let n = n1 + n2;
        let sites = self.geometry.len();
        let mut frame = DMatrix::zeros(sites * n, self.rank() + other.rank());
        for x in 0..sites {
            for a in 0..n1 {
                for c in 0..self.rank() {
                    frame[(x * n + a, c)] = self.frame[(x * n1 + a, c)];
                }
            }
            for a in 0..n2 {
                for c in 0..other.rank() {
                    frame[(x * n + n1 + a, self.rank() + c)] = other.frame[(x * n2 + a, c)];
                }
            }
        }
        let mut sum = Self::from_frame(self.geometry.clone(), n, frame)?;
        sum.fermi_energy = self.fermi_energy;
        Ok(sum)
    }
}

pub fn fermi_projection(data: &SpectralData, e_f: f64) -> Result<FermiProjection> {
    let gap = spectral_gap(data, e_f)?;
    let rank = data.eigenvalues.iter().filter(|&&v| v < e_f).count();
    let frame = data.eigenvectors.columns(0, rank).into_owned();
    let mut p = FermiProjection::from_frame(data.geometry.clone(), data.internal_dim, frame)?;
    p.fermi_energy = e_f;
    p.gap = Some(gap);
    Ok(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSide {
    Lower,
    Upper,
    Bulk,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Crossing {
    /// Crossing lies between momenta `k_index` and `k_index + 1` (cyclically).
    pub k_index: usize,
    pub band: usize,
    /// Sign of `dE/dk` at the crossing.
    pub sign: i64,
    pub side: EdgeSide,
    pub lower_weight: f64,
    pub upper_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeOptions {
    /// Axis along which the strip is periodic.
    pub parallel_axis: usize,
    /// Half-width of the strip across the open direction.
    pub perp_half_width: i64,
    pub momenta: usize,
    pub fermi_energy: f64,
    /// Minimum weight on an edge quarter for a state to count as an edge state.
    pub edge_threshold: f64,
}

impl EdgeOptions {
    pub fn new(perp_half_width: i64, fermi_energy: f64) -> Self {
        EdgeOptions { parallel_axis: 0, perp_half_width, momenta: 256, fermi_energy, edge_threshold: 0.5 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeSpectrum {
    pub momenta: Vec<f64>,
    /// `bands[k][b]`, ascending in `b`.
    pub bands: Vec<Vec<f64>>,
    pub lower_weights: Vec<Vec<f64>>,
    pub upper_weights: Vec<Vec<f64>>,
    pub crossings: Vec<Crossing>,
    /// Net signed crossings on the lower edge; positive means `dE/dk > 0`.
    pub chirality: i64,
    pub upper_chirality: i64,
    pub warnings: Vec<String>,
}

/// Bloch-reduced spectrum of a strip periodic along `parallel_axis` and
/// open across it, with signed Fermi-level crossings per edge.
pub fn edge_spectrum(spec: &ModelSpec, dis: &DisorderSpec, opts: &EdgeOptions) -> Result<EdgeSpectrum> {
    if !dis.is_clean() {
        return Err(Error::precondition(
            "translation invariance",
            "edge spectra need a clean model; momentum is undefined under disorder",
        ));
    }
    if spec.dim() != 2 {
        return Err(Error::invalid("edge spectra are computed for d = 2 strips"));
    }
    if opts.parallel_axis > 1 || opts.momenta < 2 || opts.perp_half_width < 1 {
        return Err(Error::invalid("strip needs parallel axis 0 or 1, at least 2 momenta and width >= 3"));
    }
    let par = opts.parallel_axis;
    let perp = 1 - par;
    let mut strip = spec.clone();
    strip.half_widths = vec![0; 2];
    strip.half_widths[par] = 1;
    strip.half_widths[perp] = opts.perp_half_width;
    strip.periodic = vec![false; 2];
    strip.periodic[par] = true;
    let mut warnings = Vec::new();
    if let ModelKind::Hofstadter { q, gauge, .. } = &mut strip.kind {
        *gauge = Some(GaugeChoice::Landau { axis: par });
        let width = 2 * opts.perp_half_width + 1;
        if width < 4 * *q {
            warnings.push(format!("strip width {width} is below 4q = {}", 4 * *q));
        }
    }
    let h = build_hamiltonian(&strip, dis)?;
    let g = h.geometry().clone();
    let n = strip.internal_dim;
    let w = g.window();
    let m_perp = w.extent(perp);
    let column = |c: i64| -> Vec<usize> {
        (0..g.len())
            .filter(|&i| w.site_at(i).0[par] == c)
            .collect::<Vec<_>>()
    };
    let base = column(0);
    let hd = h.to_dense();
    let sub_block = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len() * n, cols.len() * n, |r, c| hd[(rows[r / n] * n + r % n, cols[c / n] * n + c % n)])
    };
    let hops: Vec<(f64, DMatrix<Complex64>)> = [-1i64, 0, 1].iter().map(|&d| (d as f64, sub_block(&base, &column(d)))).collect();
    let quarter = (m_perp / 4).max(1);
    let perp_index: Vec<usize> = base.iter().map(|&i| (w.site_at(i).0[perp] + opts.perp_half_width) as usize).collect();

    let momenta: Vec<f64> = (0..opts.momenta).map(|j| TAU * j as f64 / opts.momenta as f64 - std::f64::consts::PI).collect();
    let mut bands: Vec<Vec<f64>> = Vec::with_capacity(momenta.len());
    let mut lower_weights: Vec<Vec<f64>> = Vec::with_capacity(momenta.len());
    let mut upper_weights: Vec<Vec<f64>> = Vec::with_capacity(momenta.len());
    for &k in &momenta {
        let hk = hops
            .iter()
            .fold(DMatrix::zeros(m_perp * n, m_perp * n), |acc, (d, b)| acc + b * Complex64::from_polar(1.0, k * d));
        let hk = (&hk + hk.adjoint()) * Complex64::new(0.5, 0.0);
        let (vals, vecs) = sorted_eigen(hk);
        let weight = |col: usize, pick: &dyn Fn(usize) -> bool| -> f64 {
            (0..vecs.nrows()).filter(|r| pick(perp_index[r / n])).map(|r| vecs[(r, col)].norm_sqr()).sum()
        };
        lower_weights.push((0..vals.len()).map(|c| weight(c, &|p| p < quarter)).collect());
        upper_weights.push((0..vals.len()).map(|c| weight(c, &|p| p >= m_perp - quarter)).collect());
        bands.push(vals);
    }

    let e_f = opts.fermi_energy;
    let nk = momenta.len();
    let mut crossings = Vec::new();
    for j in 0..nk {
        let j2 = (j + 1) % nk;
        for b in 0..bands[j].len() {
            let (e1, e2) = (bands[j][b] - e_f, bands[j2][b] - e_f);
            if e1 * e2 < 0.0 {
                let at = if e1.abs() <= e2.abs() { j } else { j2 };
                let (lw, uw) = (lower_weights[at][b], upper_weights[at][b]);
                let side = if lw > opts.edge_threshold {
                    EdgeSide::Lower
                } else if uw > opts.edge_threshold {
                    EdgeSide::Upper
                } else {
                    EdgeSide::Bulk
                };
                let sign = if e2 > e1 { 1 } else { -1 };
                crossings.push(Crossing { k_index: j, band: b, sign, side, lower_weight: lw, upper_weight: uw });
            }
        }
    }
    let net = |side| crossings.iter().filter(|c| c.side == side).map(|c| c.sign).sum();
    let chirality = net(EdgeSide::Lower);
    let upper_chirality = net(EdgeSide::Upper);
    if crossings.iter().any(|c| c.side == EdgeSide::Bulk) {
        warnings.push("Fermi level crosses bulk states".to_string());
    }
    Ok(EdgeSpectrum { momenta, bands, lower_weights, upper_weights, crossings, chirality, upper_chirality, warnings })
}

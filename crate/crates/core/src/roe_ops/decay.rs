use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{spectral_norm, BlockOperator};
use crate::error::{Error, Result};
use crate::lattice::Geometry;

/// `k -> sup_n ||T_{n, n+k}||` over the label offsets present in a window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayProfile {
    pub entries: BTreeMap<Vec<i64>, f64>,
    /// Largest offset norm the window can represent.
    pub reach: f64,
}

impl DecayProfile {
    pub fn new(entries: BTreeMap<Vec<i64>, f64>, reach: f64) -> Self {
        DecayProfile { entries, reach }
    }

    /// Profile of a dense matrix on `geometry` with internal dimension `n`.
    pub fn from_dense(geometry: &Geometry, n: usize, m: &DMatrix<Complex64>) -> Self {
        let mut entries = BTreeMap::new();
        for x in 0..geometry.len() {
            for y in 0..geometry.len() {
                let b = m.view((x * n, y * n), (n, n)).into_owned();
                record(&mut entries, geometry.label_offset(x, y), &b);
            }
        }
        DecayProfile { entries, reach: reach(geometry) }
    }

    /// Radial envelope: largest entry per distinct offset norm.
    pub fn shells(&self) -> Vec<(f64, f64)> {
        let mut shells: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
        for (k, &p) in &self.entries {
            let r = k.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt();
            let key = (r * 1e9).round() as i64;
            let e = shells.entry(key).or_insert((r, 0.0));
            e.1 = e.1.max(p);
        }
        shells.into_values().collect()
    }

    /// Tail envelope `sup_{r <= r' <= cutoff} shell(r')` on the shells up to
    /// `cutoff`.
    pub fn tail_envelope(&self, cutoff: f64) -> Vec<(f64, f64)> {
        let mut shells: Vec<(f64, f64)> = self.shells().into_iter().filter(|s| s.0 <= cutoff).collect();
        let mut run = 0.0f64;
        for s in shells.iter_mut().rev() {
            run = run.max(s.1);
            s.1 = run;
        }
        shells
    }
}

fn record(entries: &mut BTreeMap<Vec<i64>, f64>, k: Vec<i64>, b: &DMatrix<Complex64>) {
    if b.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return;
    }
    let nrm = spectral_norm(b);
    let e = entries.entry(k).or_insert(0.0);
    *e = e.max(nrm);
}

fn reach(g: &Geometry) -> f64 {
    (0..g.dim())
        .map(|a| {
            let l = g.window().half_widths()[a] as f64;
            let m = if g.is_periodic(a) { l } else { 2.0 * l };
            m * m
        })
        .sum::<f64>()
        .sqrt()
}

pub fn decay_profile(t: &BlockOperator) -> DecayProfile {
    let g = t.geometry();
    let mut entries = BTreeMap::new();
    for (&(x, y), b) in t.blocks() {
        record(&mut entries, g.label_offset(x, y), b);
    }
    DecayProfile { entries, reach: reach(g) }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum DecayClass {
    /// Vanishes beyond `radius`; such operators lie in every decay class.
    Banded { radius: f64 },
    Exponential { rate: f64 },
    Rapid { order: f64 },
    None,
    Inconclusive { shells: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayClassification {
    pub class: DecayClass,
    pub shells_used: usize,
    pub exp_rate: f64,
    pub exp_rms: f64,
    pub poly_order: f64,
    pub poly_rms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayOptions {
    /// Shells within this distance of the window's reach are ignored.
    pub window_margin: f64,
    /// Polynomial order above which a non-exponential profile counts as rapid.
    pub rapid_order: f64,
    /// Entries below `noise_floor * max` are treated as roundoff.
    pub noise_floor: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions { window_margin: 0.0, rapid_order: 6.0, noise_floor: 1e-13 }
    }
}

/// Least-squares line `y = a + b x`; returns `(b, rms residual)`.
fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum::<f64>() / n).sqrt();
    (b, rms)
}

/// Classifies a profile as banded, exponential, rapid or none.
///
/// Non-banded profiles are fitted on the tail envelope, excluding the
/// origin, shells within `window_margin` of the reach, and shells under the
/// noise floor: `log p` against `r` (exponential) and against `log(1 + r)`
/// (polynomial). The exponential class wins when its fit has the smaller
/// residual and a positive rate.
pub fn classify_decay(p: &DecayProfile, opts: &DecayOptions) -> Result<DecayClassification> {
    if p.entries.is_empty() {
        return Err(Error::invalid("empty decay profile"));
    }
    let shells = p.shells();
    let support = shells.last().map(|s| s.0).unwrap_or(0.0);
    let cutoff = p.reach - opts.window_margin;
    let blank = |class| DecayClassification {
        class,
        shells_used: 0,
        exp_rate: f64::NAN,
        exp_rms: f64::NAN,
        poly_order: f64::NAN,
        poly_rms: f64::NAN,
    };
    if support < cutoff {
        return Ok(DecayClassification { shells_used: shells.len(), ..blank(DecayClass::Banded { radius: support }) });
    }
    let top = shells.iter().map(|s| s.1).fold(0.0, f64::max);
    let used: Vec<(f64, f64)> = p
        .tail_envelope(cutoff)
        .into_iter()
        .filter(|&(r, v)| r > 0.0 && v > opts.noise_floor * top)
        .collect();
    if used.len() < 4 {
        return Ok(blank(DecayClass::Inconclusive { shells: used.len() }));
    }
    let rs: Vec<f64> = used.iter().map(|s| s.0).collect();
    let logs: Vec<f64> = used.iter().map(|s| s.1.ln()).collect();
    let (slope, exp_rms) = fit_line(&rs, &logs);
    let log_rs: Vec<f64> = rs.iter().map(|r| (1.0 + r).ln()).collect();
    let (pslope, poly_rms) = fit_line(&log_rs, &logs);
    let exp_rate = -slope;
    let poly_order = -pslope;
    let class = if exp_rate > 0.0 && exp_rms <= poly_rms {
        DecayClass::Exponential { rate: exp_rate }
    } else if poly_order > opts.rapid_order {
        DecayClass::Rapid { order: poly_order }
    } else {
        DecayClass::None
    };
    Ok(DecayClassification { class, shells_used: used.len(), exp_rate, exp_rms, poly_order, poly_rms })
}

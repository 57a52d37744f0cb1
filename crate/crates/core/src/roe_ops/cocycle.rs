use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::{Block, BlockOperator};
use crate::error::{Error, Result};
use crate::lattice::{Site, Window};
use crate::rng::CounterRng;

/// Tolerance for the cocycle identity and the untwisting round trip.
pub const COCYCLE_TOL: f64 = 1e-10;

type TripleFn = dyn Fn(&[f64], &[f64], &[f64]) -> Complex64 + Send + Sync;
type PairFn = dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync;

/// A U(1)-valued function `w(x, z, y)` on triples of positions.
#[derive(Clone)]
pub struct Cocycle {
    eval: Arc<TripleFn>,
    label: String,
}

impl fmt::Debug for Cocycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cocycle({})", self.label)
    }
}

impl Cocycle {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&[f64], &[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Cocycle { eval: Arc::new(f), label: label.into() }
    }

    pub fn trivial() -> Self {
        Self::new("trivial", |_, _, _| Complex64::new(1.0, 0.0))
    }

    /// `w(x, z, y) = v(x, z) v(z, y) / v(x, y)`.
    pub fn coboundary(v: &GaugeFunction) -> Self {
        let v = v.clone();
        let label = format!("coboundary of {}", v.label);
        Self::new(label, move |x, z, y| v.eval(x, z) * v.eval(z, y) * v.eval(x, y).conj())
    }

    pub fn eval(&self, x: &[f64], z: &[f64], y: &[f64]) -> Complex64 {
        (self.eval)(x, z, y)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// A U(1)-valued function `v(x, y)` on pairs of positions.
#[derive(Clone)]
pub struct GaugeFunction {
    eval: Arc<PairFn>,
    label: String,
}

impl fmt::Debug for GaugeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GaugeFunction({})", self.label)
    }
}

impl GaugeFunction {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        GaugeFunction { eval: Arc::new(f), label: label.into() }
    }

    pub fn trivial() -> Self {
        Self::new("trivial", |_, _| Complex64::new(1.0, 0.0))
    }

    /// A pseudo-random unit function, fixed by `seed` and the bit patterns of
    /// its arguments.
    pub fn random(seed: u64) -> Self {
        let rng = CounterRng::new(seed, CounterRng::SAMPLING);
        Self::new(format!("random({seed})"), move |x, y| {
            let key = x.iter().chain(y).fold(0xcbf2_9ce4_8422_2325u64, |h, c| {
                (h ^ c.to_bits()).wrapping_mul(0x0100_0000_01b3)
            });
            Complex64::from_polar(1.0, std::f64::consts::TAU * rng.stream(key).uniform())
        })
    }

    /// Site-diagonal gauge transformation `v(x, y) = g(x) conj(g(y))`.
    pub fn from_site_phase(
        label: impl Into<String>,
        g: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(label, move |x, y| g(x) * g(y).conj())
    }

    pub fn conj(&self) -> Self {
        let v = self.clone();
        Self::new(format!("conj {}", self.label), move |x, y| v.eval(x, y).conj())
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Complex64 {
        (self.eval)(x, y)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

fn sample_quadruples(window: &Window, samples: usize, seed: u64) -> impl Iterator<Item = [Vec<f64>; 4]> + '_ {
    let rng = CounterRng::new(seed, CounterRng::SAMPLING);
    let n = window.len();
    (0..samples).map(move |i| {
        let mut d = rng.stream(i as u64);
        std::array::from_fn(|_| window.site_at(d.index(n)).to_position())
    })
}

/// Result of sampling the cocycle identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CocycleCheck {
    pub ok: bool,
    pub max_violation: f64,
    pub max_modulus_defect: f64,
}

/// Samples `w(x,z,y) w(x,t,z) = w(x,t,y) w(t,z,y)` on random quadruples of
/// window sites.
pub fn cocycle_check(w: &Cocycle, window: &Window, samples: usize, seed: u64) -> CocycleCheck {
    let mut max_violation = 0.0f64;
    let mut max_modulus_defect = 0.0f64;
    for [x, t, z, y] in sample_quadruples(window, samples, seed) {
        let a = w.eval(&x, &z, &y);
        let lhs = a * w.eval(&x, &t, &z);
        let rhs = w.eval(&x, &t, &y) * w.eval(&t, &z, &y);
        max_violation = max_violation.max((lhs - rhs).norm());
        max_modulus_defect = max_modulus_defect.max((a.norm() - 1.0).abs());
    }
    CocycleCheck {
        ok: max_violation < COCYCLE_TOL && max_modulus_defect < 1e-12,
        max_violation,
        max_modulus_defect,
    }
}

/// Number of random quadruples used to vet a cocycle before untwisting.
pub const UNTWIST_SAMPLES: usize = 1000;

/// The gauge `v(x, y) = w(x, y, e)`.
///
/// `w` is vetted with [`cocycle_check`] on `window` first.
pub fn untwist(w: &Cocycle, e: &Site, window: &Window) -> Result<GaugeFunction> {
    if e.dim() != window.dim() {
        return Err(Error::invalid("base point dimension differs from the window"));
    }
    let check = cocycle_check(w, window, UNTWIST_SAMPLES, 0);
    if !check.ok {
        return Err(Error::precondition(
            "cocycle",
            format!(
                "max cocycle violation {:.3e}, max |w|-1 {:.3e}",
                check.max_violation, check.max_modulus_defect
            ),
        ));
    }
    let w = w.clone();
    let base = e.to_position();
    Ok(GaugeFunction::new(format!("untwist of {} at {e}", w.label()), move |x, y| {
        w.eval(x, y, &base)
    }))
}

/// Largest `|w(x,z,y) - v(x,z) v(z,y) conj(v(x,y))|` over random triples.
pub fn reconstruction_error(w: &Cocycle, v: &GaugeFunction, window: &Window, samples: usize, seed: u64) -> f64 {
    sample_quadruples(window, samples, seed)
        .map(|[x, z, y, _]| (w.eval(&x, &z, &y) - v.eval(&x, &z) * v.eval(&z, &y) * v.eval(&x, &y).conj()).norm())
        .fold(0.0, f64::max)
}

/// `(S *_w T)_{x,y} = sum_z w(x,z,y) S_{x,z} T_{z,y}`.
pub fn twisted_product(s: &BlockOperator, t: &BlockOperator, w: &Cocycle) -> Result<BlockOperator> {
    s.ensure_compatible(t)?;
    let g = s.geometry();
    let rows = t.rows_index();
    let mut blocks: BTreeMap<(usize, usize), Block> = BTreeMap::new();
    for (&(x, z), sb) in s.blocks() {
        if let Some(row) = rows.get(&z) {
            for &(y, tb) in row {
                let phase = w.eval(g.position(x), g.position(z), g.position(y));
                let prod = (sb * tb) * phase;
                blocks.entry((x, y)).and_modify(|e| *e += &prod).or_insert(prod);
            }
        }
    }
    Ok(BlockOperator::from_parts(g.clone(), s.internal_dim(), blocks))
}

/// Multiplies block `(x, y)` by `v(x, y)`.
///
/// On periodic axes `y` is taken at its minimal-image position relative to
/// `x`.
pub fn apply_gauge(t: &BlockOperator, v: &GaugeFunction) -> BlockOperator {
    let g = t.geometry().clone();
    let mut out = t.map_blocks(|x, y, b| {
        let px = g.position(x);
        let py: Vec<f64> = px.iter().zip(g.displacement(x, y)).map(|(a, d)| a + d).collect();
        b * v.eval(px, &py)
    });
    out.hermitian = false;
    out
}

/// `w(x, z, y) = exp(i flux A(x, z, y))` with `A` the oriented area of the
/// triangle `(x, z, y)`.
pub fn magnetic_cocycle(flux: f64, dim: usize) -> Result<Cocycle> {
    if dim != 2 {
        return Err(Error::invalid(format!("magnetic cocycles are implemented for d = 2, got d = {dim}")));
    }
    if !flux.is_finite() {
        return Err(Error::invalid("flux must be finite"));
    }
    Ok(Cocycle::new(format!("magnetic({flux})"), move |x, z, y| {
        let area = 0.5 * ((z[0] - x[0]) * (y[1] - x[1]) - (z[1] - x[1]) * (y[0] - x[0]));
        Complex64::from_polar(1.0, flux * area)
    }))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::super::test_support::*;
    use super::*;
    use crate::lattice::Window;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn trivial_twist_is_ordinary_product() {
        let g = lattice(1, 3);
        let s = random_banded(g.clone(), 2, 1, 1);
        let t = random_banded(g, 2, 2, 2);
        assert_eq!(twisted_product(&s, &t, &Cocycle::trivial()).unwrap(), s.mul(&t).unwrap());
    }

    #[test]
    fn twisted_identity_product() {
        let g = lattice(2, 2);
        let id = BlockOperator::identity(g.clone(), 2);
        let w = magnetic_cocycle(1.3, 2).unwrap();
        let p = twisted_product(&id, &id, &w).unwrap();
        assert!((p.to_dense() - id.to_dense()).camax() < 1e-15);
    }

    #[test]
    fn associativity_iff_cocycle() {
        let g = lattice(1, 3);
        let s = random_banded(g.clone(), 2, 1, 11);
        let t = random_banded(g.clone(), 2, 1, 12);
        let u = random_banded(g, 2, 1, 13);
        let assoc_err = |w: &Cocycle| {
            let left = twisted_product(&twisted_product(&s, &t, w).unwrap(), &u, w).unwrap();
            let right = twisted_product(&s, &twisted_product(&t, &u, w).unwrap(), w).unwrap();
            (left.to_dense() - right.to_dense()).camax()
        };
        let good = Cocycle::coboundary(&GaugeFunction::random(5));
        assert!(cocycle_check(&good, &Window::new(1, 3).unwrap(), 500, 1).ok);
        assert!(assoc_err(&good) < 1e-10);

        let bad = Cocycle::new("planted", |x, _, _| Complex64::from_polar(1.0, x[0]));
        assert!(!cocycle_check(&bad, &Window::new(1, 3).unwrap(), 500, 1).ok);
        assert!(assoc_err(&bad) > 1e-3);
    }

    #[test]
    fn cocycle_check_examples() {
        let win = Window::new(2, 3).unwrap();
        assert_eq!(cocycle_check(&Cocycle::trivial(), &win, 100, 0).max_violation, 0.0);
        let cob = Cocycle::coboundary(&GaugeFunction::random(9));
        assert!(cocycle_check(&cob, &win, 1000, 0).max_violation < 1e-12);
        let bad = Cocycle::new("exp(i x1)", |x, _, _| Complex64::from_polar(1.0, x[0]));
        let check = cocycle_check(&bad, &win, 1000, 0);
        assert!(!check.ok && check.max_violation > 0.1);
    }

    #[test]
    fn untwist_examples() {
        let win = Window::new(2, 4).unwrap();
        let v = untwist(&Cocycle::trivial(), &Site(vec![0, 0]), &win).unwrap();
        assert_eq!(v.eval(&[1.0, 2.0], &[-3.0, 0.0]), Complex64::new(1.0, 0.0));

        let w = magnetic_cocycle(2.0 * PI / 3.0, 2).unwrap();
        for e in [Site(vec![0, 0]), Site(vec![1, 0])] {
            let v = untwist(&w, &e, &win).unwrap();
            assert!(reconstruction_error(&w, &v, &win, 1000, 3) < 1e-10);
        }

        let bad = Cocycle::new("planted", |x, _, _| Complex64::from_polar(1.0, x[0]));
        assert!(matches!(untwist(&bad, &Site(vec![0, 0]), &win), Err(Error::Precondition { .. })));
    }

    #[test]
    fn magnetic_cocycle_examples() {
        let w0 = magnetic_cocycle(0.0, 2).unwrap();
        assert_eq!(w0.eval(&[0.0, 0.0], &[3.0, 1.0], &[-2.0, 5.0]), Complex64::new(1.0, 0.0));
        let w = magnetic_cocycle(2.0 * PI / 3.0, 2).unwrap();
        assert_eq!(w.eval(&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]), Complex64::new(1.0, 0.0));
        assert!(close(
            w.eval(&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0]),
            Complex64::from_polar(1.0, PI / 3.0),
            1e-15
        ));
        assert!(magnetic_cocycle(1.0, 3).is_err());
    }

    #[test]
    fn gauge_is_homomorphism_and_invertible() {
        let g = lattice(2, 2);
        let win = g.window().clone();
        let s = random_banded(g.clone(), 2, 1, 21);
        let t = random_banded(g, 2, 1, 22);
        let w = magnetic_cocycle(PI, 2).unwrap();
        let v = untwist(&w, &Site(vec![0, 0]), &win).unwrap();
        let lhs = apply_gauge(&twisted_product(&s, &t, &w).unwrap(), &v);
        let rhs = apply_gauge(&s, &v).mul(&apply_gauge(&t, &v)).unwrap();
        assert!((lhs.to_dense() - rhs.to_dense()).camax() < 1e-10);

        assert_eq!(apply_gauge(&s, &GaugeFunction::trivial()), s);
        let back = apply_gauge(&apply_gauge(&s, &v), &v.conj());
        assert!((back.to_dense() - s.to_dense()).camax() < 1e-14);
        assert_eq!(apply_gauge(&s, &v).propagation(), s.propagation());
    }
}

//! Lattice geometry: sites of Z^d, centred finite windows, half-spaces,
//! coordinate embeddings and Delone point sets.
//!
//! Axes are 0-based throughout. Sites inside a window are ordered
//! lexicographically (first coordinate slowest), and that order fixes every
//! matrix index in the crate.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// A point of Z^d.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site(pub Vec<i64>);

impl Site {
    pub fn new(coords: Vec<i64>) -> Self {
        Site(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn to_position(&self) -> Vec<f64> {
        self.0.iter().map(|&c| c as f64).collect()
    }

    pub fn distance(&self, other: &Site) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| ((a - b) as f64).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A centred box `[-L_0, L_0] x ... x [-L_{d-1}, L_{d-1}]` of lattice sites.
///
/// Most of the crate uses cubes (`Window::new`); strips for edge spectra use
/// per-axis half-widths.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    half_widths: Vec<i64>,
}

impl Window {
    pub fn new(dim: usize, half_width: i64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("window dimension must be at least 1"));
        }
        Self::boxed(vec![half_width; dim])
    }

    pub fn boxed(half_widths: Vec<i64>) -> Result<Self> {
        if half_widths.is_empty() {
            return Err(Error::invalid("window dimension must be at least 1"));
        }
        if let Some(l) = half_widths.iter().find(|&&l| l < 0) {
            return Err(Error::invalid(format!("negative half-width {l}")));
        }
        Ok(Window { half_widths })
    }

    pub fn dim(&self) -> usize {
        self.half_widths.len()
    }

    pub fn half_widths(&self) -> &[i64] {
        &self.half_widths
    }

    /// Largest half-width; equals `L` for cubes.
    pub fn half_width(&self) -> i64 {
        self.half_widths.iter().copied().max().unwrap_or(0)
    }

    /// Number of sites along `axis` (`2L + 1`).
    pub fn extent(&self, axis: usize) -> usize {
        (2 * self.half_widths[axis] + 1) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|a| self.extent(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: &Site) -> bool {
        site.dim() == self.dim()
            && site
                .0
                .iter()
                .zip(&self.half_widths)
                .all(|(&c, &l)| c.abs() <= l)
    }

    pub fn index_of(&self, site: &Site) -> Option<usize> {
        if !self.contains(site) {
            return None;
        }
        let mut idx = 0usize;
        for (axis, &c) in site.0.iter().enumerate() {
            idx = idx * self.extent(axis) + (c + self.half_widths[axis]) as usize;
        }
        Some(idx)
    }

    pub fn site_at(&self, mut index: usize) -> Site {
        let mut coords = vec![0i64; self.dim()];
        for axis in (0..self.dim()).rev() {
            let m = self.extent(axis);
            coords[axis] = (index % m) as i64 - self.half_widths[axis];
            index /= m;
        }
        Site(coords)
    }

    pub fn sites(&self) -> Vec<Site> {
        (0..self.len()).map(|i| self.site_at(i)).collect()
    }

    /// Euclidean diameter of the box.
    pub fn diameter(&self) -> f64 {
        self.half_widths
            .iter()
            .map(|&l| (2 * l) as f64)
            .map(|e| e * e)
            .sum::<f64>()
            .sqrt()
    }
}

/// All sites of `[-L, L]^d` in lexicographic order.
pub fn window_sites(dim: usize, half_width: i64) -> Result<Vec<Site>> {
    Ok(Window::new(dim, half_width)?.sites())
}

/// Which half of a coordinate split to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    NonNegative,
    NonPositive,
}

/// The half-space `x_axis >= 0` or `x_axis <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub axis: usize,
    pub side: Side,
}

impl HalfSpace {
    pub fn contains(&self, site: &Site) -> bool {
        let c = site.0[self.axis];
        match self.side {
            Side::NonNegative => c >= 0,
            Side::NonPositive => c <= 0,
        }
    }
}

/// Sites of `window` inside the half-space, in window order.
pub fn half_space_sites(window: &Window, half: HalfSpace) -> Result<Vec<Site>> {
    if half.axis >= window.dim() {
        return Err(Error::invalid(format!(
            "half-space axis {} out of range for dimension {}",
            half.axis,
            window.dim()
        )));
    }
    Ok(window.sites().into_iter().filter(|s| half.contains(s)).collect())
}

/// Coordinate embedding Z^{d-1} -> Z^d inserting a zero at position `axis`.
pub fn stack_embed(axis: usize, site: &Site) -> Result<Site> {
    if axis > site.dim() {
        return Err(Error::invalid(format!(
            "embedding axis {axis} out of range for target dimension {}",
            site.dim() + 1
        )));
    }
    let mut coords = site.0.clone();
    coords.insert(axis, 0);
    Ok(Site(coords))
}

/// A finite point set in R^d with its separation and covering data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    positions: Vec<Vec<f64>>,
    /// Minimal pairwise Euclidean separation (infinite for fewer than two points).
    pub r_min: f64,
    /// Covering radius with respect to the enclosing window.
    pub r_cov: f64,
}

impl PointSet {
    pub fn new(window: &Window, positions: Vec<Vec<f64>>) -> Result<Self> {
        let dim = window.dim();
        if let Some(p) = positions.iter().find(|p| p.len() != dim) {
            return Err(Error::invalid(format!(
                "point of dimension {} in a {dim}-dimensional set",
                p.len()
            )));
        }
        let r_min = min_separation(&positions);
        let r_cov = window
            .sites()
            .iter()
            .map(|s| nearest_distance(&s.to_position(), &positions))
            .fold(0.0, f64::max);
        Ok(PointSet { dim, positions, r_min, r_cov })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn nearest_distance(p: &[f64], points: &[Vec<f64>]) -> f64 {
    points.iter().map(|q| euclid(p, q)).fold(f64::INFINITY, f64::min)
}

fn min_separation(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.min(euclid(p, q));
        }
    }
    best
}

/// True iff every site of `window` lies within distance `radius` of `points`.
pub fn is_coarsely_dense(points: &PointSet, window: &Window, radius: f64) -> bool {
    window
        .sites()
        .iter()
        .all(|s| nearest_distance(&s.to_position(), points.positions()) <= radius)
}

/// Displaces every window site by an independent uniform vector in
/// `[-amplitude, amplitude]^d`.
///
/// The draw for a site depends only on `(seed, site index)`.
pub fn delone_perturb(window: &Window, amplitude: f64, seed: u64) -> Result<PointSet> {
    if !(0.0..0.5).contains(&amplitude) {
        return Err(Error::invalid(format!(
            "perturbation amplitude {amplitude} must lie in [0, 0.5)"
        )));
    }
    let rng = CounterRng::new(seed, CounterRng::POSITIONAL);
    let positions = window
        .sites()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut draws = rng.stream(i as u64);
            s.0.iter()
                .map(|&c| c as f64 + amplitude * (2.0 * draws.uniform() - 1.0))
                .collect()
        })
        .collect();
    PointSet::new(window, positions)
}

/// Finite geometry carried by an operator: a window of site labels, the
/// physical positions of those sites, and which axes wrap around.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    window: Window,
    positions: Vec<Vec<f64>>,
    periodic: Vec<bool>,
}

impl Geometry {
    pub fn lattice(window: Window, periodic: Vec<bool>) -> Result<Self> {
        let positions = window.sites().iter().map(Site::to_position).collect();
        Self::with_positions(window, positions, periodic)
    }

    pub fn open(window: Window) -> Self {
        let d = window.dim();
        Self::lattice(window, vec![false; d]).expect("open lattice geometry is always valid")
    }

    pub fn from_point_set(window: Window, points: &PointSet, periodic: Vec<bool>) -> Result<Self> {
        if points.len() != window.len() {
            return Err(Error::invalid("point set must have one point per window site"));
        }
        Self::with_positions(window, points.positions().to_vec(), periodic)
    }

    fn with_positions(window: Window, positions: Vec<Vec<f64>>, periodic: Vec<bool>) -> Result<Self> {
        if periodic.len() != window.dim() {
            return Err(Error::invalid("one periodicity flag per axis is required"));
        }
        Ok(Geometry { window, positions, periodic })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic[axis]
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i]
    }

    pub fn site(&self, i: usize) -> Site {
        self.window.site_at(i)
    }

    /// Label offset `site(j) - site(i)`, reduced to the minimal image on
    /// periodic axes.
    pub fn label_offset(&self, i: usize, j: usize) -> Vec<i64> {
        let a = self.window.site_at(i);
        let b = self.window.site_at(j);
        (0..self.dim())
            .map(|axis| {
                let raw = b.0[axis] - a.0[axis];
                if self.periodic[axis] {
                    let m = self.window.extent(axis) as i64;
                    let r = raw.rem_euclid(m);
                    if r > m / 2 { r - m } else { r }
                } else {
                    raw
                }
            })
            .collect()
    }

    /// Displacement `p_j - p_i`, minimal image on periodic axes.
    pub fn displacement(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|axis| {
                let raw = self.positions[j][axis] - self.positions[i][axis];
                if self.periodic[axis] {
                    let m = self.window.extent(axis) as f64;
                    raw - m * (raw / m).round()
                } else {
                    raw
                }
            })
            .collect()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.displacement(i, j).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Site index reached from `i` by the label step `step`, wrapping on
    /// periodic axes; `None` if the step leaves an open window.
    pub fn neighbor(&self, i: usize, step: &[i64]) -> Option<usize> {
        let mut s = self.window.site_at(i);
        for (axis, &d) in step.iter().enumerate() {
            let l = self.window.half_widths()[axis];
            let mut c = s.0[axis] + d;
            if self.periodic[axis] {
                let m = 2 * l + 1;
                c = (c + l).rem_euclid(m) - l;
            } else if c.abs() > l {
                return None;
            }
            s.0[axis] = c;
        }
        self.window.index_of(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(c: &[i64]) -> Site {
        Site(c.to_vec())
    }

    #[test]
    fn window_enumeration_examples() {
        assert_eq!(window_sites(1, 1).unwrap(), vec![s(&[-1]), s(&[0]), s(&[1])]);
        assert_eq!(window_sites(2, 0).unwrap(), vec![s(&[0, 0])]);
        let w = window_sites(2, 1).unwrap();
        assert_eq!(w.len(), 9);
        assert_eq!(w[0], s(&[-1, -1]));
        assert_eq!(w[8], s(&[1, 1]));
    }

    #[test]
    fn window_rejects_bad_shapes() {
        assert!(window_sites(0, 2).is_err());
        assert!(window_sites(2, -1).is_err());
    }

    #[test]
    fn index_round_trip() {
        let w = Window::boxed(vec![2, 0, 3]).unwrap();
        for i in 0..w.len() {
            assert_eq!(w.index_of(&w.site_at(i)), Some(i));
        }
        assert_eq!(w.index_of(&s(&[3, 0, 0])), None);
    }

    #[test]
    fn coarse_density_examples() {
        let win = Window::new(2, 3).unwrap();
        let all = PointSet::new(&win, win.sites().iter().map(Site::to_position).collect()).unwrap();
        assert!(is_coarsely_dense(&all, &win, 0.0));

        let even: Vec<Vec<f64>> = win
            .sites()
            .iter()
            .filter(|s| s.0.iter().all(|c| c % 2 == 0))
            .map(Site::to_position)
            .collect();
        let even = PointSet::new(&win, even).unwrap();
        assert!(is_coarsely_dense(&even, &win, 1.5));
        assert!(!is_coarsely_dense(&even, &win, 1.4));

        let origin = PointSet::new(&win, vec![vec![0.0, 0.0]]).unwrap();
        assert!(!is_coarsely_dense(&origin, &win, 1.0));

        let empty = PointSet::new(&win, vec![]).unwrap();
        assert!(!is_coarsely_dense(&empty, &win, 100.0));
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(stack_embed(0, &s(&[5])).unwrap(), s(&[0, 5]));
        assert_eq!(stack_embed(1, &s(&[5])).unwrap(), s(&[5, 0]));
        assert_eq!(stack_embed(0, &s(&[])).unwrap(), s(&[0]));
        assert!(stack_embed(2, &s(&[5])).is_err());
    }

    #[test]
    fn delone_examples() {
        let win = Window::new(2, 4).unwrap();
        let zero = delone_perturb(&win, 0.0, 7).unwrap();
        for (p, site) in zero.positions().iter().zip(win.sites()) {
            assert_eq!(p, &site.to_position());
        }
        let a = delone_perturb(&win, 0.2, 11).unwrap();
        // exhaustive pairwise scan, independent of the stored r_min
        let mut scan = f64::INFINITY;
        for i in 0..a.len() {
            for j in 0..a.len() {
                if i != j {
                    scan = scan.min(euclid(&a.positions()[i], &a.positions()[j]));
                }
            }
        }
        assert!(scan >= 0.6, "min separation {scan}");
        assert_eq!(scan, a.r_min);
        assert!(a.r_cov <= 0.2 * 2f64.sqrt() + 1e-15);
        assert_eq!(a, delone_perturb(&win, 0.2, 11).unwrap());
        assert!(delone_perturb(&win, 0.5, 1).is_err());
    }

    #[test]
    fn half_space_examples() {
        let w1 = Window::new(1, 1).unwrap();
        let pos = half_space_sites(&w1, HalfSpace { axis: 0, side: Side::NonNegative }).unwrap();
        assert_eq!(pos, vec![s(&[0]), s(&[1])]);

        let w2 = Window::new(2, 1).unwrap();
        let up = half_space_sites(&w2, HalfSpace { axis: 1, side: Side::NonNegative }).unwrap();
        assert_eq!(up.len(), 6);
        let down = half_space_sites(&w2, HalfSpace { axis: 1, side: Side::NonPositive }).unwrap();
        let mut union: Vec<Site> = up.iter().chain(&down).cloned().collect();
        union.sort();
        union.dedup();
        let mut all = w2.sites();
        all.sort();
        assert_eq!(union, all);
        let shared: Vec<&Site> = up.iter().filter(|x| down.contains(x)).collect();
        assert!(shared.iter().all(|x| x.0[1] == 0));
        assert_eq!(shared.len(), 3);
    }

    #[test]
    fn periodic_offsets_wrap() {
        let g = Geometry::lattice(Window::new(1, 2).unwrap(), vec![true]).unwrap();
        // sites -2..=2; from -2 to 2 is one step backwards on the ring
        assert_eq!(g.label_offset(0, 4), vec![-1]);
        assert_eq!(g.displacement(0, 4), vec![-1.0]);
        assert_eq!(g.neighbor(4, &[1]), Some(0));
        let open = Geometry::open(Window::new(1, 2).unwrap());
        assert_eq!(open.neighbor(4, &[1]), None);
    }
}

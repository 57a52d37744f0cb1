//! Finite-window block operators and the operator-level machinery built on
//! them: twisted products, untwisting gauges, smoothing, decay profiles and
//! norm localization.

mod cocycle;
mod decay;
pub mod io;
mod localize;
mod smoothing;

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::Geometry;

pub use cocycle::{
    apply_gauge, cocycle_check, magnetic_cocycle, reconstruction_error, twisted_product, untwist,
    CocycleCheck, Cocycle, GaugeFunction, COCYCLE_TOL, UNTWIST_SAMPLES,
};
pub use decay::{classify_decay, decay_profile, DecayClass, DecayClassification, DecayOptions, DecayProfile};
pub use localize::{localize_norm, Localization};
pub use smoothing::fejer_smooth;

pub type Block = DMatrix<Complex64>;

/// Tolerance for entrywise hermiticity of assembled operators.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Spectral norm of a dense matrix.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.ncols() == 1 || m.nrows() == 1 {
        return m.norm();
    }
    m.clone().singular_values().max()
}

/// A finitely supported map `(site, site) -> N x N` complex block.
///
/// Only nonzero blocks are stored. Dense matrix views order the basis as
/// `site * N + orbital`.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    geometry: Arc<Geometry>,
    internal_dim: usize,
    blocks: BTreeMap<(usize, usize), Block>,
    hermitian: bool,
}

impl PartialEq for BlockOperator {
    fn eq(&self, other: &Self) -> bool {
        self.internal_dim == other.internal_dim
            && self.hermitian == other.hermitian
            && self.blocks == other.blocks
            && (Arc::ptr_eq(&self.geometry, &other.geometry) || self.geometry == other.geometry)
    }
}

impl BlockOperator {
    pub fn zero(geometry: Arc<Geometry>, internal_dim: usize) -> Self {
        BlockOperator { geometry, internal_dim, blocks: BTreeMap::new(), hermitian: true }
    }

    pub fn identity(geometry: Arc<Geometry>, internal_dim: usize) -> Self {
        let mut op = Self::zero(geometry, internal_dim);
        for x in 0..op.sites() {
            op.blocks.insert((x, x), Block::identity(internal_dim, internal_dim));
        }
        op
    }

    /// Site-diagonal operator with the given blocks.
    pub fn diagonal(geometry: Arc<Geometry>, internal_dim: usize, diag: Vec<Block>) -> Result<Self> {
        if diag.len() != geometry.len() {
            return Err(Error::invalid("one diagonal block per site is required"));
        }
        let mut op = Self::zero(geometry, internal_dim);
        op.hermitian = false;
        for (x, b) in diag.into_iter().enumerate() {
            op.set_block(x, x, b)?;
        }
        Ok(op)
    }

    pub fn from_dense(geometry: Arc<Geometry>, internal_dim: usize, m: &DMatrix<Complex64>) -> Result<Self> {
        let n = internal_dim;
        let dim = geometry.len() * n;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::invalid(format!(
                "dense matrix is {}x{}, expected {dim}x{dim}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut op = Self::zero(geometry, n);
        op.hermitian = false;
        let sites = op.sites();
        for x in 0..sites {
            for y in 0..sites {
                let b = m.view((x * n, y * n), (n, n)).into_owned();
                if b.iter().any(|z| *z != Complex64::new(0.0, 0.0)) {
                    op.blocks.insert((x, y), b);
                }
            }
        }
        Ok(op)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.internal_dim;
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (&(x, y), b) in &self.blocks {
            m.view_mut((x * n, y * n), (n, n)).copy_from(b);
        }
        m
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geometry
    }

    pub fn internal_dim(&self) -> usize {
        self.internal_dim
    }

    pub fn sites(&self) -> usize {
        self.geometry.len()
    }

    /// Total Hilbert-space dimension `sites * N`.
    pub fn dim(&self) -> usize {
        self.sites() * self.internal_dim
    }

    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    /// Sets the hermitian hint after verifying it.
    pub fn mark_hermitian(&mut self) -> Result<()> {
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::precondition(
                "hermitian",
                format!("max |T_xy - T_yx^*| = {dev:.3e}"),
            ));
        }
        self.hermitian = true;
        Ok(())
    }

    /// Largest entrywise deviation `|T_xy - (T_yx)^*|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.internal_dim;
        let empty = Block::zeros(n, n);
        let mut dev = 0.0f64;
        for (&(x, y), b) in &self.blocks {
            let other = self.blocks.get(&(y, x)).unwrap_or(&empty);
            dev = dev.max((b - other.adjoint()).camax());
        }
        dev
    }

    pub fn block(&self, x: usize, y: usize) -> Option<&Block> {
        self.blocks.get(&(x, y))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &Block)> {
        self.blocks.iter()
    }

    pub fn nnz_blocks(&self) -> usize {
        self.blocks.len()
    }

    fn check_key(&self, x: usize, y: usize, b: &Block) -> Result<()> {
        if x >= self.sites() || y >= self.sites() {
            return Err(Error::invalid(format!("block ({x},{y}) outside a {}-site window", self.sites())));
        }
        if b.nrows() != self.internal_dim || b.ncols() != self.internal_dim {
            return Err(Error::invalid(format!(
                "block is {}x{}, internal dimension is {}",
                b.nrows(),
                b.ncols(),
                self.internal_dim
            )));
        }
        Ok(())
    }

    /// Replaces block `(x, y)`; all-zero blocks are removed.
    pub fn set_block(&mut self, x: usize, y: usize, b: Block) -> Result<()> {
        self.check_key(x, y, &b)?;
        self.hermitian = false;
        if b.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            self.blocks.remove(&(x, y));
        } else {
            self.blocks.insert((x, y), b);
        }
        Ok(())
    }

    /// Adds `b` to block `(x, y)`.
    pub fn add_block(&mut self, x: usize, y: usize, b: &Block) -> Result<()> {
        self.check_key(x, y, b)?;
        self.hermitian = false;
        match self.blocks.get_mut(&(x, y)) {
            Some(existing) => *existing += b,
            None => {
                self.blocks.insert((x, y), b.clone());
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts(
        geometry: Arc<Geometry>,
        internal_dim: usize,
        blocks: BTreeMap<(usize, usize), Block>,
    ) -> Self {
        let blocks = blocks
            .into_iter()
            .filter(|(_, b)| b.iter().any(|z| *z != Complex64::new(0.0, 0.0)))
            .collect();
        BlockOperator { geometry, internal_dim, blocks, hermitian: false }
    }

    pub(crate) fn ensure_compatible(&self, other: &BlockOperator) -> Result<()> {
        if self.internal_dim != other.internal_dim {
            return Err(Error::invalid(format!(
                "internal dimensions differ ({} vs {})",
                self.internal_dim, other.internal_dim
            )));
        }
        if !Arc::ptr_eq(&self.geometry, &other.geometry) && self.geometry != other.geometry {
            return Err(Error::invalid("operators live on different windows"));
        }
        Ok(())
    }

    /// Applies `f(x, y, block)` to every stored block.
    pub fn map_blocks(&self, mut f: impl FnMut(usize, usize, &Block) -> Block) -> BlockOperator {
        let blocks = self.blocks.iter().map(|(&(x, y), b)| ((x, y), f(x, y, b))).collect();
        Self::from_parts(self.geometry.clone(), self.internal_dim, blocks)
    }

    pub fn scale(&self, c: Complex64) -> BlockOperator {
        let mut out = self.map_blocks(|_, _, b| b * c);
        out.hermitian = self.hermitian && c.im == 0.0;
        out
    }

    pub fn adjoint(&self) -> BlockOperator {
        let blocks = self.blocks.iter().map(|(&(x, y), b)| ((y, x), b.adjoint())).collect();
        let mut out = Self::from_parts(self.geometry.clone(), self.internal_dim, blocks);
        out.hermitian = self.hermitian;
        out
    }

    pub fn add(&self, other: &BlockOperator) -> Result<BlockOperator> {
        self.ensure_compatible(other)?;
        let mut blocks = self.blocks.clone();
        for (k, b) in &other.blocks {
            blocks.entry(*k).and_modify(|e| *e += b).or_insert_with(|| b.clone());
        }
        let mut out = Self::from_parts(self.geometry.clone(), self.internal_dim, blocks);
        out.hermitian = self.hermitian && other.hermitian;
        Ok(out)
    }

    pub fn sub(&self, other: &BlockOperator) -> Result<BlockOperator> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Ordinary product; the twisted product with the trivial cocycle.
    pub fn mul(&self, other: &BlockOperator) -> Result<BlockOperator> {
        self.ensure_compatible(other)?;
        let n = self.internal_dim;
        let rows = other.rows_index();
        let mut blocks: BTreeMap<(usize, usize), Block> = BTreeMap::new();
        for (&(x, z), s) in &self.blocks {
            if let Some(row) = rows.get(&z) {
                for &(y, t) in row {
                    let prod = s * t;
                    blocks
                        .entry((x, y))
                        .and_modify(|e| *e += &prod)
                        .or_insert_with(|| prod.clone());
                }
            }
        }
        debug_assert!(blocks.values().all(|b| b.nrows() == n));
        Ok(Self::from_parts(self.geometry.clone(), n, blocks))
    }

    /// Blocks grouped by row site.
    pub(crate) fn rows_index(&self) -> BTreeMap<usize, Vec<(usize, &Block)>> {
        let mut rows: BTreeMap<usize, Vec<(usize, &Block)>> = BTreeMap::new();
        for (&(z, y), b) in &self.blocks {
            rows.entry(z).or_default().push((y, b));
        }
        rows
    }

    /// Operator norm of the dense matrix.
    pub fn norm(&self) -> f64 {
        if self.blocks.is_empty() {
            return 0.0;
        }
        spectral_norm(&self.to_dense())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(|b| b.camax()).fold(0.0, f64::max)
    }

    /// Largest distance `d(x, y)` over nonzero blocks.
    pub fn propagation(&self) -> f64 {
        propagation(self)
    }
}

/// Largest distance between the sites of a nonzero block; 0 for diagonal and
/// zero operators.
pub fn propagation(t: &BlockOperator) -> f64 {
    t.blocks
        .keys()
        .map(|&(x, y)| t.geometry.distance(x, y))
        .fold(0.0, f64::max)
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::lattice::Window;
    use crate::rng::CounterRng;

    pub fn lattice(dim: usize, l: i64) -> Arc<Geometry> {
        Arc::new(Geometry::open(Window::new(dim, l).unwrap()))
    }

    /// Random operator whose blocks vanish unless every `|x_j - y_j| <= band`.
    pub fn random_banded(geometry: Arc<Geometry>, n: usize, band: i64, seed: u64) -> BlockOperator {
        let rng = CounterRng::new(seed, CounterRng::SAMPLING);
        let sites = geometry.len();
        let mut op = BlockOperator::zero(geometry.clone(), n);
        for x in 0..sites {
            for y in 0..sites {
                let off = geometry.label_offset(x, y);
                if off.iter().all(|o| o.abs() <= band) {
                    let mut d = rng.stream((x * sites + y) as u64);
                    let b = Block::from_fn(n, n, |_, _| Complex64::new(d.range(-1.0, 1.0), d.range(-1.0, 1.0)));
                    op.set_block(x, y, b).unwrap();
                }
            }
        }
        op
    }
}

//! The exterior algebra `Λ*(C^d)`, creation operators and the Dirac symbol.
//!
//! Basis vectors `e_S` are indexed by the bitmask of `S ⊂ {1..d}` (bit
//! `j - 1` set iff `j ∈ S`), in increasing mask order. The wedge sign is
//! `λ_v e_S = sum_{j ∉ S} v_j (-1)^{#{i ∈ S : i < j}} e_{S ∪ j}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 12;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExteriorAlgebra {
    d: usize,
}

impl ExteriorAlgebra {
    pub fn new(d: usize) -> Result<Self> {
        if d > MAX_DIM {
            return Err(Error::invalid(format!("exterior algebra limited to d <= {MAX_DIM}, got {d}")));
        }
        Ok(ExteriorAlgebra { d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        1 << self.d
    }

    /// Subsets as bitmasks, in basis order.
    pub fn basis(&self) -> Vec<u32> {
        (0..self.dim() as u32).collect()
    }

    pub fn is_even(mask: u32) -> bool {
        mask.count_ones() % 2 == 0
    }

    pub fn even_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| Self::is_even(i as u32)).collect()
    }

    pub fn odd_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| !Self::is_even(i as u32)).collect()
    }

    /// The grading involution `e_S -> (-1)^{|S|} e_S`.
    pub fn grading(&self) -> CMatrix {
        CMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            if r != c {
                Complex64::new(0.0, 0.0)
            } else if Self::is_even(r as u32) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(-1.0, 0.0)
            }
        })
    }

    /// Wedge with `v`.
    pub fn creation(&self, v: &[Complex64]) -> Result<CMatrix> {
        if v.len() != self.d {
            return Err(Error::invalid(format!("vector of length {} in dimension {}", v.len(), self.d)));
        }
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for s in 0..self.dim() as u32 {
            for (j, &vj) in v.iter().enumerate() {
                let bit = 1u32 << j;
                if s & bit != 0 || vj == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let below = (s & (bit - 1)).count_ones();
                let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
                m[((s | bit) as usize, s as usize)] += vj * sign;
            }
        }
        Ok(m)
    }

    pub fn creation_real(&self, v: &[f64]) -> Result<CMatrix> {
        let c: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.creation(&c)
    }

    /// Clifford action `c(n) = λ_n + λ_n*`, squaring to `||n||^2`.
    pub fn clifford(&self, n: &[f64]) -> Result<CMatrix> {
        let l = self.creation_real(n)?;
        Ok(&l + l.adjoint())
    }
}

/// Wedge with `v` on `Λ*(C^d)`, `d = v.len()`.
pub fn creation(v: &[Complex64]) -> Result<CMatrix> {
    ExteriorAlgebra::new(v.len())?.creation(v)
}

/// `F(n) = (1 + ||n||^2)^{-1/2} (λ_n + λ_n*)`.
pub fn dirac_f(n: &[f64]) -> Result<CMatrix> {
    let ext = ExteriorAlgebra::new(n.len())?;
    let norm2: f64 = n.iter().map(|x| x * x).sum();
    Ok(ext.clifford(n)? * Complex64::new((1.0 + norm2).powf(-0.5), 0.0))
}

/// Odd-even block of `(λ_n + λ_n*) / ||n||`, mapping the even subspace to
/// the odd one; the identity block at `n = 0`.
pub fn dirac_phase(n: &[f64]) -> Result<CMatrix> {
    let ext = ExteriorAlgebra::new(n.len())?;
    if ext.d() == 0 {
        return Err(Error::invalid("dirac_phase needs d >= 1"));
    }
    let (even, odd) = (ext.even_indices(), ext.odd_indices());
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(CMatrix::identity(odd.len(), even.len()));
    }
    let c = ext.clifford(n)?;
    Ok(CMatrix::from_fn(odd.len(), even.len(), |r, col| c[(odd[r], even[col])] / norm))
}

/// Restriction of the Clifford phase to a joint eigenspace of the commuting
/// involutions `J_m = i γ_{2m-1} γ_{2m}`, `γ_j = i(λ_j - λ_j*)`.
///
/// The `J_m` commute with every `c(n)`, so `c(n)/||n||` maps the even part
/// of the eigenspace unitarily onto its odd part. For `d = 2` the block is
/// the scalar `(n_1 + i σ n_2) / ||n||`, `σ` being the chosen eigenvalue.
#[derive(Clone, Debug)]
pub struct SpinorReduction {
    ext: ExteriorAlgebra,
    /// Orthonormal columns spanning the even part.
    even: CMatrix,
    /// `c(e_1)` applied to `even`.
    odd: CMatrix,
}

impl SpinorReduction {
    /// Orientation used throughout: the `-1` eigenspace of every `J_m`.
    pub const DEFAULT_SIGN: f64 = -1.0;

    pub fn new(d: usize, sign: f64) -> Result<Self> {
        if d == 0 || d % 2 != 0 {
            return Err(Error::invalid(format!("spinor reduction needs even d >= 2, got {d}")));
        }
        if sign.abs() != 1.0 {
            return Err(Error::invalid("eigenvalue sign must be +1 or -1"));
        }
        let ext = ExteriorAlgebra::new(d)?;
        let dim = ext.dim();
        let id = CMatrix::identity(dim, dim);
        let i = Complex64::new(0.0, 1.0);
        let gamma = |j: usize| -> Result<CMatrix> {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            let l = ext.creation_real(&e)?;
            Ok((&l - l.adjoint()) * i)
        };
        let mut proj = id.clone();
        for m in 0..d / 2 {
            let j = (gamma(2 * m)? * gamma(2 * m + 1)?) * i;
            proj = proj * (&id + j * Complex64::new(sign, 0.0)) * Complex64::new(0.5, 0.0);
        }
        let k = 1usize << (d / 2 - 1);
        let mut cols: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(k);
        for e in ext.even_indices() {
            let mut v = proj.column(e).into_owned();
            for c in &cols {
                let overlap = c.dotc(&v);
                v -= c * overlap;
            }
            let nrm = v.norm();
            if nrm > 1e-8 {
                cols.push(v / Complex64::new(nrm, 0.0));
            }
            if cols.len() == k {
                break;
            }
        }
        if cols.len() != k {
            return Err(Error::NonConvergence("spinor basis construction lost rank".into()));
        }
        let even = CMatrix::from_columns(&cols);
        let mut e1 = vec![0.0; d];
        e1[0] = 1.0;
        let odd = ext.clifford(&e1)? * &even;
        Ok(SpinorReduction { ext, even, odd })
    }

    pub fn standard(d: usize) -> Result<Self> {
        Self::new(d, Self::DEFAULT_SIGN)
    }

    /// Size `2^{d/2 - 1}` of the reduced blocks.
    pub fn rank(&self) -> usize {
        self.even.ncols()
    }

    pub fn d(&self) -> usize {
        self.ext.d()
    }

    /// Reduced unitary `<o_a, c(n) e_b> / ||n||`; identity at `n = 0`.
    pub fn phase(&self, n: &[f64]) -> Result<CMatrix> {
        let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(CMatrix::identity(self.rank(), self.rank()));
        }
        let c = self.ext.clifford(n)?;
        Ok(self.odd.adjoint() * c * &self.even / Complex64::new(norm, 0.0))
    }
}

/// Winding number of `n -> det u(n)` around the unit circle, sampled at
/// `samples` points.
pub fn det_winding(u: impl Fn(&[f64]) -> Result<CMatrix>, samples: usize) -> Result<i64> {
    let mut total = 0.0;
    let det_at = |k: usize| -> Result<Complex64> {
        let t = std::f64::consts::TAU * k as f64 / samples as f64;
        Ok(u(&[t.cos(), t.sin()])?.determinant())
    };
    let mut prev = det_at(0)?;
    for k in 1..=samples {
        let cur = det_at(k % samples)?;
        total += (cur / prev).arg();
        prev = cur;
    }
    Ok((total / std::f64::consts::TAU).round() as i64)
}

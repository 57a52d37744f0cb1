use num_complex::Complex64;

use super::BlockOperator;
use crate::error::{Error, Result};

/// Product Fejér weight `prod_j (1 - |k_j| / R)_+` at label offset `k`.
pub fn fejer_weight(offset: &[i64], r: f64) -> f64 {
    offset.iter().map(|&k| (1.0 - k.abs() as f64 / r).max(0.0)).product()
}

/// Multiplies block `(x, y)` by the Fejér weight of `y - x`.
///
/// Blocks with zero weight are dropped, so the result is exactly
/// `(ceil(R) - 1)`-banded along every axis.
pub fn fejer_smooth(t: &BlockOperator, r: f64) -> Result<BlockOperator> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("Fejér cutoff must be positive, got {r}")));
    }
    let g = t.geometry().clone();
    let mut out = t.map_blocks(|x, y, b| {
        let wgt = fejer_weight(&g.label_offset(x, y), r);
        if wgt == 0.0 {
            b.map(|_| Complex64::new(0.0, 0.0))
        } else {
            b * Complex64::new(wgt, 0.0)
        }
    });
    out.hermitian = t.is_hermitian_flagged();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::Block;
    use super::*;

    #[test]
    fn diagonal_is_untouched() {
        let g = lattice(2, 2);
        let id = BlockOperator::identity(g, 2);
        assert_eq!(fejer_smooth(&id, 0.7).unwrap(), id);
    }

    #[test]
    fn nearest_neighbour_hopping_is_halved() {
        let g = lattice(1, 3);
        let mut hop = BlockOperator::zero(g.clone(), 1);
        let one = Block::from_element(1, 1, Complex64::new(1.0, 0.0));
        for x in 0..g.len() - 1 {
            hop.set_block(x, x + 1, one.clone()).unwrap();
            hop.set_block(x + 1, x, one.clone()).unwrap();
        }
        let sm = fejer_smooth(&hop, 2.0).unwrap();
        for (_, b) in sm.blocks() {
            assert_eq!(b[(0, 0)], Complex64::new(0.5, 0.0));
        }
        assert_eq!(sm.nnz_blocks(), hop.nnz_blocks());
    }

    #[test]
    fn exact_band_cut() {
        let g = lattice(2, 3);
        let t = random_banded(g.clone(), 1, 3, 4);
        for r in 1..=5 {
            let sm = fejer_smooth(&t, r as f64).unwrap();
            for (&(x, y), _) in sm.blocks() {
                assert!(g.label_offset(x, y).iter().all(|k| k.abs() < r));
            }
        }
        assert!(fejer_smooth(&t, 0.0).is_err());
    }

    #[test]
    fn deviation_shrinks_with_cutoff() {
        let g = lattice(1, 4);
        let t = random_banded(g, 1, 3, 8);
        let devs: Vec<f64> = (1..=12)
            .map(|r| fejer_smooth(&t, r as f64).unwrap().sub(&t).unwrap().norm())
            .collect();
        for w in devs.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{devs:?}");
        }
    }
}

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{spectral_norm, BlockOperator};
use crate::error::{Error, Result};
use crate::lattice::Site;

#[derive(Clone, Debug)]
pub struct Localization {
    /// Unit vector supported in `support`.
    pub xi: DVector<Complex64>,
    /// `||T xi|| / ||T||`.
    pub ratio: f64,
    /// Sites of the maximizing sub-box.
    pub support: Vec<Site>,
}

/// Side-length tuples (in sites) of boxes with diameter at most `s` that
/// cannot be enlarged along any axis.
fn maximal_shapes(extents: &[usize], s: f64) -> Vec<Vec<usize>> {
    let d = extents.len();
    let mut all = Vec::new();
    let mut shape = vec![1usize; d];
    loop {
        let diam2: f64 = shape.iter().map(|&a| ((a - 1) * (a - 1)) as f64).sum();
        if diam2 <= s * s + 1e-9 {
            all.push(shape.clone());
        }
        let mut axis = 0;
        loop {
            if axis == d {
                return all
                    .iter()
                    .filter(|a| {
                        !all.iter().any(|b| *b != **a && b.iter().zip(a.iter()).all(|(x, y)| x >= y))
                    })
                    .cloned()
                    .collect();
            }
            shape[axis] += 1;
            if shape[axis] <= extents[axis] {
                break;
            }
            shape[axis] = 1;
            axis += 1;
        }
    }
}

/// Best unit vector supported in a window sub-box of diameter at most `s`.
///
/// Sweeps every position of every maximal box shape and takes the top
/// singular value of `T` restricted to the box.
pub fn localize_norm(t: &BlockOperator, s: f64) -> Result<Localization> {
    if !(s >= 1.0) {
        return Err(Error::invalid(format!("support diameter must be at least 1, got {s}")));
    }
    let full = t.to_dense();
    let total = spectral_norm(&full);
    if total == 0.0 {
        return Err(Error::invalid("zero operator has no norming vector"));
    }
    let g = t.geometry();
    let w = g.window();
    let n = t.internal_dim();
    let extents: Vec<usize> = (0..w.dim()).map(|a| w.extent(a)).collect();
    let mut best: Option<(f64, DVector<Complex64>, Vec<usize>)> = None;
    for shape in maximal_shapes(&extents, s) {
        let mut corner = vec![0usize; w.dim()];
        'positions: loop {
            let sites: Vec<usize> = (0..w.len())
                .filter(|&i| {
                    let site = w.site_at(i);
                    site.0.iter().enumerate().all(|(a, &c)| {
                        let off = (c + w.half_widths()[a]) as usize;
                        off >= corner[a] && off < corner[a] + shape[a]
                    })
                })
                .collect();
            let cols: Vec<usize> = sites.iter().flat_map(|&x| (0..n).map(move |k| x * n + k)).collect();
            let sub = DMatrix::from_fn(full.nrows(), cols.len(), |r, c| full[(r, cols[c])]);
            let svd = sub.svd(false, true);
            let (imax, smax) = svd
                .singular_values
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            if best.as_ref().map_or(true, |b| smax > b.0) {
                let vt = svd.v_t.expect("right singular vectors requested");
                let mut xi = DVector::zeros(full.ncols());
                for (c, &col) in cols.iter().enumerate() {
                    xi[col] = vt[(imax, c)].conj();
                }
                best = Some((smax, xi, sites));
            }
            let mut axis = 0;
            loop {
                if axis == w.dim() {
                    break 'positions;
                }
                corner[axis] += 1;
                if corner[axis] + shape[axis] <= extents[axis] {
                    break;
                }
                corner[axis] = 0;
                axis += 1;
            }
        }
    }
    let (smax, xi, sites) = best.expect("at least one sub-box");
    Ok(Localization {
        xi,
        ratio: (smax / total).min(1.0),
        support: sites.into_iter().map(|i| w.site_at(i)).collect(),
    })
}

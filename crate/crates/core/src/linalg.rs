//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::Real;

/// Singular values in decreasing order.
pub(crate) fn singular_values<T: Real>(m: &DMatrix<T>) -> Vec<T> {
    let mut sv: Vec<T> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Numerical rank with a threshold relative to the largest singular value.
pub(crate) fn numerical_rank<T: Real>(m: &DMatrix<T>, rel_tol: T) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&top) if top > T::zero() => sv.iter().filter(|&&s| s > rel_tol * top).count(),
        _ => 0,
    }
}

/// Orthonormal basis (as columns) of the right null space, using the same
/// relative threshold as [`numerical_rank`].
pub(crate) fn null_space<T: Real>(m: &DMatrix<T>, rel_tol: T) -> DMatrix<T> {
    let (rows, cols) = m.shape();
    // pad to square so the SVD returns a full set of right singular vectors
    let mut a = DMatrix::zeros(rows.max(cols), cols);
    a.view_mut((0, 0), (rows, cols)).copy_from(m);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let top = svd.singular_values.iter().fold(T::zero(), |acc, &s| acc.max(s));
    let picked: Vec<DVector<T>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| top == T::zero() || s <= rel_tol * top)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if picked.is_empty() {
        DMatrix::zeros(cols, 0)
    } else {
        DMatrix::from_columns(&picked)
    }
}

pub(crate) fn block_diag<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_kernel() {
        let m = DMatrix::<f64>::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(numerical_rank(&m, 1e-9), 2);
        let k = null_space(&m, 1e-9);
        assert_eq!(k.ncols(), 1);
        assert!((k[(2, 0)].abs() - 1.0).abs() < 1e-15);
        assert_eq!(numerical_rank(&DMatrix::<f64>::zeros(3, 2), 1e-9), 0);
    }
}

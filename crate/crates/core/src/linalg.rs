//! Small dense helpers on top of nalgebra: rank-revealing SVD, projections,
//! minimum-norm least squares and symmetric eigenvalue queries.

use nalgebra::{DMatrix, DVector};

/// Singular values at or below `RANK_RTOL * sigma_max` count as zero.
pub const RANK_RTOL: f64 = 1e-9;

/// Numerical rank of `m` with the relative singular-value cutoff [`RANK_RTOL`].
pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.max();
    if smax <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_RTOL * smax).count()
}

/// Orthonormal basis of the column space of `m`, one column per retained singular value.
pub fn column_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let rows = m.nrows();
    if m.is_empty() {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax > 0.0 && s > RANK_RTOL * smax)
        .map(|(i, _)| i)
        .collect();
    let mut basis = DMatrix::zeros(rows, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_column(dst, &u.column(src));
    }
    basis
}

/// Minimum-norm least-squares solution of `m x = b` using the same rank cutoff.
pub fn min_norm_solve(m: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let cols = m.ncols();
    if m.is_empty() {
        return DVector::zeros(cols);
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = if smax > 0.0 { RANK_RTOL * smax } else { 0.0 };
    // pseudo-inverse solve cannot fail when eps is nonnegative
    svd.solve(b, eps.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DVector::zeros(cols))
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// Block-diagonal stacking of possibly rectangular blocks.
pub fn block_diag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Horizontal concatenation `[a b]`.
pub fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

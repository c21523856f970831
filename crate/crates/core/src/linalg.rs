//! Dense linear-algebra helpers shared by the analysis modules.
//!
//! Rank decisions use a single relative cutoff: a singular value counts as
//! zero when it is at most `rel_tol * sigma_max`.

use nalgebra::{DMatrix, DVector};

/// Singular values sorted in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Absolute cutoff below which singular values are treated as zero.
pub fn rank_cutoff(sv: &[f64], rel_tol: f64) -> f64 {
    sv.first().copied().unwrap_or(0.0) * rel_tol
}

pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let cut = rank_cutoff(&sv, rel_tol);
    sv.iter().filter(|&&s| s > cut).count()
}

/// Orthonormal basis (as columns) of the numerical null space of `m`.
///
/// Wide matrices are padded with zero rows so the SVD returns a full right
/// singular basis.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = sigma_max * rel_tol;
    let null_rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cut)
        .collect();
    let mut basis = DMatrix::zeros(cols, null_rows.len());
    for (c, &k) in null_rows.iter().enumerate() {
        basis.set_column(c, &v_t.row(k).transpose());
    }
    basis
}

/// Eigenvalues of a symmetric matrix in increasing order.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `a ⊗ I_d`.
pub fn kron_identity(a: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() * d, a.ncols() * d);
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            let v = a[(r, c)];
            if v != 0.0 {
                for k in 0..d {
                    out[(r * d + k, c * d + k)] = v;
                }
            }
        }
    }
    out
}

/// Orthonormalize `vectors` by modified Gram-Schmidt against `against` (assumed
/// orthonormal) and each other. Vectors whose remainder falls below
/// `drop_tol` times their original norm are dropped.
pub fn orthonormalize(
    against: &[DVector<f64>],
    vectors: impl IntoIterator<Item = DVector<f64>>,
    drop_tol: f64,
) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = against.to_vec();
    let fixed = basis.len();
    for mut v in vectors {
        let norm0 = v.norm();
        if norm0 == 0.0 {
            continue;
        }
        // two passes keep the result orthogonal to working precision
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > drop_tol * norm0 {
            basis.push(v / norm);
        }
    }
    basis.split_off(fixed)
}

pub fn columns_to_matrix(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols.len());
    for (c, v) in cols.iter().enumerate() {
        m.set_column(c, v);
    }
    m
}

/// Spectral norm.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

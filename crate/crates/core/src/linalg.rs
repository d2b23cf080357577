//! Small dense helpers shared by the model, estimator and analysis code.
//!
//! `vec` stacks columns (nalgebra's native column-major layout), so
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)` holds with nalgebra's `kronecker`.

use nalgebra::{DMatrix, DVector};

use crate::{CMat, CVec, RMat, RVec, C64};

/// Relative singular-value cutoff used for every rank decision.
pub const RANK_TOL: f64 = 1e-10;

pub fn vec_of(m: &CMat) -> CVec {
    DVector::from_column_slice(m.as_slice())
}

pub fn mat_of(v: &CVec, rows: usize, cols: usize) -> CMat {
    assert_eq!(v.len(), rows * cols, "mat_of: length mismatch");
    DMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Column-wise Kronecker product: column k is `a_k ⊗ b_k`.
pub fn khatri_rao(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.ncols(), "khatri_rao: column count mismatch");
    let (ra, rb) = (a.nrows(), b.nrows());
    CMat::from_fn(ra * rb, a.ncols(), |row, k| a[(row / rb, k)] * b[(row % rb, k)])
}

/// Ascending eigen-decomposition of a Hermitian matrix.
///
/// The input is symmetrized as `(H + Hᴴ)/2` first so tiny round-off
/// asymmetries cannot leak into the eigenvectors.
pub fn hermitian_eigen(h: &CMat) -> (RVec, CMat) {
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = RVec::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `V f(Λ) Vᴴ` for Hermitian `h = V Λ Vᴴ`.
pub fn hermitian_map(h: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (values, vectors) = hermitian_eigen(h);
    let scaled = CMat::from_fn(vectors.nrows(), vectors.ncols(), |i, j| {
        vectors[(i, j)] * f(values[j])
    });
    &scaled * vectors.adjoint()
}

/// Moore-Penrose pseudo-inverse; singular values below `RANK_TOL · σ_max`
/// are treated as zero.
pub fn pinv(a: &CMat) -> CMat {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.pseudo_inverse(RANK_TOL * smax.max(f64::MIN_POSITIVE))
        .expect("SVD computed with both factors")
}

/// Numerical rank with the shared relative cutoff.
pub fn rank(a: &CMat) -> usize {
    let s = a.singular_values();
    let smax = s.max();
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > RANK_TOL * smax).count()
}

/// Projector onto the orthogonal complement of the column space of `a`.
pub fn orth_projector(a: &CMat) -> CMat {
    CMat::identity(a.nrows(), a.nrows()) - a * pinv(a)
}

/// `max |h_ij − conj(h_ji)|`.
pub fn hermitian_defect(h: &CMat) -> f64 {
    (h - h.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// `max |z_m − conj(z_{n−1−m})|` (conjugate symmetry under index reversal).
pub fn conj_symmetry_defect(z: &CVec) -> f64 {
    let n = z.len();
    (0..n)
        .map(|m| (z[m] - z[n - 1 - m].conj()).norm())
        .fold(0.0, f64::max)
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|c| c.re)
}

pub fn imag_part(m: &CMat) -> RMat {
    m.map(|c| c.im)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn frobenius_rel_err(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

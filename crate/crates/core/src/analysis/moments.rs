//! Second-order statistics of the sample-covariance perturbation
//! `Δr = vec(R̂ − R)` split into real and imaginary parts, and the MSE
//! expression built directly on them.

use super::ErrorTerms;
use crate::linalg::{imag_part, real_part};
use crate::model::SourceScenario;
use crate::{CMat, RMat, RVec};

/// `C_AB[m·N + i, n·N + j] = A[i, n] · B[j, m]` for `N × N` inputs.
/// `C_II` is the commutation matrix.
pub fn structured_matrix(a: &RMat, b: &RMat) -> RMat {
    let n = a.nrows();
    assert!(a.is_square() && b.shape() == a.shape(), "structured_matrix: square inputs of equal size");
    RMat::from_fn(n * n, n * n, |row, col| {
        let (m, i) = (row / n, row % n);
        let (nn, j) = (col / n, col % n);
        a[(i, nn)] * b[(j, m)]
    })
}

/// `E[Re Δr Re Δrᵀ]`, `E[Im Δr Im Δrᵀ]` and `E[Re Δr Im Δrᵀ]` for `N` snapshots.
#[derive(Debug, Clone)]
pub struct DeltaRMoments {
    pub re_re: RMat,
    pub im_im: RMat,
    pub re_im: RMat,
}

pub fn delta_r_moments(r: &CMat, n: usize) -> DeltaRMoments {
    let re = real_part(r);
    let im = imag_part(r);
    let scale = 1.0 / (2.0 * n as f64);
    let sum_kron = re.kronecker(&re) + im.kronecker(&im);
    let c_rr = structured_matrix(&re, &re);
    let c_ii = structured_matrix(&im, &im);
    let re_re = (&sum_kron + &c_rr - &c_ii) * scale;
    let im_im = (&sum_kron + &c_ii - &c_rr) * scale;
    let re_im = (im.kronecker(&re) - re.kronecker(&im)
        + structured_matrix(&re, &im)
        + structured_matrix(&im, &re))
        * scale;
    DeltaRMoments { re_re, im_im, re_im }
}

/// MSE matrix from the real/imaginary decomposition
/// `E[Re(ξ₁ᵀΔr) Re(ξ₂ᵀΔr)] / (γ₁p₁γ₂p₂)`.
pub fn mse_from_moments(terms: &ErrorTerms, moments: &DeltaRMoments, scenario: &SourceScenario) -> RMat {
    let k = terms.sources.len();
    let parts: Vec<(RVec, RVec)> = terms
        .sources
        .iter()
        .map(|s| (s.xi.map(|c| c.re), s.xi.map(|c| c.im)))
        .collect();
    let p = scenario.powers();
    let quad = |x: &RVec, m: &RMat, y: &RVec| x.dot(&(m * y));
    RMat::from_fn(k, k, |a, b| {
        let (re1, im1) = &parts[a];
        let (re2, im2) = &parts[b];
        let num = quad(re1, &moments.re_re, re2) + quad(im1, &moments.im_im, im2)
            - quad(re1, &moments.re_im, im2)
            - quad(re2, &moments.re_im, im1);
        num / (terms.sources[a].gamma * p[a] * terms.sources[b].gamma * p[b])
    })
}

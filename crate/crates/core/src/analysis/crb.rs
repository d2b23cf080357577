//! Stochastic-model Fisher information and the DOA Cramér-Rao bound.

use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;
use crate::linalg::{hermitian_eigen, hermitian_map, mat_of, pinv, rank, vec_of, RANK_TOL};
use crate::model::{coarray_model_matrix, steering_matrix, true_covariance, SourceScenario};
use crate::{CMat, RMat, C64};

#[derive(Debug, Clone)]
pub struct CrbReport {
    /// Full `(2K+1) × (2K+1)` FIM over `(θ, p, σ²)`.
    pub fim: RMat,
    /// DOA block of the bound, `K × K`, rad².
    pub crb: RMat,
    /// Numerical rank of the model Jacobian.
    pub rank: usize,
    /// 2-norm condition number of the FIM.
    pub condition: f64,
}

/// `J = [Ȧ_d P | A_d | vec(I)]`, with `Ȧ_d = Ȧ* ⊙ A + A* ⊙ Ȧ`.
pub fn model_jacobian(geom: &ArrayGeometry, scenario: &SourceScenario) -> CMat {
    let (a, da) = steering_matrix(geom, scenario);
    let k = scenario.num_sources();
    let m = geom.num_sensors();
    let conj = |x: &CMat| x.map(|c| c.conj());
    let dad = crate::linalg::khatri_rao(&conj(&da), &a) + crate::linalg::khatri_rao(&conj(&a), &da);
    let ad = coarray_model_matrix(&a);
    let mut j = CMat::zeros(m * m, 2 * k + 1);
    for (c, p) in scenario.powers().iter().enumerate() {
        j.set_column(c, &(dad.column(c) * C64::new(*p, 0.0)));
        j.set_column(k + c, &ad.column(c));
    }
    j.set_column(2 * k, &vec_of(&CMat::identity(m, m)));
    j
}

fn checked_covariance(geom: &ArrayGeometry, scenario: &SourceScenario) -> Result<CMat> {
    let r = true_covariance(geom, scenario).matrix;
    let (values, _) = hermitian_eigen(&r);
    let (lo, hi) = (values[0], values[values.len() - 1]);
    if lo <= RANK_TOL * hi.max(f64::MIN_POSITIVE) {
        return Err(Error::SingularCovariance { min_eig: lo });
    }
    Ok(r)
}

/// Gram matrix `Re(Xᴴ Y)` of `vec`-columns mapped through `X ↦ L X L`.
fn sandwiched_gram(cols: &CMat, left: &CMat, right: &CMat, m: usize) -> RMat {
    let mapped: Vec<CMat> = (0..cols.ncols())
        .map(|c| left * mat_of(&cols.column(c).into_owned(), m, m) * right)
        .collect();
    let raw: Vec<CMat> = (0..cols.ncols())
        .map(|c| mat_of(&cols.column(c).into_owned(), m, m))
        .collect();
    let n = cols.ncols();
    let mut g = RMat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            g[(a, b)] = raw[a]
                .iter()
                .zip(mapped[b].iter())
                .map(|(x, y)| (x.conj() * y).re)
                .sum();
        }
    }
    (&g + g.transpose()) * 0.5
}

/// `N Jᴴ (Rᵀ ⊗ R)⁻¹ J`, applying the inverse as `vec(X) ↦ vec(R⁻¹ X R⁻¹)`.
pub fn fim(geom: &ArrayGeometry, scenario: &SourceScenario, n: usize) -> Result<RMat> {
    let r = checked_covariance(geom, scenario)?;
    let r_inv = hermitian_map(&r, |v| 1.0 / v);
    let j = model_jacobian(geom, scenario);
    Ok(sandwiched_gram(&j, &r_inv, &r_inv, geom.num_sensors()) * n as f64)
}

/// FIM from `N tr(∂R/∂η_a R⁻¹ ∂R/∂η_b R⁻¹)` with explicit derivative matrices
/// and an LU inverse. Independent of the vectorized route.
pub fn fim_trace_form(geom: &ArrayGeometry, scenario: &SourceScenario, n: usize) -> Result<RMat> {
    let r = checked_covariance(geom, scenario)?;
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or(Error::SingularCovariance { min_eig: 0.0 })?;
    let (a, da) = steering_matrix(geom, scenario);
    let m = geom.num_sensors();
    let k = scenario.num_sources();
    let mut derivs: Vec<CMat> = Vec::with_capacity(2 * k + 1);
    for (c, p) in scenario.powers().iter().enumerate() {
        let (ac, dc) = (a.column(c), da.column(c));
        derivs.push((dc * ac.adjoint() + ac * dc.adjoint()) * C64::new(*p, 0.0));
    }
    for c in 0..k {
        derivs.push(a.column(c) * a.column(c).adjoint());
    }
    derivs.push(CMat::identity(m, m));
    let half: Vec<CMat> = derivs.iter().map(|d| d * &r_inv).collect();
    let size = derivs.len();
    let mut out = RMat::zeros(size, size);
    for x in 0..size {
        for y in 0..size {
            out[(x, y)] = n as f64 * (&half[x] * &half[y]).trace().re;
        }
    }
    Ok(out)
}

/// DOA Cramér-Rao bound `(1/N) [Re(M_θᴴ Π⊥_{M_s} M_θ)]⁻¹` with
/// `M_θ = W^{-1/2} Ȧ_d P` and `M_s = W^{-1/2} [A_d  vec(I)]`.
pub fn crb(geom: &ArrayGeometry, scenario: &SourceScenario, n: usize) -> Result<CrbReport> {
    let r = checked_covariance(geom, scenario)?;
    let m = geom.num_sensors();
    let k = scenario.num_sources();
    let j = model_jacobian(geom, scenario);
    let jr = rank(&j);
    if jr < j.ncols() {
        return Err(Error::CrbUndefined {
            rank: jr,
            cols: j.ncols(),
        });
    }
    let r_isqrt = hermitian_map(&r, |v| 1.0 / v.sqrt());
    let whiten = |cols: CMat| -> CMat {
        let mut out = CMat::zeros(cols.nrows(), cols.ncols());
        for c in 0..cols.ncols() {
            let x = mat_of(&cols.column(c).into_owned(), m, m);
            out.set_column(c, &vec_of(&(&r_isqrt * x * &r_isqrt)));
        }
        out
    };
    let m_theta = whiten(j.columns(0, k).into_owned());
    let m_s = whiten(j.columns(k, k + 1).into_owned());
    let resid = &m_theta - &m_s * (pinv(&m_s) * &m_theta);
    let core = (m_theta.adjoint() * resid).map(|c| c.re);
    let core = (&core + core.transpose()) * 0.5;
    let inv = core
        .try_inverse()
        .ok_or(Error::CrbUndefined { rank: jr, cols: j.ncols() })?;
    let crb = (&inv + inv.transpose()) * (0.5 / n as f64);

    let r_inv = hermitian_map(&r, |v| 1.0 / v);
    let fim = sandwiched_gram(&j, &r_inv, &r_inv, m) * n as f64;
    let s = fim.singular_values();
    let condition = s.max() / s.min();
    Ok(CrbReport {
        fim,
        crb,
        rank: jr,
        condition,
    })
}

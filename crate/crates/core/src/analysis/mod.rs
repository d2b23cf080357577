//! Closed-form performance analytics for coarray MUSIC.
//!
//! Everything here works on the exact model covariance built from a
//! [`SourceScenario`]; empirical counterparts live in the harness.
//! Mean-square errors and bounds are in squared radians.

mod crb;
mod moments;

pub use crb::{crb, fim, fim_trace_form, model_jacobian, CrbReport};
pub use moments::{delta_r_moments, mse_from_moments, structured_matrix, DeltaRMoments};

use crate::error::{Error, Result};
use crate::geometry::Coarray;
use crate::linalg::{mat_of, orth_projector, pinv};
use crate::model::{steering_matrix, true_covariance, virtual_steering, SourceScenario};
use crate::{CMat, CVec, RMat, C64};

/// First-order error terms of source `k`.
#[derive(Debug, Clone)]
pub struct SourceTerms {
    /// `ξ_k = Fᵀ Γᵀ (β_k ⊗ α_k)`, length M².
    pub xi: CVec,
    /// `α_k = −(e_kᵀ A_v†)ᵀ`, length Mv.
    pub alpha: CVec,
    /// `β_k = Π⊥ ȧ_v(θ_k)`, length Mv.
    pub beta: CVec,
    /// `γ_k = ȧ_vᴴ Π⊥ ȧ_v`.
    pub gamma: f64,
}

#[derive(Debug, Clone)]
pub struct ErrorTerms {
    pub sources: Vec<SourceTerms>,
    pub num_sensors: usize,
}

impl ErrorTerms {
    /// `Ξ_k = mat_{M,M}(ξ_k)`.
    pub fn xi_matrix(&self, k: usize) -> CMat {
        mat_of(&self.sources[k].xi, self.num_sensors, self.num_sensors)
    }

    /// First-order DOA errors `−Re(ξ_kᵀ Δr) / (γ_k p_k)` for a covariance
    /// perturbation `Δr = vec(R̂ − R)`.
    pub fn first_order_errors(&self, scenario: &SourceScenario, delta_r: &CVec) -> Vec<f64> {
        self.sources
            .iter()
            .zip(scenario.powers())
            .map(|(s, p)| -s.xi.tr_dot(delta_r).re / (s.gamma * p))
            .collect()
    }
}

fn check_sources(coarray: &Coarray, scenario: &SourceScenario) -> Result<()> {
    let k = scenario.num_sources();
    if k >= coarray.mv() {
        return Err(Error::TooManySources {
            sources: k,
            mv: coarray.mv(),
        });
    }
    Ok(())
}

/// `Fᵀ Γᵀ vec(X)` for an `Mv × Mv` matrix `X`.
fn coarray_adjoint(coarray: &Coarray, x: &CMat) -> CVec {
    let mv = coarray.mv();
    let mut u = CVec::zeros(2 * mv - 1);
    for c in 0..mv {
        let start = mv - 1 - c;
        for row in 0..mv {
            u[start + row] += x[(row, c)];
        }
    }
    let f = &coarray.selection;
    CVec::from_fn(f.ncols(), |col, _| {
        (0..f.nrows()).fold(C64::new(0.0, 0.0), |acc, row| acc + u[row] * f[(row, col)])
    })
}

pub fn error_terms(coarray: &Coarray, scenario: &SourceScenario) -> Result<ErrorTerms> {
    check_sources(coarray, scenario)?;
    let (av, dav) = virtual_steering(&coarray.geometry, scenario.doas(), coarray.mv());
    let av_pinv = pinv(&av);
    let proj = orth_projector(&av);
    let sources = (0..scenario.num_sources())
        .map(|k| {
            let alpha: CVec = -av_pinv.row(k).transpose();
            let beta = &proj * dav.column(k);
            let gamma = dav.column(k).dotc(&beta).re;
            // β ⊗ α = vec(α βᵀ)
            let outer = &alpha * beta.transpose();
            let xi = coarray_adjoint(coarray, &outer);
            SourceTerms {
                xi,
                alpha,
                beta,
                gamma,
            }
        })
        .collect();
    Ok(ErrorTerms {
        sources,
        num_sensors: coarray.num_sensors(),
    })
}

/// `Re[ξ₁ᴴ (R ⊗ Rᵀ) ξ₂]` evaluated as `Σ conj(Ξ₁) ∘ (Rᵀ Ξ₂ Rᵀ)`.
fn kron_quadratic(r: &CMat, xi1: &CMat, xi2: &CMat) -> f64 {
    let rt = r.transpose();
    let y = &rt * xi2 * &rt;
    xi1.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Asymptotic error covariance of the DOA estimates (K × K); the diagonal is
/// the per-source MSE `ε(θ_k)`. Shared by DA-MUSIC and SS-MUSIC.
pub fn analytical_mse(coarray: &Coarray, scenario: &SourceScenario, n: usize) -> Result<RMat> {
    let terms = error_terms(coarray, scenario)?;
    Ok(mse_from_terms(coarray, scenario, &terms, n))
}

pub fn mse_from_terms(coarray: &Coarray, scenario: &SourceScenario, terms: &ErrorTerms, n: usize) -> RMat {
    let r = true_covariance(&coarray.geometry, scenario).matrix;
    let k = scenario.num_sources();
    let xis: Vec<CMat> = (0..k).map(|i| terms.xi_matrix(i)).collect();
    let p = scenario.powers();
    let mut out = RMat::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let num = kron_quadratic(&r, &xis[a], &xis[b]);
            let den = n as f64 * p[a] * p[b] * terms.sources[a].gamma * terms.sources[b].gamma;
            out[(a, b)] = num / den;
            out[(b, a)] = num / den;
        }
    }
    out
}

/// Per-source `N · lim_{SNR→∞} ε(θ_k) = ‖ξ_kᴴ (A ⊗ A*)‖² / γ_k²` (equal powers only).
pub fn limiting_mse(coarray: &Coarray, scenario: &SourceScenario) -> Result<Vec<f64>> {
    let p0 = scenario.powers()[0];
    if scenario.powers().iter().any(|p| (p - p0).abs() > 1e-12 * p0) {
        return Err(Error::UnequalPowers);
    }
    let terms = error_terms(coarray, scenario)?;
    let (a, _) = steering_matrix(&coarray.geometry, scenario);
    let a_conj = a.map(|c| c.conj());
    Ok((0..scenario.num_sources())
        .map(|k| {
            // (A ⊗ A*)ᴴ vec(Ξ) = vec(Aᵀ Ξ A*)
            let v = a.transpose() * terms.xi_matrix(k) * &a_conj;
            v.norm_squared() / terms.sources[k].gamma.powi(2)
        })
        .collect())
}

/// `κ = tr(CRB_θ) / Σ_k ε(θ_k)`.
pub fn efficiency_kappa(crb: &CrbReport, mse: &RMat) -> f64 {
    crb.crb.trace() / mse.trace()
}

/// Two-source resolvability from the asymptotic MSE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionVerdict {
    pub resolvable: bool,
    /// `ε(θ₁) + ε(θ₂)` in deg².
    pub mse_sum_deg2: f64,
    pub separation_deg: f64,
}

/// Declares two sources resolvable when `ε(θ₁) + ε(θ₂) < Δθ`, with the MSE
/// sum in squared degrees and the separation in degrees.
pub fn resolution_predict(mse: &RMat, separation_rad: f64) -> Result<ResolutionVerdict> {
    if mse.nrows() != 2 {
        return Err(Error::NotTwoSources(mse.nrows()));
    }
    let deg2 = (180.0 / std::f64::consts::PI).powi(2);
    let mse_sum_deg2 = (mse[(0, 0)] + mse[(1, 1)]) * deg2;
    let separation_deg = separation_rad.to_degrees();
    Ok(ResolutionVerdict {
        resolvable: mse_sum_deg2 < separation_deg,
        mse_sum_deg2,
        separation_deg,
    })
}

#[cfg(test)]
mod tests;

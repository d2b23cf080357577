//! Coarray MUSIC: build an augmented covariance on the virtual ULA (direct
//! augmentation or spatial smoothing), take its noise subspace and search
//! the MUSIC pseudo-spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Coarray};
use crate::linalg::hermitian_eigen;
use crate::model::{sample_covariance, virtual_observation};
use crate::{CMat, CVec, RMat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Augmentation {
    /// DA-MUSIC: `Rv1 = [z_Mv … z_1]`.
    Direct,
    /// SS-MUSIC: `Rv2 = (1/Mv) Σ z_i z_iᴴ`.
    SpatialSmoothing,
}

impl Augmentation {
    pub fn tag(self) -> &'static str {
        match self {
            Augmentation::Direct => "da",
            Augmentation::SpatialSmoothing => "ss",
        }
    }
}

impl std::str::FromStr for Augmentation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "da" | "direct" => Ok(Augmentation::Direct),
            "ss" | "spatial_smoothing" => Ok(Augmentation::SpatialSmoothing),
            other => Err(Error::Config(format!("unknown method {other:?} (expected da or ss)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AugmentedCovariance {
    pub kind: Augmentation,
    pub matrix: CMat,
}

fn check_len(z: &CVec, mv: usize) -> Result<()> {
    if mv == 0 || z.len() != 2 * mv - 1 {
        return Err(Error::Dimension {
            expected: (2 * mv).saturating_sub(1),
            actual: z.len(),
        });
    }
    Ok(())
}

/// `z_i = Γ_i z`, entries `i ..= i + Mv − 1` (1-based `i`).
pub fn subarray_select(z: &CVec, i: usize, mv: usize) -> Result<CVec> {
    check_len(z, mv)?;
    if i == 0 || i > mv {
        return Err(Error::IndexOutOfRange { index: i, max: mv });
    }
    Ok(z.rows(i - 1, mv).into_owned())
}

/// `Γ = [Γ_Mvᵀ Γ_{Mv−1}ᵀ ⋯ Γ_1ᵀ]ᵀ`, so that `Γ z = vec(Rv1)`.
pub fn stacked_selection(mv: usize) -> RMat {
    let mut g = RMat::zeros(mv * mv, 2 * mv - 1);
    for block in 0..mv {
        let start = mv - 1 - block;
        for row in 0..mv {
            g[(block * mv + row, start + row)] = 1.0;
        }
    }
    g
}

pub fn augment_direct(z: &CVec, mv: usize) -> Result<AugmentedCovariance> {
    check_len(z, mv)?;
    let matrix = CMat::from_fn(mv, mv, |row, col| z[mv - 1 - col + row]);
    Ok(AugmentedCovariance {
        kind: Augmentation::Direct,
        matrix,
    })
}

pub fn augment_spatial_smoothing(z: &CVec, mv: usize) -> Result<AugmentedCovariance> {
    check_len(z, mv)?;
    let mut matrix = CMat::zeros(mv, mv);
    for i in 0..mv {
        let zi = z.rows(i, mv);
        matrix.ger(C64::new(1.0, 0.0), &zi, &zi.map(|c| c.conj()), C64::new(1.0, 0.0));
    }
    matrix /= C64::new(mv as f64, 0.0);
    Ok(AugmentedCovariance {
        kind: Augmentation::SpatialSmoothing,
        matrix,
    })
}

pub fn augment(z: &CVec, mv: usize, kind: Augmentation) -> Result<AugmentedCovariance> {
    match kind {
        Augmentation::Direct => augment_direct(z, mv),
        Augmentation::SpatialSmoothing => augment_spatial_smoothing(z, mv),
    }
}

/// Orthonormal eigenvectors of the `Mv − K` algebraically smallest eigenvalues.
pub fn noise_subspace(rv: &CMat, k: usize) -> Result<CMat> {
    let mv = rv.nrows();
    if k >= mv {
        return Err(Error::TooManySources { sources: k, mv });
    }
    let (_, vectors) = hermitian_eigen(rv);
    Ok(vectors.columns(0, mv - k).into_owned())
}

/// MUSIC pseudo-spectrum `1 / (a_vᴴ(θ) E_n E_nᴴ a_v(θ))` on the virtual ULA.
///
/// The quadratic form only depends on the projector `P = E_n E_nᴴ` through its
/// diagonal sums `c_l = Σ_i P[i, i+l]`, so each evaluation is a degree-(Mv−1)
/// trigonometric polynomial.
#[derive(Debug, Clone)]
pub struct MusicSpectrum {
    /// `c_l` for `l = 0..Mv` (negative lags are conjugates).
    diag_sums: Vec<C64>,
    phase_scale: f64,
}

impl MusicSpectrum {
    pub fn new(noise: &CMat, geom: &ArrayGeometry) -> Self {
        let projector = noise * noise.adjoint();
        let mv = projector.nrows();
        let diag_sums = (0..mv)
            .map(|l| (0..mv - l).map(|i| projector[(i, i + l)]).sum())
            .collect();
        Self {
            diag_sums,
            phase_scale: std::f64::consts::TAU * geom.d0() / geom.wavelength(),
        }
    }

    /// `a_vᴴ P a_v` at θ.
    pub fn null_power(&self, theta: f64) -> f64 {
        let w = C64::from_polar(1.0, self.phase_scale * theta.sin());
        let mut acc = C64::new(0.0, 0.0);
        for c in self.diag_sums[1..].iter().rev() {
            acc = (acc + c) * w;
        }
        self.diag_sums[0].re + 2.0 * acc.re
    }

    pub fn value(&self, theta: f64) -> f64 {
        1.0 / self.null_power(theta).max(f64::MIN_POSITIVE)
    }
}

pub fn music_spectrum(noise: &CMat, geom: &ArrayGeometry, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let spec = MusicSpectrum::new(noise, geom);
    Ok(grid.iter().map(|&t| spec.value(t)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    /// Search grid step in degrees.
    pub grid_step_deg: f64,
    /// Parabolic re-fits after the grid-level parabola; 0 disables refinement.
    pub refine_iters: usize,
    /// Final golden-section bracket width in radians.
    pub tolerance: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            grid_step_deg: 0.1,
            refine_iters: 4,
            tolerance: 1e-10,
        }
    }
}

impl EstimatorOptions {
    /// Grid on (−90°, 90°) with the configured step, endpoints excluded.
    pub fn grid(&self) -> Vec<f64> {
        let n = (180.0 / self.grid_step_deg).round() as usize;
        (1..n)
            .map(|i| (-90.0 + i as f64 * self.grid_step_deg).to_radians())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoaEstimate {
    /// Ascending DOAs in radians.
    pub doas: Vec<f64>,
    /// Whether each estimate converged strictly inside its grid cell.
    pub refined: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DoaOutcome {
    Resolved(DoaEstimate),
    /// Fewer local maxima than sources.
    Unresolved { peaks_found: usize },
}

impl DoaOutcome {
    pub fn resolved(&self) -> Option<&DoaEstimate> {
        match self {
            DoaOutcome::Resolved(e) => Some(e),
            DoaOutcome::Unresolved { .. } => None,
        }
    }
}

/// Peak search over the pseudo-spectrum of `rv` followed by local refinement.
pub fn estimate_doas(
    rv: &CMat,
    k: usize,
    geom: &ArrayGeometry,
    opts: &EstimatorOptions,
) -> Result<DoaOutcome> {
    let noise = noise_subspace(rv, k)?;
    let spec = MusicSpectrum::new(&noise, geom);
    let grid = opts.grid();
    if grid.len() < 3 {
        return Err(Error::EmptyGrid);
    }
    let values: Vec<f64> = grid.iter().map(|&t| spec.value(t)).collect();
    let mut peaks: Vec<usize> = (1..grid.len() - 1)
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect();
    if peaks.len() < k {
        return Ok(DoaOutcome::Unresolved {
            peaks_found: peaks.len(),
        });
    }
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(grid[a].total_cmp(&grid[b])));
    peaks.truncate(k);

    let mut found: Vec<(f64, bool)> = peaks
        .iter()
        .map(|&i| {
            if opts.refine_iters == 0 {
                (grid[i], false)
            } else {
                refine_peak(&spec, grid[i - 1], grid[i], grid[i + 1], opts)
            }
        })
        .collect();
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(DoaOutcome::Resolved(DoaEstimate {
        doas: found.iter().map(|f| f.0).collect(),
        refined: found.iter().map(|f| f.1).collect(),
    }))
}

/// Vertex of the parabola through `(x−h, f−), (x, f0), (x+h, f+)`, clamped to `x ± h`.
fn parabola_vertex(x: f64, h: f64, fm: f64, f0: f64, fp: f64) -> f64 {
    let curv = fm - 2.0 * f0 + fp;
    if curv <= 0.0 {
        return x;
    }
    x + (0.5 * h * (fm - fp) / curv).clamp(-h, h)
}

/// Minimizes the null power inside `[lo, hi]` around the grid peak `mid`.
fn refine_peak(spec: &MusicSpectrum, lo: f64, mid: f64, hi: f64, opts: &EstimatorOptions) -> (f64, bool) {
    let f = |t: f64| spec.null_power(t);
    let mut h = mid - lo;
    let mut x = parabola_vertex(mid, h, f(lo), f(mid), f(hi));
    for _ in 1..opts.refine_iters {
        h *= 0.25;
        let (a, b) = ((x - h).max(lo), (x + h).min(hi));
        if b - a < opts.tolerance {
            break;
        }
        x = parabola_vertex(x, h, f(x - h), f(x), f(x + h)).clamp(lo, hi);
    }
    let (mut a, mut b) = ((x - h).max(lo), (x + h).min(hi));
    // golden-section polish
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > opts.tolerance {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let best = 0.5 * (a + b);
    let interior = best > lo + opts.tolerance && best < hi - opts.tolerance;
    (best, interior)
}

/// Full pipeline from snapshots: `R̂ → z → Rv → MUSIC`.
pub fn estimate_from_snapshots(
    coarray: &Coarray,
    y: &CMat,
    k: usize,
    kind: Augmentation,
    opts: &EstimatorOptions,
) -> Result<DoaOutcome> {
    let cov = sample_covariance(y);
    let z = virtual_observation(&coarray.selection, &cov.vec)?;
    let rv = augment(&z, coarray.mv(), kind)?;
    estimate_doas(&rv.matrix, k, &coarray.geometry, opts)
}

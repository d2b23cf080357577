//! Narrowband far-field signal model for a linear array and its coarray.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;
use crate::linalg::{khatri_rao, vec_of};
use crate::rng::SnapshotStream;
use crate::{CMat, CVec, RMat, C64};

/// Uncorrelated sources in white noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceScenario {
    doas: Vec<f64>,
    powers: Vec<f64>,
    noise_power: f64,
}

impl SourceScenario {
    pub fn new(doas: Vec<f64>, powers: Vec<f64>, noise_power: f64) -> Result<Self> {
        if doas.is_empty() {
            return Err(Error::Scenario("need at least one source".into()));
        }
        if doas.len() != powers.len() {
            return Err(Error::Scenario(format!(
                "{} DOAs but {} powers",
                doas.len(),
                powers.len()
            )));
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        if let Some(t) = doas.iter().find(|t| t.is_nan() || t.abs() >= half_pi) {
            return Err(Error::Scenario(format!("DOA {t} rad outside (-pi/2, pi/2)")));
        }
        if let Some(p) = powers.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::Scenario(format!("source power {p} must be positive")));
        }
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return Err(Error::Scenario(format!("noise power {noise_power} must be positive")));
        }
        let mut sorted = doas.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Scenario("DOAs must be distinct".into()));
        }
        Ok(Self {
            doas,
            powers,
            noise_power,
        })
    }

    /// Unit-power sources with noise power `10^(−snr/10)`.
    pub fn equal_power(doas: Vec<f64>, snr_db: f64) -> Result<Self> {
        let k = doas.len();
        Self::new(doas, vec![1.0; k], 10f64.powf(-snr_db / 10.0))
    }

    pub fn doas(&self) -> &[f64] {
        &self.doas
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn num_sources(&self) -> usize {
        self.doas.len()
    }

    /// `10 log10(min_k p_k / σ²)`.
    pub fn snr_db(&self) -> f64 {
        let pmin = self.powers.iter().copied().fold(f64::INFINITY, f64::min);
        10.0 * (pmin / self.noise_power).log10()
    }

    /// Same DOAs with `(p, σ²)` replaced by `(c·p, c·σ²)`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.doas.clone(),
            self.powers.iter().map(|p| p * c).collect(),
            self.noise_power * c,
        )
    }

    /// Same powers and noise, shifted DOAs.
    pub fn with_doas(&self, doas: Vec<f64>) -> Result<Self> {
        Self::new(doas, self.powers.clone(), self.noise_power)
    }

    pub fn power_matrix(&self) -> RMat {
        RMat::from_diagonal(&crate::RVec::from_column_slice(&self.powers))
    }
}

/// `a(θ)_i = exp(j d̄_i φ)`, `φ = 2π d0 sin θ / λ`.
pub fn steering_vector(geom: &ArrayGeometry, theta: f64) -> CVec {
    let phi = geom.phase(theta);
    CVec::from_iterator(
        geom.num_sensors(),
        geom.positions().iter().map(|&d| C64::from_polar(1.0, d as f64 * phi)),
    )
}

/// Steering matrix `A` and its per-column DOA derivative `Ȧ`.
pub fn steering_matrix(geom: &ArrayGeometry, scenario: &SourceScenario) -> (CMat, CMat) {
    steering_at_positions(geom.positions(), geom, scenario.doas())
}

/// Steering matrix and derivative of the virtual ULA `0..mv` on the same grid.
pub fn virtual_steering(geom: &ArrayGeometry, doas: &[f64], mv: usize) -> (CMat, CMat) {
    let positions: Vec<i64> = (0..mv as i64).collect();
    steering_at_positions(&positions, geom, doas)
}

fn steering_at_positions(positions: &[i64], geom: &ArrayGeometry, doas: &[f64]) -> (CMat, CMat) {
    let m = positions.len();
    let mut a = CMat::zeros(m, doas.len());
    let mut da = CMat::zeros(m, doas.len());
    for (k, &theta) in doas.iter().enumerate() {
        let phi = geom.phase(theta);
        let rate = geom.phase_rate(theta);
        for (i, &d) in positions.iter().enumerate() {
            let v = C64::from_polar(1.0, d as f64 * phi);
            a[(i, k)] = v;
            da[(i, k)] = C64::new(0.0, rate * d as f64) * v;
        }
    }
    (a, da)
}

/// Steering matrix of the full virtual ULA, lags `−Mv+1 ..= Mv−1`.
pub fn coarray_steering(geom: &ArrayGeometry, doas: &[f64], mv: usize) -> CMat {
    let mv = mv as i64;
    CMat::from_fn((2 * mv - 1) as usize, doas.len(), |row, k| {
        let lag = row as i64 - (mv - 1);
        C64::from_polar(1.0, lag as f64 * geom.phase(doas[k]))
    })
}

/// A covariance matrix together with its vectorization.
#[derive(Debug, Clone)]
pub struct CovarianceSet {
    pub matrix: CMat,
    pub vec: CVec,
    /// Snapshot count for sample estimates, `None` for the exact model.
    pub snapshots: Option<usize>,
}

impl CovarianceSet {
    fn from_matrix(matrix: CMat, snapshots: Option<usize>) -> Self {
        let vec = vec_of(&matrix);
        Self {
            matrix,
            vec,
            snapshots,
        }
    }
}

/// `R = A P Aᴴ + σ² I`.
pub fn true_covariance(geom: &ArrayGeometry, scenario: &SourceScenario) -> CovarianceSet {
    let (a, _) = steering_matrix(geom, scenario);
    let mut ap = a.clone();
    for (k, p) in scenario.powers().iter().enumerate() {
        ap.column_mut(k).scale_mut(*p);
    }
    let mut r = &ap * a.adjoint();
    for i in 0..r.nrows() {
        r[(i, i)] += C64::new(scenario.noise_power(), 0.0);
    }
    CovarianceSet::from_matrix(r, None)
}

/// Coarray steering `A_d = A* ⊙ A`.
pub fn coarray_model_matrix(a: &CMat) -> CMat {
    khatri_rao(&a.map(|c| c.conj()), a)
}

/// `N` snapshots `y(t) = A x(t) + n(t)` with circular Gaussian sources and noise.
///
/// Snapshot `t` depends only on `(seed, t)`.
pub fn simulate_snapshots(
    geom: &ArrayGeometry,
    scenario: &SourceScenario,
    n: usize,
    seed: u64,
) -> CMat {
    let (a, _) = steering_matrix(geom, scenario);
    let m = geom.num_sensors();
    let k = scenario.num_sources();
    let amp: Vec<f64> = scenario.powers().iter().map(|p| p.sqrt()).collect();
    let sigma = scenario.noise_power().sqrt();
    let mut stream = SnapshotStream::new(seed, k + m);
    let mut draw = vec![C64::default(); k + m];
    let mut y = CMat::zeros(m, n);
    for t in 0..n {
        stream.snapshot(t, &mut draw);
        for i in 0..m {
            let mut acc = draw[k + i] * sigma;
            for s in 0..k {
                acc += a[(i, s)] * draw[s] * amp[s];
            }
            y[(i, t)] = acc;
        }
    }
    y
}

/// `R̂ = (1/N) Σ y(t) y(t)ᴴ`.
pub fn sample_covariance(y: &CMat) -> CovarianceSet {
    let n = y.ncols();
    assert!(n >= 1, "sample_covariance needs at least one snapshot");
    let mut r = y * y.adjoint() / C64::new(n as f64, 0.0);
    // exact Hermitian symmetry
    let m = r.nrows();
    for i in 0..m {
        r[(i, i)].im = 0.0;
        for j in (i + 1)..m {
            let v = (r[(i, j)] + r[(j, i)].conj()) * 0.5;
            r[(i, j)] = v;
            r[(j, i)] = v.conj();
        }
    }
    CovarianceSet::from_matrix(r, Some(n))
}

/// `z = F r`.
pub fn virtual_observation(f: &RMat, r: &CVec) -> Result<CVec> {
    if f.ncols() != r.len() {
        return Err(Error::Dimension {
            expected: f.ncols(),
            actual: r.len(),
        });
    }
    let mut z = CVec::zeros(f.nrows());
    for col in 0..f.ncols() {
        let rc = r[col];
        for row in 0..f.nrows() {
            let w = f[(row, col)];
            if w != 0.0 {
                z[row] += rc * w;
            }
        }
    }
    Ok(z)
}

/// Writes `t,sensor,re,im` rows (0-based indices).
pub fn write_snapshots_csv(y: &CMat, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "t,sensor,re,im")?;
    for t in 0..y.ncols() {
        for i in 0..y.nrows() {
            let v = y[(i, t)];
            writeln!(out, "{t},{i},{:.17e},{:.17e}", v.re, v.im)?;
        }
    }
    Ok(())
}

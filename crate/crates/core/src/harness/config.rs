//! Experiment configuration. Angles are degrees and SNRs are dB here; the
//! runners convert to radians and linear powers.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimator::Augmentation;
use crate::geometry::ArrayKind;
use crate::model::SourceScenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    VerifyMse,
    Resolution,
    Efficiency,
    Scaling,
}

impl ExperimentKind {
    pub fn tag(self) -> &'static str {
        match self {
            ExperimentKind::VerifyMse => "verify_mse",
            ExperimentKind::Resolution => "resolution",
            ExperimentKind::Efficiency => "efficiency",
            ExperimentKind::Scaling => "scaling",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodSelection {
    Da,
    Ss,
    Both,
}

impl MethodSelection {
    pub fn methods(self) -> Vec<Augmentation> {
        match self {
            MethodSelection::Da => vec![Augmentation::Direct],
            MethodSelection::Ss => vec![Augmentation::SpatialSmoothing],
            MethodSelection::Both => vec![Augmentation::Direct, Augmentation::SpatialSmoothing],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedArray {
    pub name: String,
    #[serde(flatten)]
    pub kind: ArrayKind,
}

/// Scaling families: co-prime pairs `(q, q+1)`, nested `(q+1, q)` and the
/// tabulated minimum-redundancy arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Coprime,
    Nested,
    Mra,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Coprime => "coprime",
            Family::Nested => "nested",
            Family::Mra => "mra",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_arrays")]
    pub arrays: Vec<NamedArray>,
    /// Source DOAs for `verify_mse`.
    #[serde(default = "default_doas")]
    pub doas_deg: Vec<f64>,
    /// Relative source powers, used when the length matches the source count.
    #[serde(default)]
    pub powers: Vec<f64>,
    /// `10 log10(min_k p_k / σ²)`.
    pub snr_db: Vec<f64>,
    pub snapshots: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_method")]
    pub method: MethodSelection,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_grid_step")]
    pub grid_step_deg: f64,
    #[serde(default = "default_d0")]
    pub d0: f64,
    #[serde(default = "one")]
    pub wavelength: f64,
    /// Run the Monte Carlo part (`efficiency`, `scaling`); analytic columns are always filled.
    #[serde(default = "yes")]
    pub empirical: bool,
    #[serde(default = "default_center")]
    pub center_deg: f64,
    #[serde(default = "default_separations")]
    pub separations_deg: Vec<f64>,
    #[serde(default = "default_source_counts")]
    pub source_counts: Vec<usize>,
    #[serde(default = "default_families")]
    pub families: Vec<Family>,
    #[serde(default = "default_q_min")]
    pub q_min: usize,
    #[serde(default = "default_q_max")]
    pub q_max: usize,
}

fn default_arrays() -> Vec<NamedArray> {
    ArrayKind::reference_arrays()
        .into_iter()
        .map(|(name, kind)| NamedArray {
            name: name.to_owned(),
            kind,
        })
        .collect()
}
fn default_doas() -> Vec<f64> {
    (0..11).map(|k| -67.5 + 12.375 * k as f64).collect()
}
fn default_method() -> MethodSelection {
    MethodSelection::Both
}
fn default_grid_step() -> f64 {
    0.1
}
fn default_d0() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_center() -> f64 {
    30.0
}
fn default_separations() -> Vec<f64> {
    (3..=30).map(|i| i as f64 / 10.0).collect()
}
fn default_source_counts() -> Vec<usize> {
    vec![1, 6, 12]
}
fn default_families() -> Vec<Family> {
    vec![Family::Coprime, Family::Nested, Family::Mra]
}
fn default_q_min() -> usize {
    2
}
fn default_q_max() -> usize {
    12
}

impl ExperimentConfig {
    /// Desk-scale defaults for each experiment.
    pub fn preset(kind: ExperimentKind) -> Self {
        let mut cfg = Self {
            experiment: kind,
            arrays: default_arrays(),
            doas_deg: default_doas(),
            powers: Vec::new(),
            snr_db: vec![0.0],
            snapshots: vec![1000],
            trials: 1000,
            seed: 0x5eed,
            method: MethodSelection::Both,
            output: None,
            grid_step_deg: default_grid_step(),
            d0: default_d0(),
            wavelength: 1.0,
            empirical: true,
            center_deg: default_center(),
            separations_deg: default_separations(),
            source_counts: default_source_counts(),
            families: default_families(),
            q_min: default_q_min(),
            q_max: default_q_max(),
        };
        match kind {
            ExperimentKind::VerifyMse => {
                cfg.snr_db = (-2..=4).map(|i| 5.0 * i as f64).collect();
                cfg.snapshots = vec![250, 1000];
                cfg.trials = 2000;
            }
            ExperimentKind::Resolution => {
                cfg.snapshots = vec![500];
                cfg.trials = 500;
                cfg.method = MethodSelection::Ss;
                cfg.grid_step_deg = 0.01;
            }
            ExperimentKind::Efficiency => {
                cfg.snr_db = (-2..=12).map(|i| 5.0 * i as f64).collect();
                cfg.method = MethodSelection::Ss;
            }
            ExperimentKind::Scaling => {
                cfg.trials = 500;
                cfg.method = MethodSelection::Ss;
            }
        }
        cfg
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_owned()));
        if self.trials == 0 {
            return fail("trials must be at least 1");
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return fail("snr_db must be a non-empty list of finite values");
        }
        if self.snapshots.is_empty() || self.snapshots.contains(&0) {
            return fail("snapshots must be a non-empty list of positive counts");
        }
        if !(self.grid_step_deg > 0.0 && self.grid_step_deg <= 10.0) {
            return fail("grid_step_deg must lie in (0, 10]");
        }
        if !(self.d0 > 0.0 && self.wavelength > 0.0) {
            return fail("d0 and wavelength must be positive");
        }
        if !self.powers.is_empty() && self.powers.len() != self.doas_deg.len() {
            return fail("powers must be empty or match doas_deg in length");
        }
        match self.experiment {
            ExperimentKind::VerifyMse => {
                if self.doas_deg.is_empty() {
                    return fail("doas_deg must not be empty");
                }
            }
            ExperimentKind::Resolution => {
                if self.separations_deg.is_empty() || self.separations_deg.iter().any(|s| *s <= 0.0) {
                    return fail("separations_deg must be a non-empty list of positive values");
                }
            }
            ExperimentKind::Efficiency => {
                if self.source_counts.is_empty() || self.source_counts.contains(&0) {
                    return fail("source_counts must be a non-empty list of positive counts");
                }
            }
            ExperimentKind::Scaling => {
                if self.q_min < 1 || self.q_min > self.q_max || self.families.is_empty() {
                    return fail("scaling needs 1 <= q_min <= q_max and at least one family");
                }
            }
        }
        if matches!(self.experiment, ExperimentKind::VerifyMse | ExperimentKind::Resolution | ExperimentKind::Efficiency)
            && self.arrays.is_empty()
        {
            return fail("arrays must not be empty");
        }
        Ok(())
    }

    /// Scenario with powers from the template and noise set by the SNR.
    pub fn scenario(&self, doas_deg: &[f64], snr_db: f64) -> Result<SourceScenario> {
        let doas = doas_deg.iter().map(|d| d.to_radians()).collect();
        if self.powers.is_empty() || self.powers.len() != doas_deg.len() {
            return SourceScenario::equal_power(doas, snr_db);
        }
        let pmin = self.powers.iter().cloned().fold(f64::INFINITY, f64::min);
        SourceScenario::new(doas, self.powers.clone(), pmin * 10f64.powf(-snr_db / 10.0))
    }
}

/// Stand-alone scenario description (degrees, dB).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub doas_deg: Vec<f64>,
    /// Source powers; empty means unit power for every source.
    #[serde(default)]
    pub powers: Vec<f64>,
    /// SNR of the weakest source; ignored when `noise_power` is set.
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub noise_power: Option<f64>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn build(&self) -> Result<SourceScenario> {
        let doas: Vec<f64> = self.doas_deg.iter().map(|d| d.to_radians()).collect();
        let powers = if self.powers.is_empty() {
            vec![1.0; doas.len()]
        } else {
            self.powers.clone()
        };
        let noise = match (self.noise_power, self.snr_db) {
            (Some(n), _) => n,
            (None, snr) => {
                let pmin = powers.iter().cloned().fold(f64::INFINITY, f64::min);
                pmin * 10f64.powf(-snr.unwrap_or(0.0) / 10.0)
            }
        };
        SourceScenario::new(doas, powers, noise)
    }
}

//! Reproducible Monte Carlo experiments.
//!
//! Each trial draws its snapshots from a seed derived from the master seed
//! and the trial index only, so results do not depend on the thread count.
//! Trials run in parallel with rayon and are reduced in index order.

pub mod config;
mod experiments;
mod output;

pub use config::{ExperimentConfig, ExperimentKind, Family, MethodSelection, NamedArray, ScenarioFile};
pub use experiments::{
    predicted_threshold, run_efficiency, run_experiment, run_resolution, run_scaling, run_verify_mse,
    scaling_member, spread_doas, EfficiencyRow, ExperimentOutput, ResolutionRow, ScalingFit, ScalingRow,
    ThresholdRow, ThresholdRule, VerifyMseRow,
};
pub use output::{emit_outputs, PlotScript, Table};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::estimator::{estimate_from_snapshots, Augmentation, DoaOutcome, EstimatorOptions};
use crate::geometry::Coarray;
use crate::model::{simulate_snapshots, SourceScenario};
use crate::rng::trial_seed;

/// Why a trial did not produce usable estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "failure", rename_all = "snake_case")]
pub enum TrialFailure {
    /// Fewer spectrum peaks than sources.
    PeakDeficit { peaks_found: usize },
    /// Some estimate landed farther than the wild limit from its source.
    Wild { max_abs_error: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub method: &'static str,
    /// Ascending estimates in radians; empty on peak deficit.
    pub estimates: Vec<f64>,
    /// `θ̂_k − θ_k` in radians; empty on peak deficit.
    pub errors: Vec<f64>,
    pub resolved: bool,
    pub failure: Option<TrialFailure>,
}

/// Everything a batch of trials shares.
#[derive(Debug, Clone)]
pub struct TrialSetup<'a> {
    pub coarray: &'a Coarray,
    pub scenario: &'a SourceScenario,
    pub snapshots: usize,
    pub methods: &'a [Augmentation],
    pub options: EstimatorOptions,
    /// Largest admissible `|θ̂_k − θ_k|` in radians.
    pub wild_limit: f64,
}

/// Default wild limit: half the smallest source spacing, capped at 5°.
pub fn default_wild_limit(scenario: &SourceScenario) -> f64 {
    let cap = 5f64.to_radians();
    scenario
        .doas()
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]).abs())
        .fold(cap, f64::min)
}

fn classify(setup: &TrialSetup, outcome: DoaOutcome, trial: usize, seed: u64, method: Augmentation) -> TrialRecord {
    let mut record = TrialRecord {
        trial,
        seed,
        method: method.tag(),
        estimates: Vec::new(),
        errors: Vec::new(),
        resolved: false,
        failure: None,
    };
    match outcome {
        DoaOutcome::Unresolved { peaks_found } => {
            record.failure = Some(TrialFailure::PeakDeficit { peaks_found });
        }
        DoaOutcome::Resolved(est) => {
            let mut truth = setup.scenario.doas().to_vec();
            truth.sort_by(f64::total_cmp);
            record.errors = est.doas.iter().zip(&truth).map(|(e, t)| e - t).collect();
            record.estimates = est.doas;
            let worst = record.errors.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            if worst >= setup.wild_limit {
                record.failure = Some(TrialFailure::Wild { max_abs_error: worst });
            } else {
                record.resolved = true;
            }
        }
    }
    record
}

/// Runs `trials` trials; the result holds one record per (trial, method),
/// ordered by trial index and then by method.
pub fn run_trials(setup: &TrialSetup, master_seed: u64, trials: usize) -> Result<Vec<TrialRecord>> {
    let batches: Vec<Result<Vec<TrialRecord>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(master_seed, t as u64);
            let y = simulate_snapshots(&setup.coarray.geometry, setup.scenario, setup.snapshots, seed);
            setup
                .methods
                .iter()
                .map(|&m| {
                    let out = estimate_from_snapshots(setup.coarray, &y, setup.scenario.num_sources(), m, &setup.options)?;
                    Ok(classify(setup, out, t, seed, m))
                })
                .collect()
        })
        .collect();
    let mut records = Vec::with_capacity(trials * setup.methods.len());
    for batch in batches {
        records.extend(batch?);
    }
    Ok(records)
}

/// Empirical MSE over the successful trials of one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseSummary {
    pub trials: usize,
    pub successes: usize,
    pub peak_deficits: usize,
    pub wild: usize,
    /// Mean over successful trials of the source-averaged squared error (rad²).
    pub mse: f64,
    /// Standard error of `mse`.
    pub mse_se: f64,
    /// Per-source mean squared error (rad²).
    pub per_source: Vec<f64>,
}

impl MseSummary {
    pub fn from_records<'r>(records: impl IntoIterator<Item = &'r TrialRecord>, num_sources: usize) -> Self {
        let mut s = MseSummary {
            trials: 0,
            successes: 0,
            peak_deficits: 0,
            wild: 0,
            mse: f64::NAN,
            mse_se: f64::NAN,
            per_source: vec![0.0; num_sources],
        };
        let mut per_trial = Vec::new();
        for r in records {
            s.trials += 1;
            match r.failure {
                Some(TrialFailure::PeakDeficit { .. }) => s.peak_deficits += 1,
                Some(TrialFailure::Wild { .. }) => s.wild += 1,
                None => {
                    s.successes += 1;
                    for (acc, e) in s.per_source.iter_mut().zip(&r.errors) {
                        *acc += e * e;
                    }
                    per_trial.push(r.errors.iter().map(|e| e * e).sum::<f64>() / num_sources as f64);
                }
            }
        }
        if s.successes > 0 {
            let n = s.successes as f64;
            s.per_source.iter_mut().for_each(|v| *v /= n);
            let (mean, se) = mean_and_se(&per_trial);
            s.mse = mean;
            s.mse_se = se;
        } else {
            s.per_source.iter_mut().for_each(|v| *v = f64::NAN);
        }
        s
    }

    pub fn failure_rate(&self) -> f64 {
        (self.trials - self.successes) as f64 / self.trials as f64
    }
}

/// Sample mean and its standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

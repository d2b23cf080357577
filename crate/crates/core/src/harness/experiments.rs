//! The four experiment runners and their result tables.

use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind, Family};
use super::output::{PlotScript, Table};
use super::{default_wild_limit, loglog_slope, mean_and_se, run_trials, MseSummary, TrialSetup};
use crate::analysis::{analytical_mse, crb, efficiency_kappa};
use crate::error::{Error, Result};
use crate::estimator::EstimatorOptions;
use crate::geometry::{make_array, mra_sizes, ArrayKind, Coarray};
use crate::model::SourceScenario;
use crate::rng::trial_seed;

const DEG2: f64 = (180.0 / std::f64::consts::PI) * (180.0 / std::f64::consts::PI);

/// Independent master seed for the `point`-th parameter combination.
fn point_seed(master: u64, point: usize) -> u64 {
    trial_seed(master ^ 0x243f_6a88_85a3_08d3, point as u64)
}

fn options(cfg: &ExperimentConfig) -> EstimatorOptions {
    EstimatorOptions {
        grid_step_deg: cfg.grid_step_deg,
        ..EstimatorOptions::default()
    }
}

fn build(cfg: &ExperimentConfig, kind: &ArrayKind) -> Result<Coarray> {
    Ok(Coarray::new(make_array(kind, cfg.d0, cfg.wavelength)?))
}

/// `K` sources spread uniformly over −60°..60° (a single source sits at 0°).
pub fn spread_doas(k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![0.0];
    }
    (0..k).map(|i| -60.0 + 120.0 * i as f64 / (k - 1) as f64).collect()
}

fn mean_diag(m: &crate::RMat) -> f64 {
    m.trace() / m.nrows() as f64
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".to_owned()
    } else {
        format!("{v:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_owned(), fmt)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyMseRow {
    pub array: String,
    pub method: &'static str,
    pub snr_db: f64,
    pub snapshots: usize,
    /// Source-averaged analytical MSE (rad²).
    pub mse_an: f64,
    pub empirical: MseSummary,
    /// `|MSE_an − MSE_em| / MSE_em`.
    pub rel_err: f64,
}

pub fn run_verify_mse(cfg: &ExperimentConfig) -> Result<Vec<VerifyMseRow>> {
    let methods = cfg.method.methods();
    let opts = options(cfg);
    let mut rows = Vec::new();
    let mut point = 0;
    for arr in &cfg.arrays {
        let co = build(cfg, &arr.kind)?;
        for &snr in &cfg.snr_db {
            let sc = cfg.scenario(&cfg.doas_deg, snr)?;
            for &n in &cfg.snapshots {
                let mse_an = mean_diag(&analytical_mse(&co, &sc, n)?);
                let setup = TrialSetup {
                    coarray: &co,
                    scenario: &sc,
                    snapshots: n,
                    methods: &methods,
                    options: opts,
                    wild_limit: default_wild_limit(&sc),
                };
                let records = run_trials(&setup, point_seed(cfg.seed, point), cfg.trials)?;
                point += 1;
                for m in &methods {
                    let empirical = MseSummary::from_records(
                        records.iter().filter(|r| r.method == m.tag()),
                        sc.num_sources(),
                    );
                    rows.push(VerifyMseRow {
                        array: arr.name.clone(),
                        method: m.tag(),
                        snr_db: snr,
                        snapshots: n,
                        mse_an,
                        rel_err: (mse_an - empirical.mse).abs() / empirical.mse,
                        empirical,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Units in which the two-source criterion `ε₁ + ε₂ < Δθ` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdRule {
    /// MSE in deg², separation in degrees.
    Degrees,
    /// MSE in rad², separation in radians.
    Radians,
}

/// Smallest separation (degrees) at which `ε₁ + ε₂ < Δθ` holds, for two
/// sources built by `make(separation_deg)`. `None` if the criterion fails
/// up to 45°.
pub fn predicted_threshold(
    coarray: &Coarray,
    make: impl Fn(f64) -> Result<SourceScenario>,
    snapshots: usize,
    rule: ThresholdRule,
) -> Result<Option<f64>> {
    let gap = |sep: f64| -> Result<f64> {
        let mse = analytical_mse(coarray, &make(sep)?, snapshots)?;
        let sum = mse[(0, 0)] + mse[(1, 1)];
        Ok(match rule {
            ThresholdRule::Degrees => sum * DEG2 - sep,
            ThresholdRule::Radians => sum - sep.to_radians(),
        })
    };
    let mut lo = 0.005;
    if gap(lo)? < 0.0 {
        return Ok(Some(lo));
    }
    let mut hi = lo;
    loop {
        hi *= 1.05;
        if hi > 45.0 {
            return Ok(None);
        }
        if gap(hi)? < 0.0 {
            break;
        }
        lo = hi;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolutionRow {
    pub array: String,
    pub method: &'static str,
    pub snr_db: f64,
    pub snapshots: usize,
    pub separation_deg: f64,
    pub trials: usize,
    pub resolved: usize,
    pub p_resolve: f64,
    pub p_resolve_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub array: String,
    pub method: &'static str,
    pub snr_db: f64,
    pub snapshots: usize,
    /// Criterion in squared degrees against degrees.
    pub predicted_deg: Option<f64>,
    /// Criterion in squared radians against radians, reported in degrees.
    pub radian_literal_deg: Option<f64>,
    /// Interpolated separation where the resolution probability first reaches 0.5.
    pub empirical_crossing_deg: Option<f64>,
}

impl ThresholdRow {
    pub fn ratio(&self) -> Option<f64> {
        Some(self.empirical_crossing_deg? / self.predicted_deg?)
    }
}

/// First upward crossing of 0.5, linearly interpolated. `None` if the curve
/// never reaches 0.5 or already starts above it.
pub fn half_crossing(separations: &[f64], probs: &[f64]) -> Option<f64> {
    let i = probs.iter().position(|&p| p >= 0.5)?;
    if i == 0 {
        return None;
    }
    let (s0, s1, p0, p1) = (separations[i - 1], separations[i], probs[i - 1], probs[i]);
    Some(s0 + (0.5 - p0) / (p1 - p0) * (s1 - s0))
}

pub fn run_resolution(cfg: &ExperimentConfig) -> Result<(Vec<ResolutionRow>, Vec<ThresholdRow>)> {
    let methods = cfg.method.methods();
    let opts = options(cfg);
    let mut seps = cfg.separations_deg.clone();
    seps.sort_by(f64::total_cmp);
    seps.dedup();
    let mut rows = Vec::new();
    let mut thresholds = Vec::new();
    let mut point = 0;
    for arr in &cfg.arrays {
        let co = build(cfg, &arr.kind)?;
        for &snr in &cfg.snr_db {
            let make = |sep: f64| cfg.scenario(&[cfg.center_deg - sep / 2.0, cfg.center_deg + sep / 2.0], snr);
            for &n in &cfg.snapshots {
                let predicted = predicted_threshold(&co, make, n, ThresholdRule::Degrees)?;
                let literal = predicted_threshold(&co, make, n, ThresholdRule::Radians)?;
                let mut curve: Vec<Vec<f64>> = vec![Vec::new(); methods.len()];
                for &sep in &seps {
                    let sc = make(sep)?;
                    let setup = TrialSetup {
                        coarray: &co,
                        scenario: &sc,
                        snapshots: n,
                        methods: &methods,
                        options: opts,
                        wild_limit: (sep / 2.0).to_radians(),
                    };
                    let records = run_trials(&setup, point_seed(cfg.seed, point), cfg.trials)?;
                    point += 1;
                    for (mi, m) in methods.iter().enumerate() {
                        let hits: Vec<f64> = records
                            .iter()
                            .filter(|r| r.method == m.tag())
                            .map(|r| if r.resolved { 1.0 } else { 0.0 })
                            .collect();
                        let (p, _) = mean_and_se(&hits);
                        curve[mi].push(p);
                        rows.push(ResolutionRow {
                            array: arr.name.clone(),
                            method: m.tag(),
                            snr_db: snr,
                            snapshots: n,
                            separation_deg: sep,
                            trials: hits.len(),
                            resolved: hits.iter().filter(|&&h| h > 0.0).count(),
                            p_resolve: p,
                            p_resolve_se: (p * (1.0 - p) / hits.len() as f64).sqrt(),
                        });
                    }
                }
                for (mi, m) in methods.iter().enumerate() {
                    thresholds.push(ThresholdRow {
                        array: arr.name.clone(),
                        method: m.tag(),
                        snr_db: snr,
                        snapshots: n,
                        predicted_deg: predicted,
                        radian_literal_deg: literal,
                        empirical_crossing_deg: half_crossing(&seps, &curve[mi]),
                    });
                }
            }
        }
    }
    Ok((rows, thresholds))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyRow {
    pub array: String,
    pub method: &'static str,
    pub sources: usize,
    pub snr_db: f64,
    pub snapshots: usize,
    /// `ok`, `crb_undefined` or `too_many_sources`.
    pub status: &'static str,
    pub crb_trace: f64,
    /// `Σ_k ε(θ_k)` in rad².
    pub mse_an_sum: f64,
    pub kappa_an: f64,
    pub empirical: Option<MseSummary>,
    pub kappa_em: f64,
}

pub fn run_efficiency(cfg: &ExperimentConfig) -> Result<Vec<EfficiencyRow>> {
    let methods = cfg.method.methods();
    let opts = options(cfg);
    let mut rows = Vec::new();
    let mut point = 0;
    let mut defined = 0;
    let mut crb_failure = None;
    for arr in &cfg.arrays {
        let co = build(cfg, &arr.kind)?;
        for &k in &cfg.source_counts {
            let doas = spread_doas(k);
            for &snr in &cfg.snr_db {
                let sc = cfg.scenario(&doas, snr)?;
                for &n in &cfg.snapshots {
                    point += 1;
                    let blank = |status| {
                        methods.iter().map(move |m| EfficiencyRow {
                            array: arr.name.clone(),
                            method: m.tag(),
                            sources: k,
                            snr_db: snr,
                            snapshots: n,
                            status,
                            crb_trace: f64::NAN,
                            mse_an_sum: f64::NAN,
                            kappa_an: f64::NAN,
                            empirical: None,
                            kappa_em: f64::NAN,
                        })
                    };
                    if k >= co.mv() {
                        rows.extend(blank("too_many_sources"));
                        continue;
                    }
                    let mse = analytical_mse(&co, &sc, n)?;
                    let report = match crb(&co.geometry, &sc, n) {
                        Ok(r) => r,
                        Err(e @ (Error::CrbUndefined { .. } | Error::SingularCovariance { .. })) => {
                            crb_failure = Some(e);
                            rows.extend(blank("crb_undefined").map(|mut r| {
                                r.mse_an_sum = mse.trace();
                                r
                            }));
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    defined += 1;
                    let crb_trace = report.crb.trace();
                    let kappa_an = efficiency_kappa(&report, &mse);
                    let records = if cfg.empirical {
                        let setup = TrialSetup {
                            coarray: &co,
                            scenario: &sc,
                            snapshots: n,
                            methods: &methods,
                            options: opts,
                            wild_limit: default_wild_limit(&sc),
                        };
                        Some(run_trials(&setup, point_seed(cfg.seed, point - 1), cfg.trials)?)
                    } else {
                        None
                    };
                    for m in &methods {
                        let empirical = records.as_ref().map(|recs| {
                            MseSummary::from_records(recs.iter().filter(|r| r.method == m.tag()), k)
                        });
                        let kappa_em = empirical
                            .as_ref()
                            .map_or(f64::NAN, |e| crb_trace / (e.mse * k as f64));
                        rows.push(EfficiencyRow {
                            array: arr.name.clone(),
                            method: m.tag(),
                            sources: k,
                            snr_db: snr,
                            snapshots: n,
                            status: "ok",
                            crb_trace,
                            mse_an_sum: mse.trace(),
                            kappa_an,
                            empirical,
                            kappa_em,
                        });
                    }
                }
            }
        }
    }
    if defined == 0 {
        // every point failed: surface the numerical cause if there was one
        return Err(crb_failure.unwrap_or_else(|| Error::Config("no source count fits any array".into())));
    }
    Ok(rows)
}

/// Members of a scaling family for `q_min..=q_max`; the MRA family uses
/// every tabulated size.
pub fn scaling_member(family: Family, q_min: usize, q_max: usize) -> Vec<ArrayKind> {
    match family {
        Family::Coprime => (q_min..=q_max).map(ArrayKind::coprime_pair).collect(),
        Family::Nested => (q_min..=q_max).map(|q| ArrayKind::Nested { n1: q + 1, n2: q }).collect(),
        Family::Mra => mra_sizes().into_iter().map(|m| ArrayKind::Mra { m }).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub family: &'static str,
    /// `k1` (one source at 0°) or `km` (K = M sources over −60°..60°).
    pub mode: &'static str,
    pub method: &'static str,
    pub sensors: usize,
    pub sources: usize,
    /// Source-averaged analytical MSE (rad²).
    pub mse_an: f64,
    pub empirical: Option<MseSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub family: &'static str,
    pub mode: &'static str,
    pub method: &'static str,
    pub points: usize,
    pub slope_an: f64,
    pub slope_em: Option<f64>,
}

pub fn run_scaling(cfg: &ExperimentConfig) -> Result<(Vec<ScalingRow>, Vec<ScalingFit>)> {
    let methods = cfg.method.methods();
    let opts = options(cfg);
    let snr = cfg.snr_db[0];
    let n = cfg.snapshots[0];
    let mut rows = Vec::new();
    let mut point = 0;
    for &family in &cfg.families {
        for mode in ["k1", "km"] {
            for kind in scaling_member(family, cfg.q_min, cfg.q_max) {
                let co = build(cfg, &kind)?;
                let m = co.num_sensors();
                let k = if mode == "k1" { 1 } else { m };
                point += 1;
                if k >= co.mv() {
                    continue;
                }
                let sc = cfg.scenario(&spread_doas(k), snr)?;
                let mse_an = mean_diag(&analytical_mse(&co, &sc, n)?);
                let records = if cfg.empirical {
                    let setup = TrialSetup {
                        coarray: &co,
                        scenario: &sc,
                        snapshots: n,
                        methods: &methods,
                        options: opts,
                        wild_limit: default_wild_limit(&sc),
                    };
                    Some(run_trials(&setup, point_seed(cfg.seed, point - 1), cfg.trials)?)
                } else {
                    None
                };
                for meth in &methods {
                    rows.push(ScalingRow {
                        family: family.tag(),
                        mode,
                        method: meth.tag(),
                        sensors: m,
                        sources: k,
                        mse_an,
                        empirical: records.as_ref().map(|recs| {
                            MseSummary::from_records(recs.iter().filter(|r| r.method == meth.tag()), k)
                        }),
                    });
                }
            }
        }
    }
    let mut fits = Vec::new();
    for &family in &cfg.families {
        for mode in ["k1", "km"] {
            for meth in &methods {
                let sel: Vec<&ScalingRow> = rows
                    .iter()
                    .filter(|r| r.family == family.tag() && r.mode == mode && r.method == meth.tag())
                    .collect();
                if sel.len() < 2 {
                    continue;
                }
                let x: Vec<f64> = sel.iter().map(|r| r.sensors as f64).collect();
                let an: Vec<f64> = sel.iter().map(|r| r.mse_an).collect();
                let em: Option<Vec<f64>> = sel
                    .iter()
                    .map(|r| r.empirical.as_ref().map(|e| e.mse).filter(|v| v.is_finite() && *v > 0.0))
                    .collect();
                fits.push(ScalingFit {
                    family: family.tag(),
                    mode,
                    method: meth.tag(),
                    points: sel.len(),
                    slope_an: loglog_slope(&x, &an),
                    slope_em: em.map(|em| loglog_slope(&x, &em)),
                });
            }
        }
    }
    Ok((rows, fits))
}

/// Result of any experiment, ready for [`super::emit_outputs`].
#[derive(Debug, Clone)]
pub enum ExperimentOutput {
    VerifyMse(Vec<VerifyMseRow>),
    Resolution {
        curves: Vec<ResolutionRow>,
        thresholds: Vec<ThresholdRow>,
    },
    Efficiency(Vec<EfficiencyRow>),
    Scaling {
        rows: Vec<ScalingRow>,
        fits: Vec<ScalingFit>,
    },
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        ExperimentKind::VerifyMse => ExperimentOutput::VerifyMse(run_verify_mse(cfg)?),
        ExperimentKind::Resolution => {
            let (curves, thresholds) = run_resolution(cfg)?;
            ExperimentOutput::Resolution { curves, thresholds }
        }
        ExperimentKind::Efficiency => ExperimentOutput::Efficiency(run_efficiency(cfg)?),
        ExperimentKind::Scaling => {
            let (rows, fits) = run_scaling(cfg)?;
            ExperimentOutput::Scaling { rows, fits }
        }
    })
}

fn summary_cols(e: Option<&MseSummary>, scale: f64) -> [String; 6] {
    match e {
        Some(e) => [
            e.trials.to_string(),
            e.successes.to_string(),
            e.peak_deficits.to_string(),
            e.wild.to_string(),
            fmt(e.mse * scale),
            fmt(e.mse_se * scale),
        ],
        None => ["0".into(), "0".into(), "0".into(), "0".into(), "nan".into(), "nan".into()],
    }
}

impl ExperimentOutput {
    pub fn tables(&self) -> Vec<Table> {
        match self {
            ExperimentOutput::VerifyMse(rows) => {
                let main = Table::new(
                    "verify_mse",
                    &["array", "method", "snr_db", "n_snapshots", "trials", "mse_an_rad2", "mse_em_rad2", "rel_err"],
                    rows.iter()
                        .map(|r| {
                            vec![
                                r.array.clone(),
                                r.method.into(),
                                r.snr_db.to_string(),
                                r.snapshots.to_string(),
                                r.empirical.trials.to_string(),
                                fmt(r.mse_an),
                                fmt(r.empirical.mse),
                                fmt(r.rel_err),
                            ]
                        })
                        .collect(),
                );
                let stats = Table::new(
                    "verify_mse_stats",
                    &[
                        "array", "method", "snr_db", "n_snapshots", "trials", "successes", "peak_deficits", "wild",
                        "mse_em_rad2", "mse_em_se_rad2", "mse_an_deg2", "mse_em_deg2",
                    ],
                    rows.iter()
                        .map(|r| {
                            let mut v = vec![r.array.clone(), r.method.into(), r.snr_db.to_string(), r.snapshots.to_string()];
                            v.extend(summary_cols(Some(&r.empirical), 1.0));
                            v.push(fmt(r.mse_an * DEG2));
                            v.push(fmt(r.empirical.mse * DEG2));
                            v
                        })
                        .collect(),
                );
                vec![main, stats]
            }
            ExperimentOutput::Resolution { curves, thresholds } => vec![
                Table::new(
                    "resolution",
                    &["array", "method", "snr_db", "n_snapshots", "separation_deg", "trials", "resolved", "p_resolve", "p_resolve_se"],
                    curves
                        .iter()
                        .map(|r| {
                            vec![
                                r.array.clone(),
                                r.method.into(),
                                r.snr_db.to_string(),
                                r.snapshots.to_string(),
                                r.separation_deg.to_string(),
                                r.trials.to_string(),
                                r.resolved.to_string(),
                                fmt(r.p_resolve),
                                fmt(r.p_resolve_se),
                            ]
                        })
                        .collect(),
                ),
                Table::new(
                    "resolution_thresholds",
                    &[
                        "array", "method", "snr_db", "n_snapshots", "predicted_deg", "radian_literal_deg",
                        "empirical_crossing_deg", "crossing_over_predicted",
                    ],
                    thresholds
                        .iter()
                        .map(|t| {
                            vec![
                                t.array.clone(),
                                t.method.into(),
                                t.snr_db.to_string(),
                                t.snapshots.to_string(),
                                fmt_opt(t.predicted_deg),
                                fmt_opt(t.radian_literal_deg),
                                fmt_opt(t.empirical_crossing_deg),
                                fmt_opt(t.ratio()),
                            ]
                        })
                        .collect(),
                ),
            ],
            ExperimentOutput::Efficiency(rows) => vec![Table::new(
                "efficiency",
                &[
                    "array", "method", "k", "snr_db", "n_snapshots", "status", "crb_trace_rad2", "mse_an_sum_rad2",
                    "kappa_an", "trials", "successes", "peak_deficits", "wild", "mse_em_sum_rad2", "mse_em_sum_se_rad2",
                    "kappa_em",
                ],
                rows.iter()
                    .map(|r| {
                        let mut v = vec![
                            r.array.clone(),
                            r.method.into(),
                            r.sources.to_string(),
                            r.snr_db.to_string(),
                            r.snapshots.to_string(),
                            r.status.into(),
                            fmt(r.crb_trace),
                            fmt(r.mse_an_sum),
                            fmt(r.kappa_an),
                        ];
                        v.extend(summary_cols(r.empirical.as_ref(), r.sources as f64));
                        v.push(fmt(r.kappa_em));
                        v
                    })
                    .collect(),
            )],
            ExperimentOutput::Scaling { rows, fits } => vec![
                Table::new(
                    "scaling",
                    &[
                        "family", "mode", "method", "m", "k", "mse_an_rad2", "trials", "successes", "peak_deficits",
                        "wild", "mse_em_rad2", "mse_em_se_rad2",
                    ],
                    rows.iter()
                        .map(|r| {
                            let mut v = vec![
                                r.family.into(),
                                r.mode.into(),
                                r.method.into(),
                                r.sensors.to_string(),
                                r.sources.to_string(),
                                fmt(r.mse_an),
                            ];
                            v.extend(summary_cols(r.empirical.as_ref(), 1.0));
                            v
                        })
                        .collect(),
                ),
                Table::new(
                    "scaling_fit",
                    &["family", "mode", "method", "points", "slope_an", "slope_em"],
                    fits.iter()
                        .map(|f| {
                            vec![
                                f.family.into(),
                                f.mode.into(),
                                f.method.into(),
                                f.points.to_string(),
                                fmt(f.slope_an),
                                fmt_opt(f.slope_em),
                            ]
                        })
                        .collect(),
                ),
            ],
        }
    }

    pub fn plots(&self) -> Vec<PlotScript> {
        match self {
            ExperimentOutput::VerifyMse(rows) => {
                let mut keys: Vec<(String, &str, usize)> =
                    rows.iter().map(|r| (r.array.clone(), r.method, r.snapshots)).collect();
                keys.dedup();
                let series: Vec<String> = keys
                    .iter()
                    .flat_map(|(a, m, n)| {
                        let sel = format!("(strcol(1) eq '{a}' && strcol(2) eq '{m}' && $4 == {n})");
                        [
                            format!("'verify_mse.csv' using ({sel} ? $3 : 1/0):6 with lines title '{a} {m} N={n} analytic'"),
                            format!("'verify_mse.csv' using ({sel} ? $3 : 1/0):7 with points title '{a} {m} N={n} empirical'"),
                        ]
                    })
                    .collect();
                vec![PlotScript::new(
                    "verify_mse",
                    "MSE vs SNR",
                    "SNR (dB)",
                    "MSE (rad^2)",
                    true,
                    series,
                )]
            }
            ExperimentOutput::Resolution { curves, .. } => {
                let mut keys: Vec<(String, &str)> = curves.iter().map(|r| (r.array.clone(), r.method)).collect();
                keys.dedup();
                let series = keys
                    .iter()
                    .map(|(a, m)| {
                        format!("'resolution.csv' using ((strcol(1) eq '{a}' && strcol(2) eq '{m}') ? $5 : 1/0):8 with linespoints title '{a} {m}'")
                    })
                    .collect();
                vec![PlotScript::new(
                    "resolution",
                    "Resolution probability",
                    "separation (deg)",
                    "P(resolved)",
                    false,
                    series,
                )]
            }
            ExperimentOutput::Efficiency(rows) => {
                let mut keys: Vec<(String, usize)> = rows.iter().map(|r| (r.array.clone(), r.sources)).collect();
                keys.sort();
                keys.dedup();
                let series = keys
                    .iter()
                    .map(|(a, k)| {
                        format!("'efficiency.csv' using ((strcol(1) eq '{a}' && $3 == {k}) ? $4 : 1/0):9 with lines title '{a} K={k}'")
                    })
                    .collect();
                vec![PlotScript::new("efficiency", "Efficiency", "SNR (dB)", "kappa", false, series)]
            }
            ExperimentOutput::Scaling { rows, .. } => {
                let mut keys: Vec<(&str, &str)> = rows.iter().map(|r| (r.family, r.mode)).collect();
                keys.dedup();
                let series = keys
                    .iter()
                    .flat_map(|(f, m)| {
                        let sel = format!("(strcol(1) eq '{f}' && strcol(2) eq '{m}')");
                        [
                            format!("'scaling.csv' using ({sel} ? $4 : 1/0):6 with lines title '{f} {m} analytic'"),
                            format!("'scaling.csv' using ({sel} ? $4 : 1/0):11 with points title '{f} {m} empirical'"),
                        ]
                    })
                    .collect();
                vec![PlotScript::new("scaling", "MSE vs sensors", "M", "MSE (rad^2)", true, series)
                    .with_logx()]
            }
        }
    }
}

//! End-to-end checks of the Monte Carlo pipeline at small scale.

use coarray_lab::analysis::analytical_mse;
use coarray_lab::estimator::{Augmentation, EstimatorOptions};
use coarray_lab::geometry::{make_array, ArrayKind, Coarray};
use coarray_lab::harness::{
    default_wild_limit, run_resolution, run_trials, ExperimentConfig, ExperimentKind, MethodSelection, MseSummary,
    NamedArray, TrialSetup,
};
use coarray_lab::SourceScenario;

fn nested() -> Coarray {
    Coarray::new(make_array(&ArrayKind::Nested { n1: 3, n2: 3 }, 0.5, 1.0).unwrap())
}

fn scenario() -> SourceScenario {
    SourceScenario::equal_power(vec![-0.6, -0.1, 0.45], 10.0).unwrap()
}

#[test]
fn da_and_ss_agree_trial_by_trial() {
    let co = nested();
    let sc = scenario();
    let methods = [Augmentation::Direct, Augmentation::SpatialSmoothing];
    let setup = TrialSetup {
        coarray: &co,
        scenario: &sc,
        snapshots: 500,
        methods: &methods,
        options: EstimatorOptions::default(),
        wild_limit: default_wild_limit(&sc),
    };
    let records = run_trials(&setup, 21, 100).unwrap();
    let mut worst_ratio = 0.0f64;
    for pair in records.chunks(2) {
        let (da, ss) = (&pair[0], &pair[1]);
        assert_eq!((da.method, ss.method), ("da", "ss"));
        assert_eq!(da.trial, ss.trial);
        for k in 0..3 {
            let gap = (da.estimates[k] - ss.estimates[k]).abs();
            let err = da.errors[k].abs().max(1e-6);
            worst_ratio = worst_ratio.max(gap / err);
        }
    }
    // the methods differ only at second order in the perturbation
    assert!(worst_ratio < 1e-3, "gap/error ratio {worst_ratio}");
}

#[test]
fn four_times_the_snapshots_quarters_the_mse() {
    let co = nested();
    let sc = scenario();
    let methods = [Augmentation::SpatialSmoothing];
    let mse_at = |n: usize| {
        let setup = TrialSetup {
            coarray: &co,
            scenario: &sc,
            snapshots: n,
            methods: &methods,
            options: EstimatorOptions::default(),
            wild_limit: default_wild_limit(&sc),
        };
        MseSummary::from_records(&run_trials(&setup, 5, 600).unwrap(), 3)
    };
    let (a, b) = (mse_at(200), mse_at(800));
    assert_eq!(a.failure_rate() + b.failure_rate(), 0.0);
    let ratio = a.mse / b.mse;
    assert!((ratio / 4.0 - 1.0).abs() < 0.2, "ratio {ratio}");

    let an = analytical_mse(&co, &sc, 800).unwrap().trace() / 3.0;
    assert!((b.mse / an - 1.0).abs() < 0.2, "empirical {} vs analytical {an}", b.mse);
}

#[test]
fn resolution_improves_with_separation() {
    let mut cfg = ExperimentConfig::preset(ExperimentKind::Resolution);
    cfg.arrays = vec![NamedArray {
        name: "nested".into(),
        kind: ArrayKind::Nested { n1: 5, n2: 5 },
    }];
    cfg.separations_deg = vec![0.3, 1.0, 2.5];
    cfg.trials = 60;
    cfg.grid_step_deg = 0.02;
    cfg.method = MethodSelection::Ss;
    let (rows, thresholds) = run_resolution(&cfg).unwrap();
    assert_eq!(rows.len(), 3);
    let p: Vec<f64> = rows.iter().map(|r| r.p_resolve).collect();
    assert!(p[0] < 0.2 && p[2] > 0.9, "{p:?}");
    assert!(p.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(thresholds.len(), 1);
    let pred = thresholds[0].predicted_deg.unwrap();
    assert!(pred > 0.3 && pred < 2.5, "{pred}");
}

use super::*;
use crate::estimator::stacked_selection;
use crate::geometry::{make_array, ArrayKind, Coarray};
use crate::linalg::{hermitian_defect, to_complex};
use crate::model::steering_vector;
use proptest::prelude::*;

fn coarray(kind: ArrayKind) -> Coarray {
    Coarray::new(make_array(&kind, 0.5, 1.0).unwrap())
}

fn eleven_sources() -> Vec<f64> {
    (0..11).map(|k| (-67.5 + 12.375 * k as f64).to_radians()).collect()
}

fn spread(k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![0.0];
    }
    (0..k)
        .map(|i| (-60.0 + 120.0 * i as f64 / (k - 1) as f64).to_radians())
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn xi_matches_dense_construction() {
    let co = coarray(ArrayKind::Nested { n1: 2, n2: 3 });
    let sc = SourceScenario::new(vec![-0.4, 0.1, 0.7], vec![1.0, 2.0, 0.5], 0.3).unwrap();
    let terms = error_terms(&co, &sc).unwrap();
    let f = to_complex(&co.selection);
    let gamma = to_complex(&stacked_selection(co.mv()));
    for s in &terms.sources {
        let dense = f.transpose() * gamma.transpose() * s.beta.kronecker(&s.alpha);
        assert!((&dense - &s.xi).norm() < 1e-12 * dense.norm());
    }
}

#[test]
fn gamma_single_source_closed_form() {
    let co = coarray(ArrayKind::Ula { m: 6 });
    let sc = SourceScenario::equal_power(vec![0.3], 0.0).unwrap();
    let terms = error_terms(&co, &sc).unwrap();
    let (av, dav) = virtual_steering(&co.geometry, sc.doas(), co.mv());
    let (a, d) = (av.column(0), dav.column(0));
    let expected = d.dotc(&d).re - d.dotc(&a).norm_sqr() / a.norm_squared();
    assert!(rel(terms.sources[0].gamma, expected) < 1e-12);
}

#[test]
fn rejects_too_many_sources() {
    let co = coarray(ArrayKind::Ula { m: 3 });
    let sc = SourceScenario::equal_power(vec![-0.5, 0.0, 0.5], 0.0).unwrap();
    assert!(matches!(error_terms(&co, &sc), Err(Error::TooManySources { sources: 3, mv: 3 })));
    assert!(analytical_mse(&co, &sc, 10).is_err());
}

#[test]
fn mse_matches_dense_kronecker() {
    let co = coarray(ArrayKind::Coprime { m: 2, n: 3 });
    let sc = SourceScenario::new(vec![-0.2, 0.5], vec![1.0, 3.0], 0.7).unwrap();
    let n = 40;
    let terms = error_terms(&co, &sc).unwrap();
    let mse = analytical_mse(&co, &sc, n).unwrap();
    let r = true_covariance(&co.geometry, &sc).matrix;
    let w = r.kronecker(&r.transpose());
    let p = sc.powers();
    for a in 0..2 {
        for b in 0..2 {
            let (sa, sb) = (&terms.sources[a], &terms.sources[b]);
            let v = sa.xi.dotc(&(&w * &sb.xi)).re / (n as f64 * p[a] * p[b] * sa.gamma * sb.gamma);
            assert!(rel(mse[(a, b)], v) < 1e-10);
        }
    }
    assert!(mse[(0, 0)] > 0.0 && mse[(1, 1)] > 0.0);
}

#[test]
fn mse_scales_with_snapshots_and_is_snr_invariant() {
    let co = coarray(ArrayKind::Mra { m: 6 });
    let sc = SourceScenario::new(vec![-0.6, 0.2, 0.9], vec![1.0, 0.4, 2.0], 0.8).unwrap();
    let m1 = analytical_mse(&co, &sc, 100).unwrap();
    let m2 = analytical_mse(&co, &sc, 200).unwrap();
    assert!((&m1 * 0.5 - &m2).abs().max() <= 1e-15 * m1.abs().max());
    let scaled = analytical_mse(&co, &sc.scaled(37.0).unwrap(), 100).unwrap();
    assert!((&scaled - &m1).norm() < 1e-10 * m1.norm());
}

#[test]
fn mse_decreases_with_snr() {
    for (_, kind) in ArrayKind::reference_arrays() {
        let co = coarray(kind);
        let mut prev = f64::INFINITY;
        for snr in (-10..=60).step_by(5) {
            let sc = SourceScenario::equal_power(eleven_sources(), snr as f64).unwrap();
            let e = analytical_mse(&co, &sc, 1000).unwrap();
            let total = e.trace();
            for k in 0..11 {
                assert!(e[(k, k)] > 0.0);
            }
            assert!(total <= prev * (1.0 + 1e-12), "snr {snr}: {total} > {prev}");
            prev = total;
        }
    }
}

#[test]
fn limiting_mse_single_source_vanishes() {
    let co = coarray(ArrayKind::Nested { n1: 3, n2: 3 });
    let sc = SourceScenario::equal_power(vec![0.25], 10.0).unwrap();
    let terms = error_terms(&co, &sc).unwrap();
    let lim = limiting_mse(&co, &sc).unwrap();
    assert!(lim[0].abs() < 1e-12 * terms.sources[0].xi.norm_squared());
}

#[test]
fn limiting_mse_saturates_when_sources_match_sensors() {
    let co = coarray(ArrayKind::Mra { m: 10 });
    let doas = spread(10);
    let lim = limiting_mse(&co, &SourceScenario::equal_power(doas.clone(), 0.0).unwrap()).unwrap();
    assert!(lim.iter().all(|&v| v > 0.0));
    let n = 1000;
    let mut prev_gap = f64::INFINITY;
    for snr in [20.0, 30.0, 40.0, 50.0, 60.0] {
        let sc = SourceScenario::equal_power(doas.clone(), snr).unwrap();
        let e = analytical_mse(&co, &sc, n).unwrap();
        let gap: f64 = (0..10).map(|k| rel(e[(k, k)], lim[k] / n as f64)).fold(0.0, f64::max);
        assert!(gap <= prev_gap);
        prev_gap = gap;
    }
    assert!(prev_gap < 0.01, "gap at 60 dB: {prev_gap}");
}

#[test]
fn limiting_mse_rejects_unequal_powers() {
    let co = coarray(ArrayKind::Ula { m: 4 });
    let sc = SourceScenario::new(vec![0.0, 0.3], vec![1.0, 2.0], 1.0).unwrap();
    assert!(matches!(limiting_mse(&co, &sc), Err(Error::UnequalPowers)));
}

fn covariance_vec(geom: &crate::geometry::ArrayGeometry, doas: &[f64], powers: &[f64], noise: f64) -> CVec {
    let sc = SourceScenario::new(doas.to_vec(), powers.to_vec(), noise).unwrap();
    true_covariance(geom, &sc).vec
}

#[test]
fn jacobian_matches_central_differences() {
    let co = coarray(ArrayKind::Coprime { m: 2, n: 3 });
    let geom = &co.geometry;
    let (doas, powers, noise) = (vec![-0.3, 0.45], vec![1.5, 0.7], 0.4);
    let sc = SourceScenario::new(doas.clone(), powers.clone(), noise).unwrap();
    let j = model_jacobian(geom, &sc);
    let h = 1e-6;
    let k = doas.len();
    for col in 0..2 * k + 1 {
        let (mut dp, mut dm) = ((doas.clone(), powers.clone(), noise), (doas.clone(), powers.clone(), noise));
        match col {
            c if c < k => {
                dp.0[c] += h;
                dm.0[c] -= h;
            }
            c if c < 2 * k => {
                dp.1[c - k] += h;
                dm.1[c - k] -= h;
            }
            _ => {
                dp.2 += h;
                dm.2 -= h;
            }
        }
        let fd = (covariance_vec(geom, &dp.0, &dp.1, dp.2) - covariance_vec(geom, &dm.0, &dm.1, dm.2))
            / C64::new(2.0 * h, 0.0);
        let err = (&fd - j.column(col)).norm() / j.column(col).norm();
        assert!(err < 1e-5, "column {col}: {err}");
    }
    let m = geom.num_sensors();
    assert_eq!(j.column(2 * k).into_owned(), crate::linalg::vec_of(&CMat::identity(m, m)));
    let a0 = steering_vector(geom, doas[0]);
    let expect = a0.map(|c| c.conj()).kronecker(&a0);
    assert!((j.column(k) - expect).norm() < 1e-14);
}

#[test]
fn steering_derivative_matches_central_differences() {
    let co = coarray(ArrayKind::Mra { m: 5 });
    let sc = SourceScenario::equal_power(vec![0.6], 0.0).unwrap();
    let (_, da) = steering_matrix(&co.geometry, &sc);
    let h = 1e-6;
    let fd = (steering_vector(&co.geometry, 0.6 + h) - steering_vector(&co.geometry, 0.6 - h))
        / C64::new(2.0 * h, 0.0);
    assert!((&fd - da.column(0)).norm() / fd.norm() < 1e-5);
}

#[test]
fn fim_forms_agree_and_scale() {
    let co = coarray(ArrayKind::Nested { n1: 2, n2: 3 });
    let sc = SourceScenario::new(vec![-0.5, 0.1, 0.6], vec![1.0, 2.0, 0.5], 0.3).unwrap();
    let vecform = fim(&co.geometry, &sc, 100).unwrap();
    let trace = fim_trace_form(&co.geometry, &sc, 100).unwrap();
    assert!((&vecform - &trace).norm() < 1e-10 * trace.norm());
    let doubled = fim(&co.geometry, &sc, 200).unwrap();
    assert!((&vecform * 2.0 - doubled).norm() <= 1e-12 * vecform.norm());
    let eig = vecform.clone().symmetric_eigen();
    assert!(eig.eigenvalues.min() >= -1e-8 * vecform.norm());
}

#[test]
fn crb_equals_block_of_inverse_fim() {
    let co = coarray(ArrayKind::Coprime { m: 3, n: 5 });
    let sc = SourceScenario::equal_power(spread(6), 5.0).unwrap();
    let rep = crb(&co.geometry, &sc, 500).unwrap();
    let inv = rep.fim.clone().try_inverse().unwrap();
    let block = inv.view((0, 0), (6, 6)).into_owned();
    assert!((&block - &rep.crb).norm() < 1e-7 * block.norm());
    assert_eq!(rep.rank, 13);
    assert!(rep.crb.clone().symmetric_eigen().eigenvalues.min() > 0.0);
}

#[test]
fn crb_is_snr_scale_invariant() {
    let co = coarray(ArrayKind::Mra { m: 10 });
    let sc = SourceScenario::equal_power(spread(12), 10.0).unwrap();
    let a = crb(&co.geometry, &sc, 1000).unwrap().crb;
    let b = crb(&co.geometry, &sc.scaled(1e3).unwrap(), 1000).unwrap().crb;
    assert!((&a - &b).norm() < 1e-10 * a.norm());
}

#[test]
fn crb_single_source_vanishes_and_overloaded_saturates() {
    let co = coarray(ArrayKind::Nested { n1: 5, n2: 5 });
    let mut prev = f64::INFINITY;
    for snr in (-10..=60).step_by(10) {
        let sc = SourceScenario::equal_power(vec![0.0], snr as f64).unwrap();
        let t = crb(&co.geometry, &sc, 1000).unwrap().crb.trace();
        assert!(t < prev);
        prev = t;
    }
    assert!(prev < 1e-8);

    let co = coarray(ArrayKind::Mra { m: 10 });
    let at = |snr: f64| crb(&co.geometry, &SourceScenario::equal_power(spread(12), snr).unwrap(), 1000).unwrap();
    let (c50, c60) = (at(50.0), at(60.0));
    assert!(c60.crb.clone().symmetric_eigen().eigenvalues.min() > 0.0);
    assert!(rel(c60.crb.trace(), c50.crb.trace()) < 0.01);
}

#[test]
fn crb_reports_rank_deficiency() {
    // three sensors give a 9-dim real span for vec(R); 2K+1 > 5 coarray lags
    let co = coarray(ArrayKind::Ula { m: 3 });
    let sc = SourceScenario::equal_power(vec![-0.9, -0.4, 0.0, 0.4, 0.9], 0.0).unwrap();
    match crb(&co.geometry, &sc, 100) {
        Err(Error::CrbUndefined { rank, cols }) => {
            assert_eq!(cols, 11);
            assert!(rank < cols);
        }
        other => panic!("expected rank failure, got {other:?}"),
    }
}

#[test]
fn singular_covariance_is_rejected() {
    let co = coarray(ArrayKind::Ula { m: 4 });
    let sc = SourceScenario::new(vec![0.2], vec![1.0], 1e-300).unwrap();
    assert!(matches!(fim(&co.geometry, &sc, 10), Err(Error::SingularCovariance { .. })));
}

#[test]
fn kappa_of_identical_terms_is_one() {
    let co = coarray(ArrayKind::Ula { m: 5 });
    let sc = SourceScenario::equal_power(vec![0.0, 0.5], 0.0).unwrap();
    let rep = crb(&co.geometry, &sc, 100).unwrap();
    assert!((efficiency_kappa(&rep, &rep.crb.clone()) - 1.0).abs() < 1e-15);
}

#[test]
fn resolution_verdicts() {
    let small = RMat::from_diagonal(&crate::RVec::from_vec(vec![1e-8, 1e-8]));
    assert!(resolution_predict(&small, 0.01).unwrap().resolvable);
    let large = RMat::from_diagonal(&crate::RVec::from_vec(vec![1e-2, 1e-2]));
    assert!(!resolution_predict(&large, 0.01).unwrap().resolvable);
    assert!(matches!(resolution_predict(&RMat::zeros(3, 3), 0.1), Err(Error::NotTwoSources(3))));
}

#[test]
fn structured_matrix_by_hand() {
    let id = RMat::identity(3, 3);
    let c = structured_matrix(&id, &id);
    // block (m, n) equals e_n e_mᵀ
    for m in 0..3 {
        for n in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let v = if i == n && j == m { 1.0 } else { 0.0 };
                    assert_eq!(c[(3 * m + i, 3 * n + j)], v);
                }
            }
        }
    }
    let a = RMat::from_fn(3, 3, |i, j| (1 + i + 3 * j) as f64);
    let b = RMat::from_fn(3, 3, |i, j| (i as f64) - 2.0 * j as f64);
    let c = structured_matrix(&a, &b);
    // block (m, n), entry (i, j) sits at (3m + i, 3n + j)
    assert_eq!(c[(7, 2)], a[(1, 0)] * b[(2, 2)]);
    assert_eq!(c[(3, 7)], a[(0, 2)] * b[(1, 1)]);
}

#[test]
fn moments_sum_to_complex_covariance() {
    let co = coarray(ArrayKind::Nested { n1: 2, n2: 2 });
    let sc = SourceScenario::new(vec![-0.3, 0.6], vec![1.0, 0.5], 0.2).unwrap();
    let r = true_covariance(&co.geometry, &sc).matrix;
    let mom = delta_r_moments(&r, 20);
    // E[Δr Δrᴴ] = (Rᵀ ⊗ R)/N
    let full = r.transpose().kronecker(&r) / C64::new(20.0, 0.0);
    let real_part = &mom.re_re + &mom.im_im;
    let imag_part = mom.re_im.transpose() - &mom.re_im;
    assert!((full.map(|c| c.re) - real_part).norm() < 1e-12 * full.norm());
    assert!((full.map(|c| c.im) - imag_part).norm() < 1e-12 * full.norm());
}

#[test]
fn moment_expansion_reproduces_mse() {
    let co = coarray(ArrayKind::Coprime { m: 2, n: 3 });
    let sc = SourceScenario::new(vec![-0.7, 0.0, 0.5], vec![1.0, 0.3, 2.5], 0.5).unwrap();
    let terms = error_terms(&co, &sc).unwrap();
    let r = true_covariance(&co.geometry, &sc).matrix;
    let from_moments = mse_from_moments(&terms, &delta_r_moments(&r, 77), &sc);
    let direct = mse_from_terms(&co, &sc, &terms, 77);
    assert!((&from_moments - &direct).norm() < 1e-10 * direct.norm());
}

fn scenario_strategy() -> impl Strategy<Value = (usize, Vec<f64>, f64)> {
    (0usize..3, 1usize..6, -10.0f64..30.0).prop_flat_map(|(arr, k, snr)| {
        (Just(arr), proptest::collection::vec(-80.0f64..80.0, k), Just(snr))
    })
}

fn separated(mut doas: Vec<f64>) -> Option<Vec<f64>> {
    doas.sort_by(f64::total_cmp);
    if doas.windows(2).any(|w| w[1] - w[0] < 1.0) {
        return None;
    }
    Some(doas.into_iter().map(f64::to_radians).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn error_terms_are_hermitian_and_nondegenerate((arr, doas, snr) in scenario_strategy()) {
        let Some(doas) = separated(doas) else { return Ok(()); };
        let kind = ArrayKind::reference_arrays()[arr].1.clone();
        let co = coarray(kind);
        let sc = SourceScenario::equal_power(doas, snr).unwrap();
        let terms = error_terms(&co, &sc).unwrap();
        for (k, s) in terms.sources.iter().enumerate() {
            let defect = hermitian_defect(&terms.xi_matrix(k));
            // round-off grows with the projector conditioning
            prop_assert!(defect < 1e-10 * s.xi.norm().max(1.0), "defect {defect:e}, norm {:e}", s.xi.norm());
            prop_assert!(s.beta.norm() > 1e-8);
            prop_assert!(s.xi.norm() > 1e-8);
            prop_assert!(s.gamma > 0.0);
        }
    }

    #[test]
    fn moment_oracle_agrees((arr, doas, snr) in scenario_strategy()) {
        let Some(doas) = separated(doas) else { return Ok(()); };
        let co = coarray(ArrayKind::reference_arrays()[arr].1.clone());
        let sc = SourceScenario::equal_power(doas, snr).unwrap();
        let terms = error_terms(&co, &sc).unwrap();
        let r = true_covariance(&co.geometry, &sc).matrix;
        let a = mse_from_moments(&terms, &delta_r_moments(&r, 500), &sc);
        let b = mse_from_terms(&co, &sc, &terms, 500);
        prop_assert!((&a - &b).norm() < 1e-10 * b.norm());
    }
}

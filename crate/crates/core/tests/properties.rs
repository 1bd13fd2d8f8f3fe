mod common;

use std::f64::consts::PI;

use loem_core::estimation::{
    error_bars, mle_closed_form, mle_grid, run_trials, CountVector, EstimateStatus, NoiseModel, TrialConfig,
};
use loem_core::information::{
    crb_bound, curvature_from_overlaps, curvature_from_sld, family_qfim, fim, qfim_pure, uhlmann_curvature,
    wcc_holds,
};
use loem_core::loem::{
    antiparallel_qfim_closed, antiparallel_state, bell_like_basis, born_probabilities, four_port_model,
    orthogonal_probes, outcome_probabilities, AntiparallelFamily, GeneratorFamily, ProductFamily, QubitRotation,
    UnitaryFamily,
};
use loem_core::state::{
    derivatives, qubit_unitary, unitarity_defect, DerivativeMode, ParameterPoint, QubitFamily, StateFamily,
    StateVector, C64,
};
use loem_core::Result;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn point(a: f64, b: f64) -> ParameterPoint {
    ParameterPoint::two(a, b).unwrap()
}

#[test]
fn qubit_unitaries_stay_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let u = qubit_unitary(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        assert!(unitarity_defect(u.entries()) < 1e-12);
    }
}

/// `e^{iα(x)}` applied to the qubit family, with `α = x₁ + 2x₂`.
struct Regauged;

impl StateFamily for Regauged {
    fn dim(&self) -> usize {
        2
    }
    fn num_params(&self) -> usize {
        2
    }
    fn evaluate(&self, x: &ParameterPoint) -> Result<StateVector> {
        let phase = C64::from_polar(1.0, x.get(0) + 2.0 * x.get(1));
        StateVector::new(common::bloch(x.get(0), x.get(1)).into_iter().map(|a| a * phase).collect())
    }
}

#[test]
fn qfim_and_curvature_are_gauge_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let x = point(rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI));
        let plain = derivatives(&QubitFamily::analytic(), &x).unwrap();
        let dressed = derivatives(&Regauged, &x).unwrap();
        let q0 = qfim_pure(plain.base(), &plain).unwrap();
        let q1 = qfim_pure(dressed.base(), &dressed).unwrap();
        assert!(q0.max_abs_diff(&q1) < 1e-8);
        let u0 = uhlmann_curvature(plain.base(), &plain).unwrap();
        let u1 = uhlmann_curvature(dressed.base(), &dressed).unwrap();
        assert!((u0.get(0, 1) - u1.get(0, 1)).abs() < 1e-8);
    }
}

#[test]
fn curvature_routes_agree_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in [2usize, 4] {
        for _ in 0..1000 {
            let unitary = GeneratorFamily::random(d, 2, &mut rng);
            // random probe: first column of a random unitary
            let probe_u = GeneratorFamily::random(d, 1, &mut rng)
                .unitary(&ParameterPoint::new(vec![rng.random_range(-3.0..3.0)]).unwrap())
                .unwrap();
            let probe = StateVector::basis(d, 0).evolve(&probe_u).unwrap();
            let family = ProductFamily::identical_copies(unitary, probe, 1).unwrap();
            let x = point(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let jac = derivatives(&family, &x).unwrap();
            let a = curvature_from_sld(jac.base(), &jac).unwrap();
            let b = curvature_from_overlaps(&jac);
            assert!((a.entries() - b.entries()).iter().all(|v| v.abs() < 1e-8));
            for i in 0..2 {
                assert_eq!(a.get(i, i), 0.0);
                for j in 0..2 {
                    assert_eq!(a.get(i, j), -a.get(j, i));
                }
            }
        }
    }
}

#[test]
fn qfim_is_additive_on_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in [2usize, 3] {
        for _ in 0..20 {
            let unitary = GeneratorFamily::random(d, 2, &mut rng);
            let probes = orthogonal_probes(d).unwrap();
            let x = point(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let joint = family_qfim(&ProductFamily::loem(unitary.clone(), &probes).unwrap(), &x).unwrap();
            let mut sum = DMatrix::<f64>::zeros(2, 2);
            for p in probes.probes() {
                let single = ProductFamily::identical_copies(unitary.clone(), p.clone(), 1).unwrap();
                sum += family_qfim(&single, &x).unwrap().entries();
            }
            assert!((joint.entries() - sum).iter().all(|v| v.abs() < 1e-7));
        }
    }
}

#[test]
fn classical_bound_dominates_quantum_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.random_range(1..=5u32);
        let theta = loop {
            let t = rng.random_range(0.0..PI);
            if (n as f64 * t).sin().abs() > 0.1 {
                break t;
            }
        };
        let x = point(theta, rng.random_range(0.1..1.4));
        let f = fim(four_port_model(n), &x, 1e-5).unwrap();
        let q = family_qfim(&AntiparallelFamily::new(n), &x).unwrap();
        let gap = crb_bound(&f, 1).unwrap().entries() - crb_bound(&q, 1).unwrap().entries();
        let min = SymmetricEigen::new(gap).eigenvalues.min();
        assert!(min >= -1e-8, "min eigenvalue {min}");
    }
}

#[test]
fn closed_form_probabilities_normalize() {
    for i in 0..200 {
        for j in 0..200 {
            for n in [1, 4] {
                let p = outcome_probabilities(i as f64 * 0.0314, j as f64 * 0.0314, n);
                assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn born_rule_matches_closed_form_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let basis = bell_like_basis();
    for _ in 0..1000 {
        let (t, p, n) = (rng.random_range(-7.0..7.0), rng.random_range(-7.0..7.0), rng.random_range(1..=10u32));
        let born = born_probabilities(&antiparallel_state(t, p, n), &basis).unwrap();
        let closed = common::ports(t, p, n);
        for k in 0..4 {
            assert!((born.probs()[k] - closed[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn identical_copy_curvature_matches_finite_difference_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let theta = rng.random_range(0.1..3.0);
        let phi = rng.random_range(0.0..6.0);
        let jac = common::fd_jacobian(
            |x| {
                let n = common::bloch(x[0], x[1]);
                common::kron(&n, &n)
            },
            &[theta, phi],
            1e-5,
        );
        let oracle = -2.0 * common::inner(&jac[0], &jac[1]).im;
        assert!((oracle.abs() - theta.sin()).abs() < 1e-8);
        let family =
            ProductFamily::identical_copies(QubitRotation::default(), StateVector::basis(2, 0), 2).unwrap();
        let lib = derivatives(&family, &point(theta, phi)).unwrap();
        let u = uhlmann_curvature(lib.base(), &lib).unwrap();
        assert!((u.get(0, 1) - oracle).abs() < 1e-8);
    }
}

#[test]
fn loem_states_satisfy_wcc_for_higher_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for d in [3usize, 4] {
        let probes = orthogonal_probes(d).unwrap();
        for _ in 0..5 {
            let family = ProductFamily::loem(GeneratorFamily::random(d, 2, &mut rng), &probes).unwrap();
            let x = point(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let jac = derivatives(&family, &x).unwrap();
            assert!((jac.base().amplitudes().norm() - 1.0).abs() < 1e-12);
            let u = uhlmann_curvature(jac.base(), &jac).unwrap();
            assert!(wcc_holds(&u, 1e-8), "d = {d}: {}", u.max_abs());
            // the same generators on identical copies of |0⟩ are generically incompatible
            let copies = ProductFamily::identical_copies(family.unitary().clone(), StateVector::basis(d, 0), d).unwrap();
            let jac = derivatives(&copies, &x).unwrap();
            assert!(!wcc_holds(&uhlmann_curvature(jac.base(), &jac).unwrap(), 1e-8));
        }
    }
}

#[test]
fn finite_difference_loem_jacobian_keeps_wcc() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let family = ProductFamily::loem(GeneratorFamily::random(3, 2, &mut rng), &orthogonal_probes(3).unwrap())
        .unwrap()
        .with_mode(DerivativeMode::CentralDifference { step: 1e-5 });
    let jac = derivatives(&family, &point(0.4, -0.9)).unwrap();
    let im = common::inner(jac.column(0).as_slice(), jac.column(1).as_slice()).im;
    assert!(im.abs() < 1e-8);
}

#[test]
fn antiparallel_qfim_doubles_single_copy_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let x = point(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let pair = family_qfim(&AntiparallelFamily::new(1), &x).unwrap();
        let single = family_qfim(&QubitFamily::analytic(), &x).unwrap();
        assert!((pair.entries() - single.entries() * 2.0).iter().all(|v| v.abs() < 1e-8));
        assert!(pair.max_abs_diff(&antiparallel_qfim_closed(x.get(0), 1)) < 1e-12);
    }
}

fn trial(theta_deg: f64, shots: u64, seed: u64) -> TrialConfig {
    TrialConfig {
        theta_true: theta_deg.to_radians(),
        phi_true: 36f64.to_radians(),
        n_iter: 1,
        shots,
        repeats: 400,
        seed,
        noise_model: NoiseModel::Multinomial,
    }
}

#[test]
fn estimator_approaches_the_bound_as_shots_grow() {
    let theta = 40f64.to_radians();
    let target_theta = 0.5;
    let target_phi = 1.0 / (2.0 * theta.sin().powi(2));
    let deviations: Vec<(f64, f64)> = [1_000u64, 10_000, 100_000]
        .iter()
        .map(|&m| {
            let (dt, dp): (Vec<f64>, Vec<f64>) = (0..5)
                .map(|seed| {
                    let s = run_trials(&trial(40.0, m, seed)).unwrap();
                    ((s.m_times_mse_theta - target_theta).abs(), (s.m_times_mse_phi - target_phi).abs())
                })
                .unzip();
            (common::median(dt), common::median(dp))
        })
        .collect();
    // relative M×MSE fluctuations at 400 repeats are ~7% at any M, so the
    // finite-M bias is what must not grow
    for (dt, dp) in &deviations {
        assert!(*dt < 0.15 * target_theta, "{deviations:?}");
        assert!(*dp < 0.15 * target_phi, "{deviations:?}");
    }
}

#[test]
fn fig4_configurations_are_decoupled() {
    for theta_deg in [10.0, 25.0, 40.0, 55.0, 70.0, 85.0] {
        let s = run_trials(&trial(theta_deg, 10_000, 7)).unwrap();
        assert!(s.m_times_covariance.abs() < 3.0 * s.se_m_covariance, "θ = {theta_deg}: {s:?}");
    }
}

#[test]
fn campaigns_respect_the_quantum_bound() {
    for theta_deg in [10.0, 25.0, 40.0, 55.0, 70.0, 85.0] {
        let s = run_trials(&trial(theta_deg, 10_000, 11)).unwrap();
        let theta = f64::to_radians(theta_deg);
        let q = crb_bound(&antiparallel_qfim_closed(theta, 1), 10_000).unwrap().per_shot();
        assert!(s.m_times_mse_theta >= q[(0, 0)] - 3.0 * s.se_m_mse_theta);
        assert!(s.m_times_mse_phi >= q[(1, 1)] - 3.0 * s.se_m_mse_phi);
    }
}

#[test]
fn campaigns_are_reproducible() {
    let a = run_trials(&trial(25.0, 10_000, 3)).unwrap();
    let b = run_trials(&trial(25.0, 10_000, 3)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, run_trials(&trial(25.0, 10_000, 4)).unwrap());
}

#[test]
fn poisson_error_bars_have_chi_square_size() {
    let config = trial(40.0, 10_000, 7);
    let stats = run_trials(&config).unwrap();
    let (err_theta, err_phi) = error_bars(&config, 100).unwrap();
    let scale = (2.0 / config.repeats as f64).sqrt();
    for (err, value) in [(err_theta, stats.m_times_mse_theta), (err_phi, stats.m_times_mse_phi)] {
        let expected = value * scale;
        assert!(err > 0.5 * expected && err < 2.0 * expected, "err {err}, expected {expected}");
    }
}

#[test]
fn grid_recovers_truth_from_exact_frequencies() {
    // s = i/20, sin²b = j/10 and M = 4000 make every expected count an integer
    for n in [1u32, 3] {
        for i in [1u64, 4, 7, 9] {
            for j in [1u64, 5, 8] {
                let counts = [
                    (20 - i).pow(2) * 10,
                    i * i * 10,
                    2 * i * (20 - i) * j,
                    2 * i * (20 - i) * (10 - j),
                ];
                assert_eq!(counts.iter().sum::<u64>(), 4000);
                let theta = 2.0 * (i as f64 / 20.0).sqrt().asin() / n as f64;
                let phi = (j as f64 / 10.0).sqrt().asin() / n as f64;
                let e = mle_grid(&CountVector::new(counts), n, 64).unwrap();
                assert!((e.theta_hat - theta).abs() < 1e-6 && (e.phi_hat - phi).abs() < 1e-6, "{e:?}");
                let c = mle_closed_form(&CountVector::new(counts), n).unwrap();
                assert!((c.theta_hat - theta).abs() < 1e-12 && (c.phi_hat - phi).abs() < 1e-12);
                assert_eq!(c.status, EstimateStatus::Ok);
            }
        }
    }
}

#[test]
fn average_qfim_oracle_for_single_qubit() {
    let mean_sin_sq = common::simpson(|t| t.sin().powi(2), 0.0, PI, 1000) / PI;
    assert!((mean_sin_sq - 0.5).abs() < 1e-12);
    let domain = loem_core::state::ParamBox::new(vec![0.0, 0.0], vec![PI, 2.0 * PI]).unwrap();
    let avg = loem_core::information::average_qfim(&QubitFamily::analytic(), &domain, 100_000, 1).unwrap();
    assert!((avg.get(0, 0) - 1.0).abs() < 0.01);
    assert!((avg.get(1, 1) - mean_sin_sq).abs() < 0.01 * mean_sin_sq);
}

use std::sync::Arc;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::eigensolve::EigOptions;
use crate::gradient::{gradient_check, Objective, SolveOptions, TermStatus};
use crate::initializers::{spectral_init, InitResult, InitSpec, PreprocessFn, RescaleMode};
use crate::linalg;
use crate::metrics::phase_aligned_error;
use crate::operators::{
    make_gaussian_instance, DenseOperator, GaussianSpec, Instance, MeasurementOperator,
};

use super::*;

type C = Complex<f64>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn unit_init(inst: &Instance<f64>, seed: u64) -> InitResult<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dir = linalg::random_unit_vector(&mut rng, inst.n());
    InitResult {
        x0: dir.clone(),
        raw_direction: dir,
        alpha: 1.0,
        eig_value: 0.0,
        diagnostics: "unit test init".into(),
    }
}

#[test]
fn objective_vanishes_at_global_minimizer() {
    let inst = make_gaussian_instance::<f64>(&GaussianSpec::new(6, 24, 1), None).unwrap();
    let x = inst.x_true.clone().unwrap();
    let obj = objective_for(&inst, FamilySpec::wirtinger_flow(), &x);
    assert!(obj.value(&x) <= 1e-20);
    assert!(linalg::norm(&obj.gradient(&x)) <= 1e-10);
}

#[test]
fn objective_scalar_hand_computation() {
    // n = 1, A = (1), b = (2), p = 2, x = 1: F = ½(1 − 4)² = 4.5.
    // The gradient under the finite-difference (Wirtinger ∇ = 2·∂/∂conj)
    // convention is 2·(1 − 4)·1·1 = −6, verified below by central differences.
    let op = DenseOperator::from_rows(1, 1, vec![c(1.0, 0.0)]).unwrap();
    let inst = Instance::new(Arc::new(op), vec![2.0], None, "scalar").unwrap();
    let obj = objective_for(&inst, FamilySpec::wirtinger_flow(), &[c(1.0, 0.0)]);
    let x = vec![c(1.0, 0.0)];
    assert!((obj.value(&x) - 4.5).abs() <= 1e-15);
    let g = obj.gradient(&x);
    assert!((g[0] - c(-6.0, 0.0)).norm() <= 1e-14);
    let fd = gradient_check(&obj, &[x], 1e-6);
    assert!(fd <= 1e-8, "finite differences disagree: {fd}");
}

#[test]
fn p2_gradient_matches_finite_differences() {
    let inst = make_gaussian_instance::<f64>(&GaussianSpec::new(5, 15, 2), None).unwrap();
    let obj = objective_for(&inst, FamilySpec::wirtinger_flow(), &[c(0.0, 0.0); 5]);
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let points: Vec<Vec<C>> = (0..20)
        .map(|_| linalg::complex_gaussian_vec(&mut rng, 5, 1.0))
        .collect();
    let worst = gradient_check(&obj, &points, 1e-5);
    assert!(worst <= 1e-5, "relative error {worst}");
}

#[test]
fn p1_value_gradient_match_oracles() {
    let inst = make_gaussian_instance::<f64>(&GaussianSpec::new(5, 15, 4), None).unwrap();
    let obj = objective_for(&inst, FamilySpec::amplitude_flow(), &[c(0.0, 0.0); 5]);
    let mut rng = ChaCha20Rng::seed_from_u64(5);

    let mut checked = 0;
    while checked < 50 {
        let x: Vec<C> = linalg::complex_gaussian_vec(&mut rng, 5, 1.0);
        let fx = inst.op.forward(&x);
        // Stay away from the non-differentiable set |aᵢᴴx| = 0.
        if fx.iter().any(|z| z.norm() < 0.05) {
            continue;
        }
        checked += 1;

        // Scalar-loop oracle for the value.
        let mut want = 0.0;
        for i in 0..inst.m() {
            let row = inst.op.row(i).unwrap();
            let mut acc = c(0.0, 0.0);
            for j in 0..inst.n() {
                acc += row[j].conj() * x[j];
            }
            let r = acc.norm() - inst.b[i];
            want += 0.5 * r * r;
        }
        assert!((obj.value(&x) - want).abs() <= 1e-12 * want.max(1.0));

        let fd = gradient_check(&obj, &[x], 1e-5);
        assert!(fd <= 1e-5, "p=1 finite differences disagree: {fd}");
    }
}

#[test]
fn truncation_off_values_collapse_to_uniform() {
    let inst = make_gaussian_instance::<f64>(&GaussianSpec::new(6, 30, 6), None).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let x: Vec<C> = linalg::complex_gaussian_vec(&mut rng, 6, 1.0);
    let spec = FamilySpec {
        exponent: Exponent::Two,
        weight_rule: WeightRule::Truncated {
            alpha_lower: f64::INFINITY,
            alpha_upper: f64::INFINITY,
        },
    };
    let obj = objective_for(&inst, spec, &x);
    assert_eq!(obj.weights(), vec![1.0; 30].as_slice());

    let spec = FamilySpec {
        exponent: Exponent::One,
        weight_rule: WeightRule::Reweighted { eta: 0.0 },
    };
    let obj = objective_for(&inst, spec, &x);
    assert_eq!(obj.weights(), vec![1.0; 30].as_slice());
}

#[test]
fn weights_stay_in_unit_interval() {
    let inst = make_gaussian_instance::<f64>(&GaussianSpec::new(8, 40, 8), None).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    for seed in 0..10 {
        let _ = seed;
        let x: Vec<C> = linalg::complex_gaussian_vec(&mut rng, 8, 1.0);
        for spec in [
            FamilySpec::<f64>::truncated(Exponent::Two),
            FamilySpec::<f64>::reweighted(Exponent::One),
        ] {
            let obj = objective_for(&inst, spec, &x);
            assert!(obj
                .weights()
                .iter()
                .all(|&w| (0.0..=1.0).contains(&w) && w.is_finite()));
        }
    }
}

#[test]
fn gs_identity_operator_converges_in_one_iteration() {
    let op = DenseOperator::from_rows(
        2,
        2,
        vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
    )
    .unwrap();
    let inst = Instance::new(Arc::new(op), vec![1.0, 2.0], None, "identity").unwrap();
    let x0 = vec![c(1.0, 1.0), c(-3.0, 0.0)];
    let init = InitResult {
        x0: x0.clone(),
        raw_direction: x0.clone(),
        alpha: 1.0,
        eig_value: 0.0,
        diagnostics: String::new(),
    };
    let opts = SolveOptions {
        max_iters: 5,
        ..SolveOptions::default()
    };
    let result = solve_gerchberg_saxton(&inst, &init, &opts).unwrap();
    assert_eq!(result.trace.status, TermStatus::Converged);
    // Magnitudes match b; phases carried over from x0.
    assert!((result.x_hat[0].norm() - 1.0).abs() <= 1e-10);
    assert!((result.x_hat[1].norm() - 2.0).abs() <= 1e-10);
    let ph0 = linalg::phase_or_one(x0[0]);
    let ph1 = linalg::phase_or_one(x0[1]);
    assert!((result.x_hat[0] - ph0 * c(1.0, 0.0)).norm() <= 1e-10);
    assert!((result.x_hat[1] - ph1 * c(2.0, 0.0)).norm() <= 1e-10);
}

#[test]
fn fienup_with_unit_relaxation_matches_gs() {
    let inst = make_gaussian_instance::<f64>(&GaussianSpec::new(8, 48, 11), None).unwrap();
    let init = spectral_init(
        &inst,
        PreprocessFn::Identity,
        &EigOptions::default(),
        RescaleMode::default(),
    )
    .unwrap();
    let opts = SolveOptions {
        max_iters: 30,
        ..SolveOptions::default()
    };
    let gs = solve_gerchberg_saxton(&inst, &init, &opts).unwrap();
    let fienup = solve_fienup(&inst, &init, &opts, 1.0).unwrap();
    assert_eq!(gs.x_hat, fienup.x_hat);
    assert_eq!(gs.trace.iterations, fienup.trace.iterations);
    for (a, b) in gs.trace.records.iter().zip(&fienup.trace.records) {
        assert_eq!(a.objective, b.objective);
    }
}

#[test]
fn fienup_with_zero_relaxation_never_moves() {
    let inst = make_gaussian_instance::<f64>(&GaussianSpec::new(6, 24, 12), None).unwrap();
    let init = unit_init(&inst, 1);
    let opts = SolveOptions {
        max_iters: 10,
        ..SolveOptions::default()
    };
    let result = solve_fienup(&inst, &init, &opts, 0.0).unwrap();
    assert_eq!(result.x_hat, init.x0);
    assert_eq!(result.trace.status, TermStatus::MaxIters);
    assert_eq!(result.trace.iterations, 10);
}

#[test]
fn gs_residual_is_nonincreasing() {
    for seed in 0..3u64 {
        let inst =
            make_gaussian_instance::<f64>(&GaussianSpec::new(16, 96, 100 + seed), None).unwrap();
        let init = spectral_init(
            &inst,
            PreprocessFn::Identity,
            &EigOptions::default(),
            RescaleMode::default(),
        )
        .unwrap();
        let opts = SolveOptions {
            max_iters: 40,
            tol: 1e-12,
            ..SolveOptions::default()
        };
        let result = solve_gerchberg_saxton(&inst, &init, &opts).unwrap();
        for w in result.trace.records.windows(2) {
            let r0 = (2.0 * w[0].objective).sqrt();
            let r1 = (2.0 * w[1].objective).sqrt();
            assert!(
                r1 <= r0 + 1e-9,
                "seed {seed}: residual rose from {r0} to {r1}"
            );
        }
    }
}

#[test]
fn kaczmarz_scalar_case_is_exact() {
    let op = DenseOperator::from_rows(1, 1, vec![c(2.0, 0.0)]).unwrap();
    let inst = Instance::new(Arc::new(op), vec![4.0], None, "scalar").unwrap();
    let init = InitResult {
        x0: vec![c(1.0, 0.0)],
        raw_direction: vec![c(1.0, 0.0)],
        alpha: 1.0,
        eig_value: 0.0,
        diagnostics: String::new(),
    };
    let opts = SolveOptions {
        max_iters: 1,
        ..SolveOptions::default()
    };
    let result = solve_kaczmarz(&inst, &init, &opts).unwrap();
    assert!((result.x_hat[0] - c(2.0, 0.0)).norm() <= 1e-15);
}

#[test]
fn kaczmarz_update_projects_onto_measurement() {
    // With a single row, one sweep applies exactly one update; afterwards
    // the measurement is matched exactly.
    let mut rng = ChaCha20Rng::seed_from_u64(14);
    let row: Vec<C> = linalg::complex_gaussian_vec(&mut rng, 3, 1.0);
    let op = DenseOperator::from_rows(1, 3, row.clone()).unwrap();
    let inst = Instance::new(Arc::new(op), vec![1.7], None, "proj").unwrap();
    let init = unit_init(&inst, 2);
    let opts = SolveOptions {
        max_iters: 1,
        ..SolveOptions::default()
    };
    let result = solve_kaczmarz(&inst, &init, &opts).unwrap();
    let c_val = linalg::dot(&row, &result.x_hat);
    assert!((c_val.norm() - 1.7).abs() <= 1e-12);
}

#[test]
fn phasemax_feasible_anchor_drives_violation_to_zero() {
    let inst = make_gaussian_instance::<f64>(&GaussianSpec::new(16, 128, 15), None).unwrap();
    let x_true = inst.x_true.clone().unwrap();
    let anchor: Vec<C> = x_true.iter().map(|z| z * c(0.5, 0.0)).collect();
    let init = InitResult {
        x0: anchor.clone(),
        raw_direction: anchor.clone(),
        alpha: 1.0,
        eig_value: 0.0,
        diagnostics: String::new(),
    };
    let opts = SolveOptions {
        max_iters: 3000,
        tol: 1e-12,
        ..SolveOptions::default()
    };
    let result = solve_phasemax(&inst, &init, &opts, 1e4).unwrap();
    let violation = constraint_violation(&inst, &result.x_hat);
    assert!(violation <= 1e-6, "max constraint violation {violation}");
    // The objective decreases along the anchor direction: the final iterate
    // has strictly larger anchor correlation than the (feasible) start.
    let before = linalg::dot(&anchor, &anchor).re;
    let after = linalg::dot(&anchor, &result.x_hat).re;
    assert!(after > before);
}

#[test]
fn phasemax_direction_is_scale_equivariant() {
    let n = 24;
    let inst1 = make_gaussian_instance::<f64>(&GaussianSpec::new(n, 12 * n, 16), None).unwrap();
    let b2: Vec<f64> = inst1.b.iter().map(|v| 2.0 * v).collect();
    let inst2 = Instance::new(
        inst1.op.clone(),
        b2,
        inst1.x_true.clone(),
        "scaled",
    )
    .unwrap();

    // Anchor fixed across both runs.
    let init = InitSpec::<f64>::default()
        .resolve(&inst1, &EigOptions::default())
        .unwrap();
    let opts = SolveOptions {
        max_iters: 6000,
        tol: 1e-12,
        ..SolveOptions::default()
    };
    let r1 = solve_phasemax(&inst1, &init, &opts, 10.0).unwrap();
    let r2 = solve_phasemax(&inst2, &init, &opts, 10.0).unwrap();

    // Compare directions after phase alignment and renormalization.
    let mut d1 = r1.x_hat.clone();
    let n1 = linalg::normalize(&mut d1);
    let mut d2 = r2.x_hat.clone();
    let n2 = linalg::normalize(&mut d2);
    assert!(n1 > 0.0 && n2 > 0.0);
    let err = phase_aligned_error(&d1, &d2).unwrap();
    assert!(err <= 1e-6, "direction changed by {err}");
}

#[test]
fn all_solvers_terminate_on_adversarial_instances() {
    let mut corpus: Vec<Instance<f64>> = Vec::new();

    // Zero row in an otherwise random matrix.
    let mut rng = ChaCha20Rng::seed_from_u64(20);
    let mut rows: Vec<C> = linalg::complex_gaussian_vec(&mut rng, 4 * 3, 1.0);
    for z in rows.iter_mut().take(3) {
        *z = c(0.0, 0.0);
    }
    let op = DenseOperator::from_rows(4, 3, rows).unwrap();
    let x: Vec<C> = linalg::complex_gaussian_vec(&mut rng, 3, 1.0);
    let b: Vec<f64> = op.forward(&x).iter().map(|z| z.norm()).collect();
    corpus.push(Instance::new(Arc::new(op), b, Some(x), "zero row").unwrap());

    // Hopeless undersampling m < n.
    corpus.push(make_gaussian_instance(&GaussianSpec::new(8, 4, 21), None).unwrap());

    // All-zero measurements.
    let op = DenseOperator::from_rows(3, 3, linalg::complex_gaussian_vec(&mut rng, 9, 1.0)).unwrap();
    corpus.push(Instance::new(Arc::new(op), vec![0.0; 3], None, "b = 0").unwrap());

    let opts = SolveOptions {
        max_iters: 20,
        ..SolveOptions::default()
    };
    for inst in &corpus {
        let init = unit_init(inst, 3);
        for alg in Algorithm::ALL {
            let result = alg.solve(inst, &init, &opts);
            match result {
                Ok(r) => {
                    assert!(
                        linalg::all_finite(&r.x_hat),
                        "{} produced non-finite output on {}",
                        alg.name(),
                        inst.label
                    );
                    assert!(r.trace.iterations <= opts.max_iters);
                }
                Err(e) => panic!("{} failed on {}: {e}", alg.name(), inst.label),
            }
        }
    }
}

#[test]
fn undersampled_gradient_family_terminates_cleanly() {
    // m = n/2: no recovery expected, but termination and finite output are.
    let inst = make_gaussian_instance::<f64>(&GaussianSpec::new(16, 8, 22), None).unwrap();
    let init = unit_init(&inst, 4);
    let opts = SolveOptions {
        max_iters: 50,
        ..SolveOptions::default()
    };
    let result =
        solve_gradient_family(&inst, FamilySpec::wirtinger_flow(), &init, &opts).unwrap();
    assert!(matches!(
        result.trace.status,
        TermStatus::MaxIters | TermStatus::Converged | TermStatus::Stalled
    ));
    assert!(linalg::all_finite(&result.x_hat));
}

#[test]
fn algorithm_names_round_trip() {
    for alg in Algorithm::ALL {
        assert_eq!(Algorithm::from_name(alg.name()), Some(alg));
    }
    assert_eq!(Algorithm::from_name("nosuch"), None);
    assert!(Algorithm::valid_names().contains("phasemax"));
}

#[test]
fn global_phase_equivariance_of_error_metric() {
    let n = 12;
    let m = 6 * n;
    let spec = GaussianSpec::new(n, m, 23);
    let base = make_gaussian_instance::<f64>(&spec, None).unwrap();
    let x1 = base.x_true.clone().unwrap();
    let rot = C::from_polar(1.0, 1.3);
    let x2: Vec<C> = x1.iter().map(|z| z * rot).collect();
    let inst1 = make_gaussian_instance::<f64>(&spec, Some(x1)).unwrap();
    let inst2 = make_gaussian_instance::<f64>(&spec, Some(x2)).unwrap();

    let opts = SolveOptions {
        max_iters: 2000,
        tol: 1e-12,
        seed: 5,
        ..SolveOptions::default()
    };
    for alg in Algorithm::ALL {
        let init1 = InitSpec::<f64>::default()
            .resolve(&inst1, &EigOptions::default())
            .unwrap();
        let init2 = InitSpec::<f64>::default()
            .resolve(&inst2, &EigOptions::default())
            .unwrap();
        let r1 = alg.solve(&inst1, &init1, &opts).unwrap();
        let r2 = alg.solve(&inst2, &init2, &opts).unwrap();
        let e1 = phase_aligned_error(inst1.x_true.as_ref().unwrap(), &r1.x_hat).unwrap();
        let e2 = phase_aligned_error(inst2.x_true.as_ref().unwrap(), &r2.x_hat).unwrap();
        assert!(
            (e1 - e2).abs() <= 1e-10,
            "{}: errors {e1} vs {e2} differ",
            alg.name()
        );
    }
}

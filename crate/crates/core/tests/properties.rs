//! Property tests for the crate-wide invariants.

use num_complex::Complex;
use proptest::prelude::*;

use phaserepo_core::initializers::{rescale_measurements, InitSpec, RescaleMode};
use phaserepo_core::linalg;
use phaserepo_core::metrics::phase_aligned_error;
use phaserepo_core::operators::{
    add_noise, make_gaussian_instance, DenseOperator, GaussianSpec, Instance, MeasurementOperator,
};

type C = Complex<f64>;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C>> {
    proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), len)
        .prop_map(|v| v.into_iter().map(|(re, im)| C::new(re, im)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // ⟨Ax, y⟩ = ⟨x, Aᴴy⟩ for arbitrary dense operators and vectors.
    #[test]
    fn adjoint_identity(
        m in 1usize..7,
        n in 1usize..7,
        seed in 0u64..1_000,
    ) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        let rows = linalg::complex_gaussian_vec::<f64, _>(&mut rng, m * n, 1.0);
        let op = DenseOperator::from_rows(m, n, rows).unwrap();
        let x = linalg::complex_gaussian_vec::<f64, _>(&mut rng, n, 1.0);
        let y = linalg::complex_gaussian_vec::<f64, _>(&mut rng, m, 1.0);
        let lhs = linalg::dot(&op.forward(&x), &y);
        let rhs = linalg::dot(&x, &op.adjoint(&y));
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    // Noise injection keeps magnitudes nonnegative and is seed-deterministic.
    #[test]
    fn noise_is_nonnegative_and_deterministic(
        b in proptest::collection::vec(0.0f64..100.0, 1..32),
        snr_db in -20.0f64..60.0,
        seed in 0u64..1_000,
    ) {
        let a = add_noise(&b, snr_db, seed).unwrap();
        let c = add_noise(&b, snr_db, seed).unwrap();
        prop_assert_eq!(&a, &c);
        prop_assert!(a.iter().all(|&v| v >= 0.0));
    }

    // ‖m·b/‖b‖‖ = m and ‖√m·b/‖b‖‖ = √m for any nonzero b.
    #[test]
    fn rescale_norm_identities(
        b in proptest::collection::vec(0.0f64..50.0, 1..40),
    ) {
        prop_assume!(b.iter().any(|&v| v > 0.0));
        let m = b.len() as f64;
        let norm_m = rescale_measurements(&b, RescaleMode::NormM).unwrap();
        let ums = rescale_measurements(&b, RescaleMode::UnitMeanSquare).unwrap();
        prop_assert!((linalg::real_norm(&norm_m) - m).abs() <= 1e-9 * m);
        prop_assert!((linalg::real_norm(&ums) - m.sqrt()).abs() <= 1e-9 * m.sqrt());
    }

    // The recovery metric quotients out a global phase on either argument.
    #[test]
    fn phase_error_is_phase_invariant(
        x_true in complex_vec(6),
        x_hat in complex_vec(6),
        phi in 0.0f64..std::f64::consts::TAU,
    ) {
        prop_assume!(linalg::norm(&x_true) > 1e-6);
        let base = phase_aligned_error(&x_true, &x_hat).unwrap();
        let rot = C::from_polar(1.0, phi);
        let rotated: Vec<C> = x_hat.iter().map(|z| z * rot).collect();
        let turned = phase_aligned_error(&x_true, &rotated).unwrap();
        prop_assert!((base - turned).abs() <= 1e-9 * (1.0 + base));
    }
}

// The whole pipeline is generic over the scalar; exercise the f32 path.
#[test]
fn f32_pipeline_runs_end_to_end() {
    use phaserepo_core::eigensolve::EigOptions;
    use phaserepo_core::gradient::SolveOptions;
    use phaserepo_core::solvers::Algorithm;

    let spec = GaussianSpec::new(16, 16 * 10, 7);
    let inst: Instance<f32> = make_gaussian_instance(&spec, None).unwrap();
    let eig_opts = EigOptions::<f32> {
        tol: 1e-5,
        ..EigOptions::default()
    };
    let init = InitSpec::<f32>::default().resolve(&inst, &eig_opts).unwrap();
    let opts = SolveOptions::<f32> {
        tol: 1e-5,
        max_iters: 300,
        ..SolveOptions::default()
    };
    let result = Algorithm::Af.solve(&inst, &init, &opts).unwrap();
    let err =
        phase_aligned_error(inst.x_true.as_ref().unwrap(), &result.x_hat).unwrap();
    assert!(err <= 1e-3, "f32 recovery error {err}");

    // The f64 instance from the same seed matches the narrowed f32 draw.
    let inst64: Instance<f64> = make_gaussian_instance(&spec, None).unwrap();
    let row32 = inst.op.row(0).unwrap();
    let row64 = inst64.op.row(0).unwrap();
    for (a, b) in row32.iter().zip(&row64) {
        assert_eq!(a.re, b.re as f32);
        assert_eq!(a.im, b.im as f32);
    }
}

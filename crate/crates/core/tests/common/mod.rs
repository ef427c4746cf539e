//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)]

use num_complex::Complex;
use phaserepo_core::eigensolve::EigOptions;
use phaserepo_core::initializers::{InitResult, InitSpec};
use phaserepo_core::linalg;
use phaserepo_core::operators::{make_gaussian_instance, DenseOperator, GaussianSpec, Instance};

pub type C = Complex<f64>;

/// Spectral-optimal initializer with a per-trial seed.
pub fn default_init(inst: &Instance<f64>, seed: u64) -> InitResult<f64> {
    InitSpec::<f64>::default()
        .resolve(inst, &EigOptions::default().with_seed(seed))
        .expect("initializer failed")
}

/// Runs `trial` for each seed in 0..trials across worker threads and counts
/// successes. Instances are seeded per trial, so workers share nothing.
pub fn monte_carlo<F>(trials: u64, threads: usize, trial: F) -> usize
where
    F: Fn(u64) -> bool + Sync,
{
    use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
    let next = AtomicU64::new(0);
    let hits = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1) {
            scope.spawn(|| loop {
                let seed = next.fetch_add(1, Ordering::SeqCst);
                if seed >= trials {
                    break;
                }
                if trial(seed) {
                    hits.fetch_add(1, Ordering::SeqCst);
                }
            });
        }
    });
    hits.into_inner()
}

pub fn worker_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(2)
}

pub fn gaussian_instance(n: usize, m: usize, seed: u64) -> Instance<f64> {
    make_gaussian_instance(&GaussianSpec::new(n, m, seed), None).unwrap()
}

/// Dense operator with prescribed singular values: A = U·diag(s)·Vᴴ built
/// from Gram-Schmidt-orthonormalized Gaussian blocks. Rows are measurement
/// vectors under the crate convention.
pub fn conditioned_instance(
    n: usize,
    m: usize,
    condition: f64,
    seed: u64,
) -> (Instance<f64>, Vec<C>) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);

    let orthonormal_columns = |rows: usize, cols: usize, rng: &mut rand_chacha::ChaCha20Rng| {
        let mut basis: Vec<Vec<C>> = Vec::with_capacity(cols);
        while basis.len() < cols {
            let mut v = linalg::complex_gaussian_vec::<f64, _>(rng, rows, 1.0);
            for b in &basis {
                let c = linalg::dot(b, &v);
                linalg::axpy(-c, b, &mut v);
            }
            if linalg::normalize(&mut v) > 1e-8 {
                basis.push(v);
            }
        }
        basis
    };

    let u = orthonormal_columns(m, n, &mut rng); // m×n partial isometry columns
    let v = orthonormal_columns(n, n, &mut rng); // n×n unitary columns

    // Singular values linearly spaced from 1 down to 1/condition.
    let svals: Vec<f64> = (0..n)
        .map(|j| {
            if n == 1 {
                1.0
            } else {
                let t = j as f64 / (n - 1) as f64;
                1.0 + t * (1.0 / condition - 1.0)
            }
        })
        .collect();

    // A[i][j] = Σ_k U[i][k]·s_k·conj(V[j][k]); measurement vector a_i has
    // entries conj(A[i][j]).
    let mut rows = vec![C::new(0.0, 0.0); m * n];
    for k in 0..n {
        for i in 0..m {
            let uis = u[k][i] * C::new(svals[k], 0.0);
            for j in 0..n {
                rows[i * n + j] += (uis * v[k][j].conj()).conj();
            }
        }
    }
    let op = DenseOperator::from_rows(m, n, rows).unwrap();

    let mut x_rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
    let x_true = linalg::random_unit_vector::<f64, _>(&mut x_rng, n);
    use phaserepo_core::operators::MeasurementOperator;
    let b: Vec<f64> = op.forward(&x_true).iter().map(|z| z.norm()).collect();
    let inst = Instance::new(
        std::sync::Arc::new(op),
        b,
        Some(x_true.clone()),
        format!("conditioned(k={condition})"),
    )
    .unwrap();
    (inst, x_true)
}

//! Randomized Kaczmarz for phase retrieval: cyclic magnitude projections one
//! row at a time.

use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::gradient::{SolveOptions, TermStatus, Trace, TraceRecord};
use crate::initializers::InitResult;
use crate::linalg;
use crate::operators::Instance;
use crate::scalar::Real;

use super::{check_init_dimension, SolveMeta, SolveResult};

/// One iteration is a sweep of m randomized row updates
/// x ← x + ((bᵢ·phase(⟨aᵢ, x⟩) − ⟨aᵢ, x⟩)/‖aᵢ‖²)·aᵢ.
/// After the update the row's measurement is matched exactly.
pub fn solve_kaczmarz<T: Real>(
    inst: &Instance<T>,
    init: &InitResult<T>,
    opts: &SolveOptions<T>,
) -> Result<SolveResult<T>> {
    check_init_dimension(inst, init)?;
    if !inst.op.has_rows() {
        return Err(Error::InvalidArgument(
            "kaczmarz requires an operator with row access".into(),
        ));
    }
    let start = Instant::now();
    let m = inst.m();

    // Materialize rows once; per-update row access would dominate otherwise.
    let rows: Vec<Vec<Complex<T>>> = (0..m)
        .map(|i| inst.op.row(i).expect("row access checked above"))
        .collect();
    let norms_sq: Vec<T> = rows.iter().map(|r| linalg::norm_sq(r)).collect();
    let zero_rows = norms_sq.iter().filter(|&&v| !(v > T::zero())).count();

    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut x = init.x0.clone();
    let mut records = Vec::new();
    let mut status = TermStatus::MaxIters;
    let mut iterations = 0usize;
    let mut skipped_total = 0usize;
    let mut last_objective = T::zero();
    let mut last_change = T::zero();

    for sweep in 1..=opts.max_iters {
        if let Some(budget) = opts.time_budget {
            if start.elapsed().as_secs_f64() >= budget {
                break;
            }
        }
        iterations = sweep;
        let x_prev = x.clone();
        let mut skipped = 0usize;

        for _ in 0..m {
            let i = rng.random_range(0..m);
            if !(norms_sq[i] > T::zero()) {
                skipped += 1;
                continue;
            }
            let c = linalg::dot(&rows[i], &x);
            let desired = linalg::phase_or_one(c) * Complex::new(inst.b[i], T::zero());
            let coeff = (desired - c) / Complex::new(norms_sq[i], T::zero());
            linalg::axpy(coeff, &rows[i], &mut x);
        }
        skipped_total += skipped;

        let change = linalg::norm(&linalg::sub(&x, &x_prev)) / linalg::norm(&x_prev).max(T::one());
        last_change = change;
        let fx = inst.op.forward(&x);
        last_objective = T::of(0.5)
            * fx.iter()
                .zip(&inst.b)
                .map(|(c, &bi)| {
                    let r = c.norm() - bi;
                    r * r
                })
                .sum::<T>();

        if opts.record_trace {
            records.push(TraceRecord {
                iteration: sweep,
                objective: last_objective,
                grad_norm: change,
                stepsize: T::one(),
                backtracks: skipped,
                elapsed_s: start.elapsed().as_secs_f64(),
            });
        }

        if change <= opts.tol {
            status = TermStatus::Converged;
            break;
        }
    }

    let mut meta = SolveMeta::new("kaczmarz", opts, init);
    if zero_rows > 0 {
        meta.options.push_str(&format!(
            " zero_rows={zero_rows} skipped_updates={skipped_total}"
        ));
    }

    Ok(SolveResult {
        x_hat: x,
        trace: Trace {
            records,
            status,
            iterations,
            final_objective: last_objective,
            final_grad_norm: last_change,
        },
        meta,
    })
}

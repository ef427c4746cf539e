//! Alternating minimization: Gerchberg-Saxton and its relaxed (Fienup)
//! variant for generic measurement operators.
//!
//! Each iteration estimates the measurement phases from the current iterate
//! and solves the linear system A·x = b ⊙ phases by warm-started conjugate
//! gradient on the normal equations.

use std::time::Instant;

use num_complex::Complex;

use crate::error::Result;
use crate::gradient::{SolveOptions, TermStatus, Trace, TraceRecord};
use crate::initializers::InitResult;
use crate::linalg;
use crate::operators::{Instance, MeasurementOperator};
use crate::scalar::Real;

use super::{check_init_dimension, SolveMeta, SolveResult};

pub(crate) const CG_TOL: f64 = 1e-10;
pub(crate) const CG_MAX_ITERS: usize = 200;

/// Conjugate gradient on the normal equations AᴴA·x = Aᴴ·target, warm-started
/// from `x0`. Returns (solution, iterations, relative residual).
pub(crate) fn cg_normal_equations<T: Real>(
    op: &dyn MeasurementOperator<T>,
    target: &[Complex<T>],
    x0: &[Complex<T>],
    tol: T,
    max_iters: usize,
) -> (Vec<Complex<T>>, usize, T) {
    let rhs = op.adjoint(target);
    let rhs_norm = linalg::norm(&rhs).max(T::of(1e-300));
    let mut x = x0.to_vec();

    let normal = |v: &[Complex<T>]| op.adjoint(&op.forward(v));

    let mut r = rhs.clone();
    let ax = normal(&x);
    for (ri, ai) in r.iter_mut().zip(&ax) {
        *ri -= ai;
    }
    let mut p = r.clone();
    let mut rs = linalg::norm_sq(&r);

    let mut iters = 0;
    while iters < max_iters && rs.sqrt() > tol * rhs_norm {
        let ap = normal(&p);
        let p_ap = linalg::dot(&p, &ap).re;
        if !(p_ap > T::zero()) {
            break;
        }
        let alpha = rs / p_ap;
        linalg::axpy(Complex::new(alpha, T::zero()), &p, &mut x);
        linalg::axpy(Complex::new(-alpha, T::zero()), &ap, &mut r);
        let rs_new = linalg::norm_sq(&r);
        let beta = rs_new / rs;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + Complex::new(beta, T::zero()) * *pi;
        }
        rs = rs_new;
        iters += 1;
    }
    (x, iters, rs.sqrt() / rhs_norm)
}

/// Gerchberg-Saxton: Fienup with relaxation 1.
pub fn solve_gerchberg_saxton<T: Real>(
    inst: &Instance<T>,
    init: &InitResult<T>,
    opts: &SolveOptions<T>,
) -> Result<SolveResult<T>> {
    let mut result = relaxed_alternating(inst, init, opts, T::one())?;
    result.meta.algorithm = "gs".into();
    Ok(result)
}

/// Fienup: GS phase update with a relaxed signal update
/// x ← x + beta·(x_LS − x). beta = 1 reproduces GS exactly.
pub fn solve_fienup<T: Real>(
    inst: &Instance<T>,
    init: &InitResult<T>,
    opts: &SolveOptions<T>,
    beta: T,
) -> Result<SolveResult<T>> {
    use crate::error::Error;
    if !(beta >= T::zero() && beta <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "fienup relaxation beta must lie in [0, 1]; got {beta}"
        )));
    }
    relaxed_alternating(inst, init, opts, beta)
}

fn relaxed_alternating<T: Real>(
    inst: &Instance<T>,
    init: &InitResult<T>,
    opts: &SolveOptions<T>,
    beta: T,
) -> Result<SolveResult<T>> {
    check_init_dimension(inst, init)?;
    let start = Instant::now();
    let op = inst.op.as_ref();
    let cg_tol = T::of(CG_TOL);

    let mut x = init.x0.clone();
    let mut records = Vec::new();
    let mut status = TermStatus::MaxIters;
    let mut iterations = 0usize;
    let mut subsolver_warnings = 0usize;
    let mut last_objective = T::zero();
    let mut last_fp_res = T::zero();

    for k in 1..=opts.max_iters {
        if let Some(budget) = opts.time_budget {
            if start.elapsed().as_secs_f64() >= budget {
                break;
            }
        }
        iterations = k;

        let fx = op.forward(&x);
        last_objective = amplitude_objective(&fx, &inst.b);
        // phase(0) := 1 so zero measurements still get a well-defined target.
        let target: Vec<Complex<T>> = fx
            .iter()
            .zip(&inst.b)
            .map(|(c, &bi)| linalg::phase_or_one(*c) * Complex::new(bi, T::zero()))
            .collect();

        let (x_ls, cg_iters, cg_res) = cg_normal_equations(op, &target, &x, cg_tol, CG_MAX_ITERS);
        if cg_res > cg_tol {
            subsolver_warnings += 1;
        }

        let step = linalg::sub(&x_ls, &x);
        let fp_res = linalg::norm(&step) / linalg::norm(&x).max(T::one());
        last_fp_res = fp_res;
        linalg::axpy(Complex::new(beta, T::zero()), &step, &mut x);

        if opts.record_trace {
            records.push(TraceRecord {
                iteration: k,
                objective: last_objective,
                grad_norm: fp_res,
                stepsize: beta,
                backtracks: cg_iters,
                elapsed_s: start.elapsed().as_secs_f64(),
            });
        }

        // Fixed-point residual of the unrelaxed map; independent of beta, so
        // a frozen iterate (beta = 0) never reports convergence.
        if fp_res <= opts.tol {
            status = TermStatus::Converged;
            break;
        }
    }

    let mut meta = SolveMeta::new("fienup", opts, init);
    meta.options.push_str(&format!(" relaxation={beta}"));
    if subsolver_warnings > 0 {
        meta.options
            .push_str(&format!(" cg_warnings={subsolver_warnings}"));
    }

    Ok(SolveResult {
        x_hat: x,
        trace: Trace {
            records,
            status,
            iterations,
            final_objective: last_objective,
            final_grad_norm: last_fp_res,
        },
        meta,
    })
}

fn amplitude_objective<T: Real>(fx: &[Complex<T>], b: &[T]) -> T {
    T::of(0.5)
        * fx.iter()
            .zip(b)
            .map(|(c, &bi)| {
                let r = c.norm() - bi;
                r * r
            })
            .sum::<T>()
}

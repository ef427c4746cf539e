//! PhaseMax as a penalized unconstrained program.
//!
//! The convex formulation maximizes Re⟨x0, x⟩ subject to |aᵢᴴx| ≤ bᵢ. Here
//! the constraints enter through a squared-hinge penalty whose multiplier
//! grows over a few outer rounds:
//!     minimize −Re⟨x0, x⟩ + λ·Σᵢ max(|aᵢᴴx| − bᵢ, 0)²
//! starting at λ = 1/‖b‖, reusing the general gradient engine per round.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::gradient::{minimize, Objective, SolveOptions, Trace};
use crate::initializers::InitResult;
use crate::linalg;
use crate::operators::Instance;
use crate::scalar::Real;

use super::{check_init_dimension, SolveMeta, SolveResult};

pub(crate) const PHASEMAX_ROUNDS: usize = 3;

struct PenalizedObjective<'a, T: Real> {
    inst: &'a Instance<T>,
    anchor: &'a [Complex<T>],
    lambda: T,
}

impl<T: Real> Objective<T> for PenalizedObjective<'_, T> {
    fn value(&self, x: &[Complex<T>]) -> T {
        let fx = self.inst.op.forward(x);
        let penalty: T = fx
            .iter()
            .zip(&self.inst.b)
            .map(|(c, &bi)| {
                let v = (c.norm() - bi).max(T::zero());
                v * v
            })
            .sum();
        -linalg::dot(self.anchor, x).re + self.lambda * penalty
    }

    fn gradient(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let fx = self.inst.op.forward(x);
        let two_lambda = T::of(2.0) * self.lambda;
        let weighted: Vec<Complex<T>> = fx
            .iter()
            .zip(&self.inst.b)
            .map(|(c, &bi)| {
                let v = (c.norm() - bi).max(T::zero());
                let ph = linalg::phase_or_zero(*c);
                let s = two_lambda * v;
                Complex::new(ph.re * s, ph.im * s)
            })
            .collect();
        let mut g = self.inst.op.adjoint(&weighted);
        for (gi, ai) in g.iter_mut().zip(self.anchor) {
            *gi -= ai;
        }
        g
    }
}

/// Maximum constraint violation max_i (|aᵢᴴx| − bᵢ) of an iterate.
pub fn constraint_violation<T: Real>(inst: &Instance<T>, x: &[Complex<T>]) -> T {
    inst.op
        .forward(x)
        .iter()
        .zip(&inst.b)
        .map(|(c, &bi)| c.norm() - bi)
        .fold(T::neg_infinity(), |a, b| a.max(b))
}

pub fn solve_phasemax<T: Real>(
    inst: &Instance<T>,
    init: &InitResult<T>,
    opts: &SolveOptions<T>,
    penalty_growth: T,
) -> Result<SolveResult<T>> {
    check_init_dimension(inst, init)?;
    if !(penalty_growth >= T::one()) {
        return Err(Error::InvalidArgument(
            "penalty_growth must be >= 1".into(),
        ));
    }
    let anchor = &init.x0;
    if !(linalg::norm(anchor) > T::zero()) {
        return Err(Error::InvalidArgument(
            "phasemax requires a nonzero anchor initializer".into(),
        ));
    }

    let b_norm = linalg::real_norm(&inst.b);
    let mut lambda = if b_norm > T::zero() {
        T::one() / b_norm
    } else {
        T::one()
    };

    // Round budgets sum to max_iters (earlier rounds get the remainder).
    let round_budget = |round: usize| -> usize {
        ((opts.max_iters + (PHASEMAX_ROUNDS - 1 - round)) / PHASEMAX_ROUNDS).max(1)
    };
    let mut x = anchor.clone();
    let mut records = Vec::new();
    let mut iterations = 0usize;
    let mut status = crate::gradient::TermStatus::MaxIters;
    let mut final_objective = T::zero();
    let mut final_grad_norm = T::zero();

    for round in 0..PHASEMAX_ROUNDS {
        let mut obj = PenalizedObjective {
            inst,
            anchor,
            lambda,
        };
        let round_opts = SolveOptions {
            max_iters: round_budget(round),
            ..opts.clone()
        };
        let (x_round, trace) = minimize(&mut obj, &x, &round_opts)?;
        x = x_round;
        let offset = iterations;
        iterations += trace.iterations;
        for mut r in trace.records {
            if r.iteration == 0 && offset > 0 {
                continue;
            }
            r.iteration += offset;
            records.push(r);
        }
        status = trace.status;
        final_objective = trace.final_objective;
        final_grad_norm = trace.final_grad_norm;
        lambda = lambda * penalty_growth;
    }

    let mut meta = SolveMeta::new("phasemax", opts, init);
    meta.options
        .push_str(&format!(" rounds={PHASEMAX_ROUNDS} growth={penalty_growth}"));

    Ok(SolveResult {
        x_hat: x,
        trace: Trace {
            records,
            status,
            iterations,
            final_objective,
            final_grad_norm,
        },
        meta,
    })
}

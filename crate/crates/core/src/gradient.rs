//! General first-order minimizer over complex variables with Barzilai-Borwein
//! stepsizes and a windowed non-monotone backtracking line search.
//!
//! Gradients use the Wirtinger convention ∇f = 2·∂f/∂conj(x), so a descent
//! step is x − τ·∇f and the gradient agrees with central finite differences
//! taken over the real and imaginary parts independently.

use std::collections::VecDeque;
use std::time::Instant;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// A differentiable objective over ℂⁿ.
pub trait Objective<T: Real> {
    fn value(&self, x: &[Complex<T>]) -> T;

    fn gradient(&self, x: &[Complex<T>]) -> Vec<Complex<T>>;

    /// Called once at the start of each outer iteration, before the gradient
    /// step. Returns true when the objective itself changed (for example,
    /// iterate-dependent measurement weights were refreshed), which resets
    /// the line-search window.
    fn begin_iteration(&mut self, _iteration: usize, _x: &[Complex<T>]) -> bool {
        false
    }
}

/// Objective built from plain closures; handy for tests and simple problems.
pub struct FnObjective<V, G> {
    pub value_fn: V,
    pub gradient_fn: G,
}

impl<T, V, G> Objective<T> for FnObjective<V, G>
where
    T: Real,
    V: Fn(&[Complex<T>]) -> T,
    G: Fn(&[Complex<T>]) -> Vec<Complex<T>>,
{
    fn value(&self, x: &[Complex<T>]) -> T {
        (self.value_fn)(x)
    }

    fn gradient(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (self.gradient_fn)(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepsizeRule {
    /// Barzilai-Borwein with non-monotone backtracking (the default).
    BarzilaiBorwein,
    /// Constant stepsize τ = tau0 with no line search; the "strict" rule.
    Fixed,
}

#[derive(Clone, Debug)]
pub struct SolveOptions<T> {
    /// Stop when ‖∇f‖ / max(‖x‖, 1) ≤ tol.
    pub tol: T,
    pub max_iters: usize,
    /// Line-search window w: accept f_new < max of the last w values.
    pub window_w: usize,
    /// Initial stepsize; `None` uses a scale-free one-step estimate.
    pub tau0: Option<T>,
    pub backtrack_beta: T,
    pub max_backtracks: usize,
    pub record_trace: bool,
    pub stepsize_rule: StepsizeRule,
    /// Seed for solvers with internal randomness (e.g. row sampling).
    pub seed: u64,
    /// Wall-clock budget in seconds, checked between iterations.
    pub time_budget: Option<f64>,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::of(1e-7),
            max_iters: 1000,
            window_w: 10,
            tau0: None,
            backtrack_beta: T::of(0.5),
            max_backtracks: 30,
            record_trace: true,
            stepsize_rule: StepsizeRule::BarzilaiBorwein,
            seed: 0,
            time_budget: None,
        }
    }
}

impl<T: Real> SolveOptions<T> {
    fn validate(&self) -> Result<()> {
        if self.window_w < 1 {
            return Err(Error::InvalidArgument("window_w must be >= 1".into()));
        }
        if !(self.backtrack_beta > T::zero() && self.backtrack_beta < T::one()) {
            return Err(Error::InvalidArgument(
                "backtrack_beta must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermStatus {
    Converged,
    MaxIters,
    /// The line search exhausted its backtracks on the final iteration; the
    /// best candidate seen was taken.
    Stalled,
}

impl TermStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TermStatus::Converged => "converged",
            TermStatus::MaxIters => "max_iters",
            TermStatus::Stalled => "stalled",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TraceRecord<T> {
    pub iteration: usize,
    pub objective: T,
    pub grad_norm: T,
    pub stepsize: T,
    pub backtracks: usize,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug)]
pub struct Trace<T> {
    pub records: Vec<TraceRecord<T>>,
    pub status: TermStatus,
    pub iterations: usize,
    pub final_objective: T,
    pub final_grad_norm: T,
}

/// Barzilai-Borwein stepsize τ = Re⟨dx, dx⟩ / Re⟨dx, dg⟩.
///
/// Returns `None` when the curvature estimate Re⟨dx, dg⟩ is not positive;
/// callers fall back to the previous stepsize.
pub fn bb_stepsize<T: Real>(dx: &[Complex<T>], dg: &[Complex<T>]) -> Option<T> {
    let num = linalg::norm_sq(dx);
    let den = linalg::dot(dx, dg).re;
    if den > T::zero() {
        Some(num / den)
    } else {
        None
    }
}

/// Windowed acceptance: true iff f_new < max(history) − ε_abs with
/// ε_abs = 1e−12·max(1, |max(history)|) guarding floating-point stalls.
pub fn nonmonotone_accept<T: Real>(f_new: T, history: &[T]) -> bool {
    assert!(!history.is_empty(), "nonmonotone_accept: empty history");
    let max = history
        .iter()
        .copied()
        .fold(T::neg_infinity(), |a, b| a.max(b));
    let eps = T::of(1e-12) * T::one().max(max.abs());
    f_new < max - eps
}

/// Gradient descent with BB stepsizes and non-monotone backtracking.
///
/// Iterates x ← x − τ∇f(x) until the gradient criterion or the iteration
/// budget is reached. Non-finite objective or gradient values abort with a
/// numeric error naming the iteration.
pub fn minimize<T: Real>(
    obj: &mut dyn Objective<T>,
    x0: &[Complex<T>],
    opts: &SolveOptions<T>,
) -> Result<(Vec<Complex<T>>, Trace<T>)> {
    opts.validate()?;
    let start = Instant::now();

    let mut x = x0.to_vec();
    let mut f = obj.value(&x);
    if !f.is_finite() {
        return Err(Error::Numeric {
            iteration: 0,
            what: "objective is not finite at the starting point".into(),
        });
    }
    let mut g = obj.gradient(&x);
    if !linalg::all_finite(&g) {
        return Err(Error::Numeric {
            iteration: 0,
            what: "gradient is not finite at the starting point".into(),
        });
    }
    let mut grad_norm = linalg::norm(&g);

    let mut records = Vec::new();
    let push_record = |records: &mut Vec<TraceRecord<T>>,
                           iteration: usize,
                           objective: T,
                           grad_norm: T,
                           stepsize: T,
                           backtracks: usize,
                           elapsed: f64| {
        if opts.record_trace {
            records.push(TraceRecord {
                iteration,
                objective,
                grad_norm,
                stepsize,
                backtracks,
                elapsed_s: elapsed,
            });
        }
    };
    push_record(
        &mut records,
        0,
        f,
        grad_norm,
        T::zero(),
        0,
        start.elapsed().as_secs_f64(),
    );

    let mut history: VecDeque<T> = VecDeque::with_capacity(opts.window_w);
    history.push_back(f);

    let scale = |x: &[Complex<T>]| linalg::norm(x).max(T::one());
    let converged = |gn: T, x: &[Complex<T>]| gn <= opts.tol * scale(x);

    let mut tau_prev = opts.tau0.unwrap_or_else(|| {
        if grad_norm > T::zero() {
            T::of(10.0) * scale(&x) / grad_norm
        } else {
            T::one()
        }
    });

    let mut status = TermStatus::MaxIters;
    let mut iterations = 0usize;
    let mut dx: Vec<Complex<T>> = Vec::new();
    let mut dg: Vec<Complex<T>> = Vec::new();

    if converged(grad_norm, &x) {
        status = TermStatus::Converged;
    } else {
        for k in 1..=opts.max_iters {
            if let Some(budget) = opts.time_budget {
                if start.elapsed().as_secs_f64() >= budget {
                    status = TermStatus::MaxIters;
                    break;
                }
            }
            iterations = k;

            if obj.begin_iteration(k, &x) {
                // The objective changed under our feet: refresh the state and
                // restart the window so acceptances compare like with like.
                f = obj.value(&x);
                g = obj.gradient(&x);
                if !f.is_finite() || !linalg::all_finite(&g) {
                    return Err(Error::Numeric {
                        iteration: k,
                        what: "objective or gradient became non-finite after reweighting".into(),
                    });
                }
                history.clear();
                history.push_back(f);
            }

            let tau = if k == 1 || opts.stepsize_rule == StepsizeRule::Fixed {
                tau_prev
            } else {
                bb_stepsize(&dx, &dg).unwrap_or(tau_prev)
            };

            // Backtracking line search (skipped entirely for the fixed rule).
            let hist_slice: Vec<T> = history.iter().copied().collect();
            let mut t = tau;
            let mut accepted: Option<(Vec<Complex<T>>, T, T)> = None;
            let mut best: Option<(Vec<Complex<T>>, T, T)> = None;
            let mut backtracks = 0usize;
            loop {
                let mut cand = x.clone();
                linalg::axpy(Complex::new(-t, T::zero()), &g, &mut cand);
                let f_cand = obj.value(&cand);

                if opts.stepsize_rule == StepsizeRule::Fixed {
                    if !f_cand.is_finite() {
                        return Err(Error::Numeric {
                            iteration: k,
                            what: "objective is not finite under the fixed stepsize".into(),
                        });
                    }
                    accepted = Some((cand, f_cand, t));
                    break;
                }

                if f_cand.is_finite() && nonmonotone_accept(f_cand, &hist_slice) {
                    accepted = Some((cand, f_cand, t));
                    break;
                }
                if f_cand.is_finite() {
                    let better = match &best {
                        Some((_, fb, _)) => f_cand < *fb,
                        None => true,
                    };
                    if better {
                        best = Some((cand, f_cand, t));
                    }
                }
                if backtracks >= opts.max_backtracks {
                    break;
                }
                backtracks += 1;
                t = t * opts.backtrack_beta;
            }

            let mut stalled_now = false;
            let (x_new, f_new, t_used) = match accepted {
                Some(a) => a,
                None => match best {
                    Some(b) => {
                        stalled_now = true;
                        b
                    }
                    None => {
                        return Err(Error::Numeric {
                            iteration: k,
                            what: "all line-search candidates were non-finite".into(),
                        });
                    }
                },
            };

            let g_new = obj.gradient(&x_new);
            if !linalg::all_finite(&g_new) {
                return Err(Error::Numeric {
                    iteration: k,
                    what: "gradient is not finite".into(),
                });
            }

            dx = linalg::sub(&x_new, &x);
            dg = linalg::sub(&g_new, &g);
            x = x_new;
            g = g_new;
            f = f_new;
            grad_norm = linalg::norm(&g);
            tau_prev = t_used;

            if history.len() == opts.window_w {
                history.pop_front();
            }
            history.push_back(f);

            push_record(
                &mut records,
                k,
                f,
                grad_norm,
                t_used,
                backtracks,
                start.elapsed().as_secs_f64(),
            );

            if converged(grad_norm, &x) {
                status = TermStatus::Converged;
                break;
            }
            if stalled_now {
                status = TermStatus::Stalled;
            } else {
                status = TermStatus::MaxIters;
            }
        }
    }

    let trace = Trace {
        records,
        status,
        iterations,
        final_objective: f,
        final_grad_norm: grad_norm,
    };
    Ok((x, trace))
}

/// Central finite-difference check of `obj.gradient` against `obj.value`,
/// treating real and imaginary parts as independent real coordinates.
/// Returns the worst relative error over the given points.
pub fn gradient_check<T: Real, O: Objective<T>>(obj: &O, points: &[Vec<Complex<T>>], h: T) -> T {
    let mut worst = T::zero();
    for x in points {
        let g = obj.gradient(x);
        let mut fd = vec![Complex::new(T::zero(), T::zero()); x.len()];
        let mut xp = x.clone();
        for j in 0..x.len() {
            let orig = xp[j];
            xp[j] = Complex::new(orig.re + h, orig.im);
            let fp = obj.value(&xp);
            xp[j] = Complex::new(orig.re - h, orig.im);
            let fm = obj.value(&xp);
            let dre = (fp - fm) / (h + h);
            xp[j] = Complex::new(orig.re, orig.im + h);
            let fpi = obj.value(&xp);
            xp[j] = Complex::new(orig.re, orig.im - h);
            let fmi = obj.value(&xp);
            let dim = (fpi - fmi) / (h + h);
            xp[j] = orig;
            fd[j] = Complex::new(dre, dim);
        }
        let diff = linalg::sub(&g, &fd);
        let rel = linalg::norm(&diff) / linalg::norm(&fd).max(T::of(1e-12));
        worst = worst.max(rel);
    }
    worst
}

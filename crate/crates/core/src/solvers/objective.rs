//! The weighted least-squares objective behind the gradient-flow family.
//!
//! The squared form F(x) = ½·Σᵢ wᵢ·(|aᵢᴴx|^p − bᵢ^p)² is minimized rather
//! than the norm itself: same minimizers, smooth gradient for p = 2.

use num_complex::Complex;

use crate::gradient::Objective;
use crate::linalg;
use crate::operators::Instance;
use crate::scalar::Real;

use super::{Exponent, FamilySpec, WeightRule};

pub struct FamilyObjective<'a, T: Real> {
    inst: &'a Instance<T>,
    spec: FamilySpec<T>,
    weights: Vec<T>,
}

/// Builds the objective with weights evaluated at `x`.
pub fn objective_for<'a, T: Real>(
    inst: &'a Instance<T>,
    spec: FamilySpec<T>,
    x: &[Complex<T>],
) -> FamilyObjective<'a, T> {
    let weights = match spec.weight_rule {
        WeightRule::Uniform => vec![T::one(); inst.m()],
        _ => {
            let fx = inst.op.forward(x);
            compute_weights(&spec.weight_rule, &inst.b, &fx)
        }
    };
    FamilyObjective {
        inst,
        spec,
        weights,
    }
}

impl<T: Real> FamilyObjective<'_, T> {
    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

/// Per-measurement weights from the current iterate's measurements.
pub(crate) fn compute_weights<T: Real>(
    rule: &WeightRule<T>,
    b: &[T],
    fx: &[Complex<T>],
) -> Vec<T> {
    match *rule {
        WeightRule::Uniform => vec![T::one(); b.len()],
        WeightRule::Truncated {
            alpha_lower,
            alpha_upper,
        } => {
            // Off values (both infinite) collapse to uniform exactly.
            if alpha_lower == T::infinity() && alpha_upper == T::infinity() {
                return vec![T::one(); b.len()];
            }
            let lower = T::one() / alpha_upper;
            fx.iter()
                .zip(b)
                .map(|(c, &bi)| {
                    let mag = c.norm();
                    if mag > T::zero() {
                        let ratio = bi / mag;
                        if ratio >= lower && ratio <= alpha_lower {
                            T::one()
                        } else {
                            T::zero()
                        }
                    } else if bi == T::zero() {
                        T::one()
                    } else {
                        T::zero()
                    }
                })
                .collect()
        }
        WeightRule::Reweighted { eta } => {
            if eta == T::zero() {
                return vec![T::one(); b.len()];
            }
            fx.iter()
                .zip(b)
                .map(|(c, &bi)| {
                    let mag = c.norm();
                    let denom = mag + eta * bi;
                    if denom > T::zero() {
                        mag / denom
                    } else {
                        T::one()
                    }
                })
                .collect()
        }
    }
}

impl<T: Real> Objective<T> for FamilyObjective<'_, T> {
    fn value(&self, x: &[Complex<T>]) -> T {
        let fx = self.inst.op.forward(x);
        let half = T::of(0.5);
        match self.spec.exponent {
            Exponent::Two => {
                half * fx
                    .iter()
                    .zip(&self.inst.b)
                    .zip(&self.weights)
                    .map(|((c, &bi), &w)| {
                        let r = c.norm_sqr() - bi * bi;
                        w * r * r
                    })
                    .sum::<T>()
            }
            Exponent::One => {
                half * fx
                    .iter()
                    .zip(&self.inst.b)
                    .zip(&self.weights)
                    .map(|((c, &bi), &w)| {
                        let r = c.norm() - bi;
                        w * r * r
                    })
                    .sum::<T>()
            }
        }
    }

    fn gradient(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let fx = self.inst.op.forward(x);
        let residual: Vec<Complex<T>> = match self.spec.exponent {
            // ∇F = 2·Aᴴ(w ⊙ (|Ax|² − b²) ⊙ Ax)
            Exponent::Two => fx
                .iter()
                .zip(&self.inst.b)
                .zip(&self.weights)
                .map(|((c, &bi), &w)| {
                    let s = T::of(2.0) * w * (c.norm_sqr() - bi * bi);
                    Complex::new(c.re * s, c.im * s)
                })
                .collect(),
            // ∇F = Aᴴ(w ⊙ (|Ax| − b) ⊙ phase(Ax)), phase(0) := 0
            Exponent::One => fx
                .iter()
                .zip(&self.inst.b)
                .zip(&self.weights)
                .map(|((c, &bi), &w)| {
                    let s = w * (c.norm() - bi);
                    let ph = linalg::phase_or_zero(*c);
                    Complex::new(ph.re * s, ph.im * s)
                })
                .collect(),
        };
        self.inst.op.adjoint(&residual)
    }

    fn begin_iteration(&mut self, _iteration: usize, x: &[Complex<T>]) -> bool {
        match self.spec.weight_rule {
            WeightRule::Uniform => false,
            _ => {
                let fx = self.inst.op.forward(x);
                self.weights = compute_weights(&self.spec.weight_rule, &self.inst.b, &fx);
                true
            }
        }
    }
}

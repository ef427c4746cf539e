//! Recovery error metrics.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::Instance;
use crate::scalar::Real;

/// ‖|Ax̂| − b‖ / ‖b‖: the ground-truth-free measurement-space error.
pub fn rel_measurement_error<T: Real>(inst: &Instance<T>, x_hat: &[Complex<T>]) -> Result<T> {
    let b_norm = linalg::real_norm(&inst.b);
    if !(b_norm > T::zero()) {
        return Err(Error::DegenerateInput(
            "relative measurement error undefined for b = 0".into(),
        ));
    }
    let mags = inst.op.forward(x_hat);
    let num: T = mags
        .iter()
        .zip(&inst.b)
        .map(|(z, &b)| {
            let d = z.norm() - b;
            d * d
        })
        .sum::<T>()
        .sqrt();
    Ok(num / b_norm)
}

/// min over φ of ‖x_true − e^{iφ}·x_hat‖ / ‖x_true‖, in closed form with
/// φ = arg⟨x_hat, x_true⟩. Quotients out the global phase ambiguity.
pub fn phase_aligned_error<T: Real>(x_true: &[Complex<T>], x_hat: &[Complex<T>]) -> Result<T> {
    if x_true.len() != x_hat.len() {
        return Err(Error::DimensionMismatch {
            context: "phase_aligned_error",
            expected: x_true.len(),
            actual: x_hat.len(),
        });
    }
    let t_norm = linalg::norm(x_true);
    if !(t_norm > T::zero()) {
        return Err(Error::DegenerateInput(
            "phase-aligned error undefined for x_true = 0".into(),
        ));
    }
    let inner = linalg::dot(x_hat, x_true);
    let rot = linalg::phase_or_one(inner);
    let mut diff = x_true.to_vec();
    for (d, h) in diff.iter_mut().zip(x_hat) {
        *d -= rot * h;
    }
    Ok(linalg::norm(&diff) / t_norm)
}

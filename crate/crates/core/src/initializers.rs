//! Initializers for non-convex phase retrieval solvers.
//!
//! Three practical departures from the textbook spectral method are built in:
//! a restarted Krylov eigensolver instead of the power method, measurement
//! rescaling before pre-processing, and a least-squares calibration of the
//! initializer length.

use std::sync::Arc;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::eigensolve::{largest_eigenpair, smallest_eigenpair, EigOptions, HermitianOp};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{Instance, MeasurementOperator};
use crate::scalar::Real;

/// How measurements are rescaled before entering the pre-processing function.
///
/// `NormM` scales to m·b/‖b‖, giving squared entries of mean m, which
/// starves the optimal pre-processor of contrast at practical oversampling.
/// `UnitMeanSquare` scales to √m·b/‖b‖, giving squared entries of mean
/// exactly 1 — the normalized measurement model the pre-processors are
/// calibrated for, and the default.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RescaleMode {
    Off,
    NormM,
    UnitMeanSquare,
}

impl Default for RescaleMode {
    fn default() -> Self {
        RescaleMode::UnitMeanSquare
    }
}

/// Rescales magnitudes to m·b/‖b‖ (`NormM`) or √m·b/‖b‖ (`UnitMeanSquare`).
pub fn rescale_measurements<T: Real>(b: &[T], mode: RescaleMode) -> Result<Vec<T>> {
    if mode == RescaleMode::Off {
        return Ok(b.to_vec());
    }
    let m = b.len();
    let nrm = linalg::real_norm(b);
    if !(nrm > T::zero()) {
        return Err(Error::DegenerateInput(
            "cannot rescale an all-zero measurement vector".into(),
        ));
    }
    let factor = match mode {
        RescaleMode::NormM => T::from_usize(m).unwrap() / nrm,
        RescaleMode::UnitMeanSquare => T::from_usize(m).unwrap().sqrt() / nrm,
        RescaleMode::Off => unreachable!(),
    };
    Ok(b.iter().map(|&v| v * factor).collect())
}

/// Output clamp for the optimal pre-processor near its pole at z = 1 − √δ
/// (reachable for δ < 1).
pub const OPTIMAL_T_MAX: f64 = 50.0;

/// Scalar pre-processing function T applied to z = b̃ᵢ².
#[derive(Clone, Copy, Debug)]
pub enum PreprocessFn<T> {
    /// T(z) = z.
    Identity,
    /// T(z) = z·1[z ≤ γ·mean(z)]: entries above the batch-relative threshold
    /// are zeroed, suppressing heavy tails in the spectral matrix.
    Truncated { gamma: T },
    /// T(z) = 1 − exp(−shrink·z/mean(z)): a smooth shrink of its argument.
    Weighted { shrink: T },
    /// T(z) = (z−1)/(z+√δ−1) with δ = m/n, clamped to ±OPTIMAL_T_MAX.
    Optimal { delta: T },
}

impl<T: Real> PreprocessFn<T> {
    pub fn optimal_for_ratio(m: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("signal dimension is zero".into()));
        }
        let delta = T::from_usize(m).unwrap() / T::from_usize(n).unwrap();
        Self::optimal(delta)
    }

    pub fn optimal(delta: T) -> Result<Self> {
        if !(delta > T::zero()) {
            return Err(Error::InvalidArgument(
                "optimal pre-processing requires delta > 0".into(),
            ));
        }
        Ok(PreprocessFn::Optimal { delta })
    }

    /// Evaluates T at z. `batch_mean` is the mean of the batch the value
    /// belongs to; only the truncated and weighted variants use it.
    pub fn evaluate(&self, z: T, batch_mean: T) -> T {
        match *self {
            PreprocessFn::Identity => z,
            PreprocessFn::Truncated { gamma } => {
                if z <= gamma * batch_mean {
                    z
                } else {
                    T::zero()
                }
            }
            PreprocessFn::Weighted { shrink } => {
                if batch_mean > T::zero() {
                    T::one() - (-shrink * z / batch_mean).exp()
                } else {
                    T::zero()
                }
            }
            PreprocessFn::Optimal { delta } => {
                let denom = z + delta.sqrt() - T::one();
                let cap = T::of(OPTIMAL_T_MAX);
                if denom == T::zero() {
                    return cap;
                }
                ((z - T::one()) / denom).max(-cap).min(cap)
            }
        }
    }

    /// Applies T to a batch, computing the batch mean internally.
    pub fn apply_batch(&self, zs: &[T]) -> Vec<T> {
        let mean = if zs.is_empty() {
            T::zero()
        } else {
            zs.iter().copied().sum::<T>() / T::from_usize(zs.len()).unwrap()
        };
        zs.iter().map(|&z| self.evaluate(z, mean)).collect()
    }
}

/// The spectral matrix Y = (1/m)·Σᵢ T(b̃ᵢ²)·aᵢaᵢᴴ as a matrix-free operator:
/// apply(v) = (1/m)·Aᴴ(w ⊙ Av) with wᵢ = T(b̃ᵢ²).
pub struct SpectralOp<T: Real> {
    op: Arc<dyn MeasurementOperator<T>>,
    weights: Vec<T>,
}

impl<T: Real> SpectralOp<T> {
    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

impl<T: Real> HermitianOp<T> for SpectralOp<T> {
    fn dim(&self) -> usize {
        self.op.n()
    }

    fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let m = T::from_usize(self.op.m()).unwrap();
        let mut fx = self.op.forward(v);
        for (z, &w) in fx.iter_mut().zip(&self.weights) {
            *z = Complex::new(z.re * w, z.im * w);
        }
        let mut out = self.op.adjoint(&fx);
        linalg::scale(&mut out, T::one() / m);
        out
    }
}

/// Builds the spectral pre-processing operator without materializing the
/// n×n matrix.
pub fn build_spectral_op<T: Real>(
    inst: &Instance<T>,
    preprocess: PreprocessFn<T>,
    rescale: RescaleMode,
) -> Result<SpectralOp<T>> {
    let rescaled = rescale_measurements(&inst.b, rescale)?;
    let zs: Vec<T> = rescaled.iter().map(|&v| v * v).collect();
    let weights = preprocess.apply_batch(&zs);
    Ok(SpectralOp {
        op: inst.op.clone(),
        weights,
    })
}

/// Initializer output: unit direction, calibrated scale, and the scaled
/// starting point x0 = alpha·raw_direction.
#[derive(Clone, Debug)]
pub struct InitResult<T: Real> {
    pub x0: Vec<Complex<T>>,
    pub raw_direction: Vec<Complex<T>>,
    pub alpha: T,
    pub eig_value: T,
    pub diagnostics: String,
}

/// Least-squares length calibration: minimizes ‖α·|Ax̂| − b‖ over α.
/// Closed form α = ⟨|Ax̂|, b⟩ / ⟨|Ax̂|, |Ax̂|⟩.
pub fn scale_initializer<T: Real>(
    xhat: &[Complex<T>],
    inst: &Instance<T>,
) -> Result<(T, Vec<Complex<T>>)> {
    let mags: Vec<T> = inst.op.forward(xhat).iter().map(|z| z.norm()).collect();
    let denom: T = mags.iter().map(|&u| u * u).sum();
    if !(denom > T::zero()) {
        return Err(Error::DegenerateInput(
            "cannot calibrate length: |A·xhat| is identically zero".into(),
        ));
    }
    let num: T = mags.iter().zip(&inst.b).map(|(&u, &v)| u * v).sum();
    let alpha = num / denom;
    Ok((alpha, linalg::scaled(xhat, alpha)))
}

/// Spectral initializer: leading eigenvector of the pre-processed spectral
/// matrix, then length-calibrated.
pub fn spectral_init<T: Real>(
    inst: &Instance<T>,
    preprocess: PreprocessFn<T>,
    opts: &EigOptions<T>,
    rescale: RescaleMode,
) -> Result<InitResult<T>> {
    let y = build_spectral_op(inst, preprocess, rescale)?;
    let pair = largest_eigenpair(&y, opts)?;
    let raw_direction = pair.vector;
    let (alpha, x0) = scale_initializer(&raw_direction, inst)?;
    let diagnostics = if pair.converged {
        format!("eigensolver converged in {} restarts", pair.restarts)
    } else {
        format!(
            "eigensolver did not converge after {} restarts (residual {:e})",
            pair.restarts, pair.residual
        )
    };
    Ok(InitResult {
        x0,
        raw_direction,
        alpha,
        eig_value: pair.value,
        diagnostics,
    })
}

/// Indices of the `count` smallest entries of `b`, ties broken by lowest
/// index first.
pub fn smallest_measurement_indices<T: Real>(b: &[T], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..b.len()).collect();
    idx.sort_by(|&i, &j| b[i].partial_cmp(&b[j]).unwrap());
    idx.truncate(count);
    idx
}

struct RowCovarianceOp<T> {
    n: usize,
    rows: Vec<Complex<T>>,
    count: usize,
}

impl<T: Real> HermitianOp<T> for RowCovarianceOp<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.n, "apply: dimension mismatch");
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.n];
        let inv = T::one() / T::from_usize(self.count.max(1)).unwrap();
        for r in 0..self.count {
            let row = &self.rows[r * self.n..(r + 1) * self.n];
            let coeff = linalg::dot(row, v) * Complex::new(inv, T::zero());
            linalg::axpy(coeff, row, &mut out);
        }
        out
    }
}

/// Orthogonality-promoting initializer: the smallest eigenvector of the
/// normalized covariance of the rows with the smallest measurements.
pub fn orthogonality_promoting_init<T: Real>(
    inst: &Instance<T>,
    fraction: T,
    opts: &EigOptions<T>,
) -> Result<InitResult<T>> {
    if !(fraction > T::zero() && fraction < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "fraction must lie in (0, 1); got {fraction}"
        )));
    }
    if !inst.op.has_rows() {
        return Err(Error::InvalidArgument(
            "orthogonality-promoting initializer requires row access".into(),
        ));
    }
    let m = inst.m();
    let n = inst.n();
    let count = (fraction * T::from_usize(m).unwrap())
        .ceil()
        .to_usize()
        .unwrap_or(0);
    if count < 1 {
        return Err(Error::InvalidArgument(
            "fraction selects no measurements".into(),
        ));
    }

    let selected = smallest_measurement_indices(&inst.b, count);
    let mut rows: Vec<Complex<T>> = Vec::with_capacity(count * n);
    let mut skipped = 0usize;
    for &i in &selected {
        let row = inst.op.row(i).expect("row access checked above");
        let nrm = linalg::norm(&row);
        if nrm > T::zero() {
            rows.extend(row.iter().map(|z| Complex::new(z.re / nrm, z.im / nrm)));
        } else {
            skipped += 1;
        }
    }
    let used = count - skipped;
    if used == 0 {
        return Err(Error::DegenerateInput(
            "all selected measurement rows are zero".into(),
        ));
    }

    let y = RowCovarianceOp {
        n,
        rows,
        count: used,
    };
    let pair = smallest_eigenpair(&y, opts)?;
    let raw_direction = pair.vector;
    let (alpha, x0) = scale_initializer(&raw_direction, inst)?;
    let mut diagnostics = if pair.converged {
        format!("eigensolver converged in {} restarts", pair.restarts)
    } else {
        format!(
            "eigensolver did not converge after {} restarts (residual {:e})",
            pair.restarts, pair.residual
        )
    };
    if skipped > 0 {
        diagnostics.push_str(&format!("; skipped {skipped} zero rows"));
    }
    Ok(InitResult {
        x0,
        raw_direction,
        alpha,
        eig_value: pair.value,
        diagnostics,
    })
}

/// Random unit direction, length-calibrated. A baseline for initializer
/// comparisons.
pub fn random_init<T: Real>(inst: &Instance<T>, seed: u64) -> Result<InitResult<T>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let raw_direction = linalg::random_unit_vector(&mut rng, inst.n());
    let (alpha, x0) = scale_initializer(&raw_direction, inst)?;
    Ok(InitResult {
        x0,
        raw_direction,
        alpha,
        eig_value: T::zero(),
        diagnostics: "random direction".into(),
    })
}

/// Default fraction of smallest measurements used by the
/// orthogonality-promoting initializer.
pub const DEFAULT_ORTH_FRACTION: f64 = 0.5;
/// Default threshold multiplier for the truncated pre-processor.
pub const DEFAULT_TRUNCATION_GAMMA: f64 = 1.5;
/// Default shrink rate for the weighted pre-processor.
pub const DEFAULT_WEIGHTED_SHRINK: f64 = 1.0;

/// Named initializer specification used by the CLI and benchmark harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitKind {
    SpectralOptimal,
    SpectralIdentity,
    SpectralTruncated,
    SpectralWeighted,
    Orthogonality,
    Random,
}

#[derive(Clone, Debug)]
pub struct InitSpec<T: Real> {
    pub kind: InitKind,
    pub rescale: RescaleMode,
    pub fraction: T,
    pub gamma: T,
    pub shrink: T,
}

pub const INIT_NAMES: &[&str] = &[
    "spectral-optimal",
    "spectral-identity",
    "spectral-truncated",
    "spectral-weighted",
    "orthogonality",
    "random",
];

impl<T: Real> Default for InitSpec<T> {
    /// The package default: spectral initialization with the optimal
    /// pre-processing function.
    fn default() -> Self {
        Self::new(InitKind::SpectralOptimal)
    }
}

impl<T: Real> InitSpec<T> {
    pub fn new(kind: InitKind) -> Self {
        Self {
            kind,
            rescale: RescaleMode::default(),
            fraction: T::of(DEFAULT_ORTH_FRACTION),
            gamma: T::of(DEFAULT_TRUNCATION_GAMMA),
            shrink: T::of(DEFAULT_WEIGHTED_SHRINK),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let kind = match name {
            "spectral-optimal" => InitKind::SpectralOptimal,
            "spectral-identity" | "spectral" => InitKind::SpectralIdentity,
            "spectral-truncated" => InitKind::SpectralTruncated,
            "spectral-weighted" => InitKind::SpectralWeighted,
            "orthogonality" => InitKind::Orthogonality,
            "random" => InitKind::Random,
            _ => return None,
        };
        Some(Self::new(kind))
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            InitKind::SpectralOptimal => "spectral-optimal",
            InitKind::SpectralIdentity => "spectral-identity",
            InitKind::SpectralTruncated => "spectral-truncated",
            InitKind::SpectralWeighted => "spectral-weighted",
            InitKind::Orthogonality => "orthogonality",
            InitKind::Random => "random",
        }
    }

    /// Runs the initializer on an instance.
    pub fn resolve(&self, inst: &Instance<T>, opts: &EigOptions<T>) -> Result<InitResult<T>> {
        match self.kind {
            InitKind::SpectralOptimal => {
                let t = PreprocessFn::optimal_for_ratio(inst.m(), inst.n())?;
                spectral_init(inst, t, opts, self.rescale)
            }
            InitKind::SpectralIdentity => {
                spectral_init(inst, PreprocessFn::Identity, opts, self.rescale)
            }
            InitKind::SpectralTruncated => spectral_init(
                inst,
                PreprocessFn::Truncated { gamma: self.gamma },
                opts,
                self.rescale,
            ),
            InitKind::SpectralWeighted => spectral_init(
                inst,
                PreprocessFn::Weighted {
                    shrink: self.shrink,
                },
                opts,
                self.rescale,
            ),
            InitKind::Orthogonality => orthogonality_promoting_init(inst, self.fraction, opts),
            InitKind::Random => random_init(inst, opts.seed),
        }
    }
}

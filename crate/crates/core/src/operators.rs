//! Measurement operators, problem instances, and synthetic data generation.
//!
//! An operator maps a signal x ∈ ℂⁿ to measurements Ax ∈ ℂᵐ. Row i is the
//! measurement vector aᵢ, and `forward(x)[i] = ⟨aᵢ, x⟩ = Σⱼ conj(aᵢⱼ)·xⱼ`
//! under the project-wide inner product convention. The adjoint is then
//! `adjoint(y) = Σᵢ yᵢ·aᵢ`.

use std::sync::Arc;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Matrix-free linear measurement operator.
///
/// Implementations must satisfy the adjoint identity
/// ⟨forward(x), y⟩ = ⟨x, adjoint(y)⟩ for all x, y.
pub trait MeasurementOperator<T: Real>: Send + Sync {
    /// Signal dimension n.
    fn n(&self) -> usize;

    /// Measurement dimension m.
    fn m(&self) -> usize;

    /// Ax. Panics on dimension mismatch.
    fn forward(&self, x: &[Complex<T>]) -> Vec<Complex<T>>;

    /// Aᴴy. Panics on dimension mismatch.
    fn adjoint(&self, y: &[Complex<T>]) -> Vec<Complex<T>>;

    /// Measurement vector aᵢ, when row access is available.
    fn row(&self, _i: usize) -> Option<Vec<Complex<T>>> {
        None
    }

    fn has_rows(&self) -> bool {
        false
    }
}

/// Dense operator storing the measurement vectors aᵢ row-major.
#[derive(Clone, Debug)]
pub struct DenseOperator<T> {
    m: usize,
    n: usize,
    rows: Vec<Complex<T>>,
}

impl<T: Real> DenseOperator<T> {
    /// Builds from measurement vectors; `rows` is m×n row-major.
    pub fn from_rows(m: usize, n: usize, rows: Vec<Complex<T>>) -> Result<Self> {
        if rows.len() != m * n {
            return Err(Error::DimensionMismatch {
                context: "DenseOperator::from_rows",
                expected: m * n,
                actual: rows.len(),
            });
        }
        Ok(Self { m, n, rows })
    }

    pub fn row_slice(&self, i: usize) -> &[Complex<T>] {
        &self.rows[i * self.n..(i + 1) * self.n]
    }
}

impl<T: Real> MeasurementOperator<T> for DenseOperator<T> {
    fn n(&self) -> usize {
        self.n
    }

    fn m(&self) -> usize {
        self.m
    }

    fn forward(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.n, "forward: signal dimension mismatch");
        (0..self.m)
            .map(|i| linalg::dot(self.row_slice(i), x))
            .collect()
    }

    fn adjoint(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(y.len(), self.m, "adjoint: measurement dimension mismatch");
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.n];
        for (i, yi) in y.iter().enumerate() {
            linalg::axpy(*yi, self.row_slice(i), &mut out);
        }
        out
    }

    fn row(&self, i: usize) -> Option<Vec<Complex<T>>> {
        (i < self.m).then(|| self.row_slice(i).to_vec())
    }

    fn has_rows(&self) -> bool {
        true
    }
}

/// A phase retrieval problem: operator, magnitude measurements, and optional
/// ground truth. Immutable after construction; cheap to share across trials.
#[derive(Clone)]
pub struct Instance<T: Real> {
    pub op: Arc<dyn MeasurementOperator<T>>,
    pub b: Vec<T>,
    pub x_true: Option<Vec<Complex<T>>>,
    pub label: String,
}

impl<T: Real> Instance<T> {
    pub fn new(
        op: Arc<dyn MeasurementOperator<T>>,
        b: Vec<T>,
        x_true: Option<Vec<Complex<T>>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if op.m() != b.len() {
            return Err(Error::DimensionMismatch {
                context: "Instance: measurement count",
                expected: op.m(),
                actual: b.len(),
            });
        }
        if let Some(x) = &x_true {
            if op.n() != x.len() {
                return Err(Error::DimensionMismatch {
                    context: "Instance: ground truth length",
                    expected: op.n(),
                    actual: x.len(),
                });
            }
        }
        if b.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "magnitude measurements must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            op,
            b,
            x_true,
            label: label.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.op.n()
    }

    pub fn m(&self) -> usize {
        self.op.m()
    }
}

/// Synthetic Gaussian instance specification.
#[derive(Clone, Debug)]
pub struct GaussianSpec {
    pub n: usize,
    pub m: usize,
    /// Per-entry complex variance of the matrix entries (default 1/n).
    pub variance: f64,
    pub seed: u64,
    /// Signal-to-noise ratio in dB; `None` means noiseless.
    pub snr_db: Option<f64>,
}

impl GaussianSpec {
    pub fn new(n: usize, m: usize, seed: u64) -> Self {
        Self {
            n,
            m,
            variance: 1.0 / n as f64,
            seed,
            snr_db: None,
        }
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.snr_db = Some(snr_db);
        self
    }

    pub fn with_variance(mut self, variance: f64) -> Self {
        self.variance = variance;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 || self.m < 1 {
            return Err(Error::InvalidArgument(
                "GaussianSpec requires n >= 1 and m >= 1".into(),
            ));
        }
        if !(self.variance > 0.0) {
            return Err(Error::InvalidArgument(
                "GaussianSpec requires variance > 0".into(),
            ));
        }
        Ok(())
    }
}

// Independent PRNG streams so providing x_true does not shift the matrix draw.
const STREAM_MATRIX: u64 = 0;
const STREAM_SIGNAL: u64 = 1;
const STREAM_NOISE: u64 = 2;

fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generates a dense complex Gaussian instance with b = |A·x_true| and
/// optional additive noise. Identical seeds produce bit-identical instances.
pub fn make_gaussian_instance<T: Real>(
    spec: &GaussianSpec,
    x_true: Option<Vec<Complex<T>>>,
) -> Result<Instance<T>> {
    spec.validate()?;
    let x_true = match x_true {
        Some(x) => {
            if x.len() != spec.n {
                return Err(Error::DimensionMismatch {
                    context: "make_gaussian_instance: x_true length",
                    expected: spec.n,
                    actual: x.len(),
                });
            }
            x
        }
        None => {
            let mut rng = stream_rng(spec.seed, STREAM_SIGNAL);
            linalg::random_unit_vector(&mut rng, spec.n)
        }
    };

    let mut rng = stream_rng(spec.seed, STREAM_MATRIX);
    let rows: Vec<Complex<T>> =
        linalg::complex_gaussian_vec(&mut rng, spec.m * spec.n, spec.variance);
    let op = DenseOperator::from_rows(spec.m, spec.n, rows)?;

    let mut b: Vec<T> = op.forward(&x_true).iter().map(|z| z.norm()).collect();
    if let Some(snr_db) = spec.snr_db {
        b = add_noise(&b, T::of(snr_db), spec.seed)?;
    }

    let label = format!(
        "gaussian(n={}, m={}, seed={}{})",
        spec.n,
        spec.m,
        spec.seed,
        spec.snr_db
            .map(|s| format!(", snr_db={s}"))
            .unwrap_or_default()
    );
    Instance::new(Arc::new(op), b, Some(x_true), label)
}

/// Adds i.i.d. real Gaussian noise with variance ‖b‖²/(m·10^(snr_db/10)) to
/// the magnitudes, clamping at zero. `snr_db = +∞` disables noise.
pub fn add_noise<T: Real>(b: &[T], snr_db: T, seed: u64) -> Result<Vec<T>> {
    if snr_db == T::infinity() {
        return Ok(b.to_vec());
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidArgument(
            "snr_db must be finite (or +inf to disable noise)".into(),
        ));
    }
    let m = b.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let norm_sq: f64 = b.iter().map(|&v| (v * v).to_f64_lossy()).sum();
    let sigma = (norm_sq / (m as f64 * 10f64.powf(snr_db.to_f64_lossy() / 10.0))).sqrt();
    let mut rng = stream_rng(seed, STREAM_NOISE);
    Ok(b.iter()
        .map(|&v| {
            let w: f64 = StandardNormal.sample(&mut rng);
            (v + T::of(w * sigma)).max(T::zero())
        })
        .collect())
}

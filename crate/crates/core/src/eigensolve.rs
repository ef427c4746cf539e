//! Extremal eigenpairs of Hermitian operators given only matrix-vector
//! application.
//!
//! The solver is a restarted Krylov method with full reorthogonalization and
//! thick restart: each cycle extends the retained Ritz vectors to a subspace
//! of dimension `subspace_dim`, solves the projected dense Hermitian problem,
//! and restarts from the best Ritz vectors. This replaces the power method,
//! which is unstable on matrices with small spectral gaps and cannot reach
//! the smallest eigenvalue at all.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Hermitian operator available only through its action on vectors.
pub trait HermitianOp<T: Real>: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>>;
}

/// A dense Hermitian matrix, stored row-major. Mostly useful in tests and
/// for small projected problems.
pub struct DenseHermitian<T> {
    pub dim: usize,
    pub entries: Vec<Complex<T>>,
}

impl<T: Real> HermitianOp<T> for DenseHermitian<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.dim, "apply: dimension mismatch");
        (0..self.dim)
            .map(|i| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for j in 0..self.dim {
                    acc += self.entries[i * self.dim + j] * v[j];
                }
                acc
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct EigOptions<T> {
    /// Relative residual tolerance: ‖Yv − λv‖ ≤ tol·max(|λ|, 1).
    pub tol: T,
    pub max_restarts: usize,
    /// Krylov block size; `None` resolves to min(20, n).
    pub subspace_dim: Option<usize>,
    /// Seed for the random start vector.
    pub seed: u64,
}

impl<T: Real> Default for EigOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::of(1e-8),
            max_restarts: 100,
            subspace_dim: None,
            seed: 0,
        }
    }
}

impl<T: Real> EigOptions<T> {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Result of an extremal eigenpair computation. `converged == false` means
/// the restart budget ran out; the best pair found so far is still returned.
#[derive(Clone, Debug)]
pub struct EigPair<T> {
    pub value: T,
    pub vector: Vec<Complex<T>>,
    pub residual: T,
    pub converged: bool,
    pub restarts: usize,
    /// Ritz estimate of the target eigenvalue after each restart.
    pub ritz_history: Vec<T>,
}

/// Largest (algebraic) eigenpair of a Hermitian operator.
pub fn largest_eigenpair<T: Real>(op: &dyn HermitianOp<T>, opts: &EigOptions<T>) -> Result<EigPair<T>> {
    extremal_eigenpair(op, opts)
}

/// Smallest eigenpair, computed as the largest pair of σI − Y where σ is an
/// upper spectral bound from a preliminary largest-pair call. Factorizations
/// are unavailable for black-box operators, so inverse iteration is not an
/// option.
pub fn smallest_eigenpair<T: Real>(op: &dyn HermitianOp<T>, opts: &EigOptions<T>) -> Result<EigPair<T>> {
    let top = largest_eigenpair(op, opts)?;
    let sigma = top.value + top.residual;
    let shifted = ShiftedNegated { sigma, inner: op };
    // ‖Yv − λv‖ equals the shifted residual exactly, but the relative scale
    // max(|σ−λ|, 1) can dwarf max(|λ|, 1); shrink the inner tolerance so the
    // contract holds against the original operator.
    let mut inner_opts = opts.clone();
    inner_opts.tol = opts.tol / (T::one() + T::of(2.0) * sigma.abs());
    let mut pair = extremal_eigenpair(&shifted, &inner_opts)?;
    pair.value = sigma - pair.value;
    for v in pair.ritz_history.iter_mut() {
        *v = sigma - *v;
    }
    // Report the residual against the original operator.
    let yv = op.apply(&pair.vector);
    let mut r = yv;
    linalg::axpy(Complex::new(-pair.value, T::zero()), &pair.vector, &mut r);
    pair.residual = linalg::norm(&r);
    pair.converged = pair.converged && pair.residual <= opts.tol * pair.value.abs().max(T::one());
    Ok(pair)
}

struct ShiftedNegated<'a, T: Real> {
    sigma: T,
    inner: &'a dyn HermitianOp<T>,
}

impl<T: Real> HermitianOp<T> for ShiftedNegated<'_, T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = self.inner.apply(v);
        for (o, vi) in out.iter_mut().zip(v) {
            *o = Complex::new(self.sigma * vi.re - o.re, self.sigma * vi.im - o.im);
        }
        out
    }
}

const KEEP_RITZ: usize = 3;

fn extremal_eigenpair<T: Real>(op: &dyn HermitianOp<T>, opts: &EigOptions<T>) -> Result<EigPair<T>> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("operator dimension is zero".into()));
    }
    if !(opts.tol > T::zero()) {
        return Err(Error::InvalidArgument("eigensolver tol must be > 0".into()));
    }
    let s = opts.subspace_dim.unwrap_or_else(|| 20.min(n));
    if s > n || (n >= 2 && s < 2) || s == 0 {
        return Err(Error::InvalidArgument(format!(
            "subspace_dim must lie in [2, n]; got {s} for n = {n}"
        )));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut kept: Vec<Vec<Complex<T>>> = vec![linalg::random_unit_vector(&mut rng, n)];
    let mut history: Vec<T> = Vec::new();
    let mut best: Option<(T, Vec<Complex<T>>, T)> = None;

    for restart in 0..opts.max_restarts {
        // Orthonormal basis from the retained Ritz vectors, Krylov-extended.
        let mut basis: Vec<Vec<Complex<T>>> = Vec::with_capacity(s);
        for k in &kept {
            let mut v = k.clone();
            orthogonalize(&mut v, &basis);
            if linalg::normalize(&mut v) > T::of(1e-12) {
                basis.push(v);
            }
        }
        if basis.is_empty() {
            basis.push(linalg::random_unit_vector(&mut rng, n));
        }
        while basis.len() < s {
            let mut w = op.apply(basis.last().unwrap());
            orthogonalize(&mut w, &basis);
            if linalg::normalize(&mut w) <= T::of(1e-12) {
                // Invariant subspace; expand with a random direction.
                w = linalg::random_unit_vector(&mut rng, n);
                orthogonalize(&mut w, &basis);
                if linalg::normalize(&mut w) <= T::of(1e-12) {
                    break;
                }
            }
            basis.push(w);
        }

        let k = basis.len();
        let applied: Vec<Vec<Complex<T>>> = basis.iter().map(|v| op.apply(v)).collect();

        // Projected Hermitian matrix H[i][j] = ⟨v_i, Y v_j⟩, hermitized.
        let mut h = vec![Complex::new(T::zero(), T::zero()); k * k];
        for i in 0..k {
            for j in i..k {
                let hij = linalg::dot(&basis[i], &applied[j]);
                h[i * k + j] = hij;
                h[j * k + i] = hij.conj();
            }
        }
        for item in h.iter_mut().step_by(k + 1) {
            item.im = T::zero();
        }

        let (theta, y) = hermitian_eig(k, &mut h);
        let target = k - 1; // eigenvalues ascend; track the largest

        // Ritz vector u = V·y_target; Y·u from the cached applications.
        let mut u = vec![Complex::new(T::zero(), T::zero()); n];
        let mut yu = vec![Complex::new(T::zero(), T::zero()); n];
        for j in 0..k {
            let c = y[j * k + target];
            linalg::axpy(c, &basis[j], &mut u);
            linalg::axpy(c, &applied[j], &mut yu);
        }
        let nrm = linalg::normalize(&mut u);
        if nrm > T::zero() {
            linalg::scale(&mut yu, T::one() / nrm);
        }
        linalg::axpy(Complex::new(-theta[target], T::zero()), &u, &mut yu);
        let residual = linalg::norm(&yu);

        history.push(theta[target]);
        let better = match &best {
            Some((_, _, r)) => residual < *r,
            None => true,
        };
        if better {
            best = Some((theta[target], u.clone(), residual));
        }

        if residual <= opts.tol * theta[target].abs().max(T::one()) {
            return Ok(EigPair {
                value: theta[target],
                vector: u,
                residual,
                converged: true,
                restarts: restart + 1,
                ritz_history: history,
            });
        }

        // Thick restart: keep the top Ritz vectors.
        let keep = KEEP_RITZ.min(k);
        kept = (0..keep)
            .map(|t| {
                let idx = k - 1 - t;
                let mut v = vec![Complex::new(T::zero(), T::zero()); n];
                for j in 0..k {
                    linalg::axpy(y[j * k + idx], &basis[j], &mut v);
                }
                linalg::normalize(&mut v);
                v
            })
            .collect();
    }

    let (value, vector, residual) = best.expect("at least one restart ran");
    Ok(EigPair {
        value,
        vector,
        residual,
        converged: false,
        restarts: opts.max_restarts,
        ritz_history: history,
    })
}

/// Modified Gram-Schmidt, two passes.
fn orthogonalize<T: Real>(v: &mut Vec<Complex<T>>, basis: &[Vec<Complex<T>>]) {
    for _ in 0..2 {
        for b in basis {
            let c = linalg::dot(b, v);
            linalg::axpy(-c, b, v);
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a dense Hermitian matrix.
///
/// `h` is k×k row-major and is destroyed. Returns eigenvalues in ascending
/// order and the eigenvector matrix column-major-by-eigenvalue: column t of
/// the returned matrix (entries `y[j*k + t]`) is the eigenvector for
/// eigenvalue t.
pub fn hermitian_eig<T: Real>(k: usize, h: &mut [Complex<T>]) -> (Vec<T>, Vec<Complex<T>>) {
    assert_eq!(h.len(), k * k);
    let mut v = vec![Complex::new(T::zero(), T::zero()); k * k];
    for i in 0..k {
        v[i * k + i] = Complex::new(T::one(), T::zero());
    }
    if k == 1 {
        return (vec![h[0].re], v);
    }

    let fro: T = h.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let eps = T::of(1e-30).max(fro * T::of(1e-15));

    for _sweep in 0..60 {
        let mut off = T::zero();
        for p in 0..k {
            for q in (p + 1)..k {
                off = off + h[p * k + q].norm_sqr();
            }
        }
        if off.sqrt() <= eps {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let hpq = h[p * k + q];
                let g = hpq.norm();
                if g <= eps * T::of(1e-2) {
                    continue;
                }
                // Phase factor e with h_pq = g·e; rotation built on the
                // real symmetric reduction diag(1, conj(e))ᴴ H diag(1, conj(e)).
                let e = hpq / Complex::new(g, T::zero());
                let alpha = h[p * k + p].re;
                let beta = h[q * k + q].re;
                let tau = (beta - alpha) / (g + g);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;

                // Column update: col_p' = c·col_p − s·conj(e)·col_q,
                //                col_q' = s·e·col_p + c·col_q   (U = P·R with P = diag(1, conj(e)))
                let se_conj = Complex::new(s, T::zero()) * e.conj();
                let se = Complex::new(s, T::zero()) * e;
                let cc = Complex::new(c, T::zero());
                for i in 0..k {
                    let hip = h[i * k + p];
                    let hiq = h[i * k + q];
                    h[i * k + p] = cc * hip - se_conj * hiq;
                    h[i * k + q] = se * hip + cc * hiq;
                }
                // Row update with Uᴴ.
                for j in 0..k {
                    let hpj = h[p * k + j];
                    let hqj = h[q * k + j];
                    h[p * k + j] = cc * hpj - se * hqj;
                    h[q * k + j] = se_conj * hpj + cc * hqj;
                }
                h[p * k + q] = Complex::new(T::zero(), T::zero());
                h[q * k + p] = Complex::new(T::zero(), T::zero());
                h[p * k + p].im = T::zero();
                h[q * k + q].im = T::zero();
                // Accumulate eigenvectors.
                for i in 0..k {
                    let vip = v[i * k + p];
                    let viq = v[i * k + q];
                    v[i * k + p] = cc * vip - se_conj * viq;
                    v[i * k + q] = se * vip + cc * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..k).collect();
    let diag: Vec<T> = (0..k).map(|i| h[i * k + i].re).collect();
    order.sort_by(|&a, &b| diag[a].partial_cmp(&diag[b]).unwrap());
    let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = vec![Complex::new(T::zero(), T::zero()); k * k];
    for (t, &src) in order.iter().enumerate() {
        for j in 0..k {
            vectors[j * k + t] = v[j * k + src];
        }
    }
    (values, vectors)
}

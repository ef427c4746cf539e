//! Complex vector helpers used throughout the crate.
//!
//! The inner product is ⟨u, v⟩ = Σᵢ conj(uᵢ)·vᵢ, fixed project-wide.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Real;

/// ⟨u, v⟩ = Σ conj(uᵢ)·vᵢ.
pub fn dot<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    assert_eq!(u.len(), v.len(), "dot: length mismatch");
    let mut acc = Complex::new(T::zero(), T::zero());
    for (a, b) in u.iter().zip(v) {
        acc += a.conj() * b;
    }
    acc
}

pub fn norm_sq<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm<T: Real>(v: &[Complex<T>]) -> T {
    norm_sq(v).sqrt()
}

pub fn real_norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// y += alpha * x
pub fn axpy<T: Real>(alpha: Complex<T>, x: &[Complex<T>], y: &mut [Complex<T>]) {
    assert_eq!(x.len(), y.len(), "axpy: length mismatch");
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale<T: Real>(v: &mut [Complex<T>], s: T) {
    for z in v.iter_mut() {
        *z = Complex::new(z.re * s, z.im * s);
    }
}

pub fn scaled<T: Real>(v: &[Complex<T>], s: T) -> Vec<Complex<T>> {
    v.iter().map(|z| Complex::new(z.re * s, z.im * s)).collect()
}

pub fn sub<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> Vec<Complex<T>> {
    assert_eq!(u.len(), v.len(), "sub: length mismatch");
    u.iter().zip(v).map(|(a, b)| a - b).collect()
}

/// Normalizes `v` in place; returns the original norm.
pub fn normalize<T: Real>(v: &mut [Complex<T>]) -> T {
    let nrm = norm(v);
    if nrm > T::zero() {
        scale(v, T::one() / nrm);
    }
    nrm
}

/// z/|z| with phase(0) := 0. Used by gradient formulas (subgradient choice).
pub fn phase_or_zero<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.norm();
    if r > T::zero() {
        Complex::new(z.re / r, z.im / r)
    } else {
        Complex::new(T::zero(), T::zero())
    }
}

/// z/|z| with phase(0) := 1. Used by phase estimates in alternating methods.
pub fn phase_or_one<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.norm();
    if r > T::zero() {
        Complex::new(z.re / r, z.im / r)
    } else {
        Complex::new(T::one(), T::zero())
    }
}

/// One sample of a circularly-symmetric complex Gaussian with total variance
/// `variance` (real and imaginary parts each carry variance/2).
///
/// Samples are drawn in f64 and narrowed, so a given seed produces the same
/// instance for every scalar type.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex<T> {
    let sd = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(T::of(re * sd), T::of(im * sd))
}

pub fn complex_gaussian_vec<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    len: usize,
    variance: f64,
) -> Vec<Complex<T>> {
    (0..len).map(|_| complex_gaussian(rng, variance)).collect()
}

/// Random complex unit vector.
pub fn random_unit_vector<T: Real, R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex<T>> {
    let mut v = complex_gaussian_vec(rng, len, 1.0);
    while norm(&v) == T::zero() {
        v = complex_gaussian_vec(rng, len, 1.0);
    }
    normalize(&mut v);
    v
}

pub fn all_finite<T: Real>(v: &[Complex<T>]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

//! Phase retrieval toolkit: measurement operators, practical initializers,
//! first-order and alternating solvers, and a reproducible benchmark harness.
//!
//! The core is generic over the floating-point scalar (`f32` or `f64`) via
//! the [`scalar::Real`] trait; concrete aliases for the common types live at
//! the crate root.

pub mod benchmark;
pub mod datasets;
pub mod eigensolve;
pub mod error;
pub mod gradient;
pub mod initializers;
pub mod linalg;
pub mod metrics;
pub mod operators;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use scalar::Real;

/// Complex scalar aliases.
pub type C32 = num_complex::Complex<f32>;
pub type C64 = num_complex::Complex<f64>;

/// Concrete f64 aliases for the main domain types.
pub type Instance64 = operators::Instance<f64>;
pub type DenseOperator64 = operators::DenseOperator<f64>;
pub type InitResult64 = initializers::InitResult<f64>;
pub type SolveOptions64 = gradient::SolveOptions<f64>;
pub type Trace64 = gradient::Trace<f64>;
pub type SolveResult64 = solvers::SolveResult<f64>;

/// Concrete f32 aliases.
pub type Instance32 = operators::Instance<f32>;
pub type DenseOperator32 = operators::DenseOperator<f32>;

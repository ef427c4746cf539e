//! The algorithm catalog: gradient flows over the least-squares objective,
//! alternating minimization (Gerchberg-Saxton, Fienup), randomized Kaczmarz,
//! and PhaseMax.

mod alternating;
mod kaczmarz;
mod objective;
mod phasemax;

pub use alternating::{solve_fienup, solve_gerchberg_saxton};
pub use kaczmarz::solve_kaczmarz;
pub use objective::{objective_for, FamilyObjective};
pub use phasemax::{constraint_violation, solve_phasemax};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::gradient::{minimize, SolveOptions, Trace};
use crate::initializers::InitResult;
use crate::operators::Instance;
use crate::scalar::Real;

/// Exponent p in the least-squares objective ‖|Âx|^p − b̂^p‖².
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exponent {
    /// Amplitude flow family.
    One,
    /// Intensity (Wirtinger flow) family.
    Two,
}

/// Per-measurement weighting rule, refreshed from the current iterate for
/// the truncated and reweighted variants.
#[derive(Clone, Copy, Debug)]
pub enum WeightRule<T> {
    /// All-ones weights (WF / AF).
    Uniform,
    /// Binary mask keeping measurement i when bᵢ/|aᵢᴴx| ∈ [1/alpha_upper,
    /// alpha_lower] (TWF / TAF). Infinite parameters disable the rule.
    Truncated { alpha_lower: T, alpha_upper: T },
    /// wᵢ = |aᵢᴴx| / (|aᵢᴴx| + eta·bᵢ) (RWF / RAF). eta = 0 disables the rule.
    Reweighted { eta: T },
}

pub const DEFAULT_TRUNCATION_ALPHA: f64 = 5.0;
pub const DEFAULT_REWEIGHT_ETA: f64 = 0.1;
pub const DEFAULT_FIENUP_BETA: f64 = 0.9;
pub const DEFAULT_PHASEMAX_GROWTH: f64 = 10.0;

/// A member of the gradient-flow family.
#[derive(Clone, Copy, Debug)]
pub struct FamilySpec<T> {
    pub exponent: Exponent,
    pub weight_rule: WeightRule<T>,
}

impl<T: Real> FamilySpec<T> {
    pub fn wirtinger_flow() -> Self {
        Self {
            exponent: Exponent::Two,
            weight_rule: WeightRule::Uniform,
        }
    }

    pub fn amplitude_flow() -> Self {
        Self {
            exponent: Exponent::One,
            weight_rule: WeightRule::Uniform,
        }
    }

    pub fn truncated(exponent: Exponent) -> Self {
        Self {
            exponent,
            weight_rule: WeightRule::Truncated {
                alpha_lower: T::of(DEFAULT_TRUNCATION_ALPHA),
                alpha_upper: T::of(DEFAULT_TRUNCATION_ALPHA),
            },
        }
    }

    pub fn reweighted(exponent: Exponent) -> Self {
        Self {
            exponent,
            weight_rule: WeightRule::Reweighted {
                eta: T::of(DEFAULT_REWEIGHT_ETA),
            },
        }
    }

    pub fn algorithm_name(&self) -> &'static str {
        match (self.exponent, &self.weight_rule) {
            (Exponent::Two, WeightRule::Uniform) => "wf",
            (Exponent::Two, WeightRule::Truncated { .. }) => "twf",
            (Exponent::Two, WeightRule::Reweighted { .. }) => "rwf",
            (Exponent::One, WeightRule::Uniform) => "af",
            (Exponent::One, WeightRule::Truncated { .. }) => "taf",
            (Exponent::One, WeightRule::Reweighted { .. }) => "raf",
        }
    }
}

/// Solver output: recovered signal, per-iteration trace, and run metadata.
#[derive(Clone, Debug)]
pub struct SolveResult<T: Real> {
    pub x_hat: Vec<Complex<T>>,
    pub trace: Trace<T>,
    pub meta: SolveMeta,
}

#[derive(Clone, Debug)]
pub struct SolveMeta {
    pub algorithm: String,
    pub options: String,
    pub init: String,
}

impl SolveMeta {
    fn new<T: Real>(algorithm: &str, opts: &SolveOptions<T>, init: &InitResult<T>) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            options: format!(
                "tol={:e} max_iters={} window={} beta={} seed={}",
                opts.tol, opts.max_iters, opts.window_w, opts.backtrack_beta, opts.seed
            ),
            init: format!("alpha={:e}; {}", init.alpha, init.diagnostics),
        }
    }
}

pub(crate) fn check_init_dimension<T: Real>(inst: &Instance<T>, init: &InitResult<T>) -> Result<()> {
    if init.x0.len() != inst.n() {
        return Err(Error::DimensionMismatch {
            context: "solver initializer",
            expected: inst.n(),
            actual: init.x0.len(),
        });
    }
    Ok(())
}

/// Gradient descent on the weighted least-squares objective selected by
/// `spec`. Iterate-dependent weight rules are refreshed every iteration
/// before the gradient step.
pub fn solve_gradient_family<T: Real>(
    inst: &Instance<T>,
    spec: FamilySpec<T>,
    init: &InitResult<T>,
    opts: &SolveOptions<T>,
) -> Result<SolveResult<T>> {
    check_init_dimension(inst, init)?;
    let mut obj = objective_for(inst, spec, &init.x0);
    let (x_hat, trace) = minimize(&mut obj, &init.x0, opts)?;
    Ok(SolveResult {
        x_hat,
        trace,
        meta: SolveMeta::new(spec.algorithm_name(), opts, init),
    })
}

/// Stable algorithm identifiers used by the CLI and benchmark configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Gs,
    Fienup,
    Wf,
    Twf,
    Rwf,
    Af,
    Taf,
    Raf,
    Kaczmarz,
    Phasemax,
}

impl Algorithm {
    pub const ALL: [Algorithm; 10] = [
        Algorithm::Gs,
        Algorithm::Fienup,
        Algorithm::Wf,
        Algorithm::Twf,
        Algorithm::Rwf,
        Algorithm::Af,
        Algorithm::Taf,
        Algorithm::Raf,
        Algorithm::Kaczmarz,
        Algorithm::Phasemax,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Gs => "gs",
            Algorithm::Fienup => "fienup",
            Algorithm::Wf => "wf",
            Algorithm::Twf => "twf",
            Algorithm::Rwf => "rwf",
            Algorithm::Af => "af",
            Algorithm::Taf => "taf",
            Algorithm::Raf => "raf",
            Algorithm::Kaczmarz => "kaczmarz",
            Algorithm::Phasemax => "phasemax",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn valid_names() -> String {
        Self::ALL
            .iter()
            .map(|a| a.name())
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Runs this algorithm with its default parameters.
    pub fn solve<T: Real>(
        &self,
        inst: &Instance<T>,
        init: &InitResult<T>,
        opts: &SolveOptions<T>,
    ) -> Result<SolveResult<T>> {
        match self {
            Algorithm::Gs => solve_gerchberg_saxton(inst, init, opts),
            Algorithm::Fienup => solve_fienup(inst, init, opts, T::of(DEFAULT_FIENUP_BETA)),
            Algorithm::Wf => {
                solve_gradient_family(inst, FamilySpec::wirtinger_flow(), init, opts)
            }
            Algorithm::Twf => {
                solve_gradient_family(inst, FamilySpec::truncated(Exponent::Two), init, opts)
            }
            Algorithm::Rwf => {
                solve_gradient_family(inst, FamilySpec::reweighted(Exponent::Two), init, opts)
            }
            Algorithm::Af => {
                solve_gradient_family(inst, FamilySpec::amplitude_flow(), init, opts)
            }
            Algorithm::Taf => {
                solve_gradient_family(inst, FamilySpec::truncated(Exponent::One), init, opts)
            }
            Algorithm::Raf => {
                solve_gradient_family(inst, FamilySpec::reweighted(Exponent::One), init, opts)
            }
            Algorithm::Kaczmarz => solve_kaczmarz(inst, init, opts),
            Algorithm::Phasemax => {
                solve_phasemax(inst, init, opts, T::of(DEFAULT_PHASEMAX_GROWTH))
            }
        }
    }
}

#[cfg(test)]
mod tests;

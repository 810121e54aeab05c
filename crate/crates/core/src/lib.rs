//! Random permutation models, their permuton limits and Poisson limit theory.
//!
//! * [`perm`]: permutations, index tuples, cycle censuses, empirical permutons.
//! * [`densities`]: Frank copula, exponential-family fits and grid densities.
//! * [`samplers`]: exact and MCMC samplers driven by seeded [`RandomStream`]s.
//! * [`limits`]: Poisson parameters, moments and Stein total-variation bounds.
//! * [`analysis`]: exact enumeration oracles, diagnostics and the experiment harness.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the common choice.

pub mod analysis;
pub mod densities;
pub mod error;
pub mod limits;
pub mod perm;
pub mod quadrature;
pub mod rng;
pub mod samplers;
pub mod scalar;
pub mod special;

pub use densities::{Density, DensityKind, DensitySpec, ScoreFunction};
pub use error::{Error, Result};
pub use perm::{CycleCensus, EmpiricalPermuton, GridMass, IndexTuple, Permutation};
pub use rng::{RandomStream, DEFAULT_SEED};
pub use samplers::{ModelSpec, Sampler};
pub use scalar::Real;

/// Double-precision density, the type used by samplers and the harness.
pub type Density64 = Density<f64>;
/// Single-precision density.
pub type Density32 = Density<f32>;
/// Oracle pmf with floating-point probabilities.
pub type ExactPmfF64 = analysis::ExactPmf<f64>;
/// Oracle pmf with exact rational probabilities.
pub type ExactPmfRational = analysis::ExactPmf<num_rational::BigRational>;

//! Exact and MCMC samplers. Every sampler takes an explicit [`RandomStream`]
//! and is a deterministic function of its parameters and that stream.

mod exp_family;
mod independent;
mod mallows;
mod mu_random;
mod tilt;

use serde::{Deserialize, Serialize};

pub use exp_family::{autocorrelation, sample_exp_family, ExpFamilyChain, McmcConfig};
pub use independent::IndependentZSampler;
pub use mallows::{mallows_normalizer, sample_mallows};
pub use mu_random::{rank_pattern, MuRandomSampler, DEFAULT_MU_RANDOM_GRID, SAMPLER_MARGINAL_TOLERANCE};
pub use tilt::{derangement_count, ln_derangements, FixedPointTiltSampler};

use crate::densities::{Density, DensitySpec, ScoreFunction};
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::rng::RandomStream;

/// Fisher–Yates shuffle.
pub fn sample_uniform(n: usize, stream: &mut RandomStream) -> Permutation {
    assert!(n >= 1, "permutation size must be positive");
    let mut v: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        let j = stream.below(i + 1);
        v.swap(i, j);
    }
    Permutation::from_zero_based_unchecked(v)
}

pub fn sample_fixed_point_tilt(n: usize, theta: f64, stream: &mut RandomStream) -> Permutation {
    FixedPointTiltSampler::new(n, theta).sample(stream)
}

/// One draw. The inverse-CDF tables are rebuilt on every call, so keep a
/// [`MuRandomSampler`] (or a prepared [`ModelSpec`]) for repeated draws.
pub fn sample_mu_random(density: &Density<f64>, n: usize, stream: &mut RandomStream) -> Result<Permutation> {
    Ok(MuRandomSampler::new(density, None)?.sample(n, stream))
}

/// One draw; see [`IndependentZSampler`] for repeated draws.
pub fn sample_independent_z(density: &Density<f64>, n: usize, stream: &mut RandomStream) -> Result<Vec<u32>> {
    Ok(IndependentZSampler::new(density, n)?.sample(stream))
}

/// A model over `S_n` (or, for `IndependentZ`, over maps `{1..n} → {1..n}`).
///
/// JSON form: `{"model": "mallows", "n": 100, "q": 0.81873075}`. For Mallows,
/// `q` may instead be `{"beta": 20}` (or a top-level `"beta": 20`), meaning
/// `q = exp(−β/n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelSpec", into = "RawModelSpec")]
pub enum ModelSpec {
    Uniform {
        n: usize,
    },
    Mallows {
        n: usize,
        q: f64,
    },
    ExpFamily {
        n: usize,
        score: ScoreFunction,
        theta: f64,
        mcmc: McmcConfig,
    },
    MuRandom {
        n: usize,
        density: DensitySpec,
        grid_k: Option<usize>,
    },
    FixedPointTilt {
        n: usize,
        theta: f64,
    },
    IndependentZ {
        n: usize,
        density: DensitySpec,
    },
}

impl ModelSpec {
    pub fn n(&self) -> usize {
        match self {
            Self::Uniform { n }
            | Self::Mallows { n, .. }
            | Self::ExpFamily { n, .. }
            | Self::MuRandom { n, .. }
            | Self::FixedPointTilt { n, .. }
            | Self::IndependentZ { n, .. } => *n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Mallows { .. } => "mallows",
            Self::ExpFamily { .. } => "exp_family",
            Self::MuRandom { .. } => "mu_random",
            Self::FixedPointTilt { .. } => "fixed_point_tilt",
            Self::IndependentZ { .. } => "independent_z",
        }
    }

    /// Mallows with `q = exp(−β/n)`.
    pub fn mallows_scaled(n: usize, beta: f64) -> Self {
        Self::Mallows {
            n,
            q: (-beta / n as f64).exp(),
        }
    }

    /// Whether draws are permutations (everything except the independent model).
    pub fn is_permutation_model(&self) -> bool {
        !matches!(self, Self::IndependentZ { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::Spec("n must be at least 1".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::TooLarge { n, max: u32::MAX as usize });
        }
        match self {
            Self::Mallows { q, .. } if !(q.is_finite() && *q > 0.0) => {
                Err(Error::Spec(format!("mallows q must be positive and finite, got {q}")))
            }
            Self::ExpFamily { theta, mcmc, .. } => {
                if !theta.is_finite() {
                    return Err(Error::Spec("theta must be finite".into()));
                }
                if mcmc.burn_in == Some(0) || mcmc.thin == Some(0) {
                    return Err(Error::Spec("burn_in and thin must be positive".into()));
                }
                Ok(())
            }
            Self::FixedPointTilt { theta, .. } if !theta.is_finite() => {
                Err(Error::Spec("theta must be finite".into()))
            }
            Self::MuRandom { grid_k: Some(0), .. } => Err(Error::Spec("grid_k must be positive".into())),
            _ => Ok(()),
        }
    }

    /// Validates the spec and builds the sampler state (tables, fitted densities).
    pub fn prepare(&self) -> Result<Sampler> {
        self.validate()?;
        let n = self.n();
        Ok(match self {
            Self::Uniform { .. } => Sampler::Uniform { n },
            Self::Mallows { q, .. } => Sampler::Mallows { n, q: *q },
            Self::ExpFamily { score, theta, mcmc, .. } => Sampler::ExpFamily {
                n,
                score: score.clone(),
                theta: *theta,
                mcmc: *mcmc,
            },
            Self::MuRandom { density, grid_k, .. } => {
                let d = density.build::<f64>()?;
                Sampler::MuRandom {
                    n,
                    sampler: MuRandomSampler::new(&d, *grid_k)?,
                }
            }
            Self::FixedPointTilt { theta, .. } => Sampler::FixedPointTilt(FixedPointTiltSampler::new(n, *theta)),
            Self::IndependentZ { density, .. } => {
                let d = density.build::<f64>()?;
                Sampler::IndependentZ(IndependentZSampler::new(&d, n)?)
            }
        })
    }
}

/// A model with its precomputed sampling state.
#[derive(Clone, Debug)]
pub enum Sampler {
    Uniform { n: usize },
    Mallows { n: usize, q: f64 },
    ExpFamily { n: usize, score: ScoreFunction, theta: f64, mcmc: McmcConfig },
    MuRandom { n: usize, sampler: MuRandomSampler },
    FixedPointTilt(FixedPointTiltSampler),
    IndependentZ(IndependentZSampler),
}

impl Sampler {
    /// One draw as a 0-based map `i ↦ target`. A bijection for every model
    /// except the independent one.
    pub fn draw_map(&self, stream: &mut RandomStream) -> Vec<u32> {
        match self {
            Sampler::IndependentZ(s) => s.sample(stream),
            other => other.draw_permutation(stream).as_zero_based().to_vec(),
        }
    }

    /// One permutation draw; errors for the independent model.
    pub fn draw(&self, stream: &mut RandomStream) -> Result<Permutation> {
        match self {
            Sampler::IndependentZ(_) => Err(Error::Unsupported(
                "the independent model produces maps, not permutations".into(),
            )),
            other => Ok(other.draw_permutation(stream)),
        }
    }

    fn draw_permutation(&self, stream: &mut RandomStream) -> Permutation {
        match self {
            Sampler::Uniform { n } => sample_uniform(*n, stream),
            Sampler::Mallows { n, q } => sample_mallows(*n, *q, stream),
            Sampler::ExpFamily { n, score, theta, mcmc } => sample_exp_family(*n, score, *theta, *mcmc, stream),
            Sampler::MuRandom { n, sampler } => sampler.sample(*n, stream),
            Sampler::FixedPointTilt(s) => s.sample(stream),
            Sampler::IndependentZ(_) => unreachable!("handled by callers"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum QParam {
    Value(f64),
    Beta { beta: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
enum RawModelSpec {
    Uniform {
        n: usize,
    },
    Mallows {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<QParam>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
    },
    ExpFamily {
        n: usize,
        score: ScoreFunction,
        theta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        burn_in: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thin: Option<u64>,
    },
    MuRandom {
        n: usize,
        density: DensitySpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid_k: Option<usize>,
    },
    FixedPointTilt {
        n: usize,
        theta: f64,
    },
    #[serde(rename = "independent_z")]
    IndependentZ {
        n: usize,
        density: DensitySpec,
    },
}

impl TryFrom<RawModelSpec> for ModelSpec {
    type Error = Error;

    fn try_from(raw: RawModelSpec) -> Result<Self> {
        let spec = match raw {
            RawModelSpec::Uniform { n } => ModelSpec::Uniform { n },
            RawModelSpec::Mallows { n, q, beta } => {
                let beta = match (q, beta) {
                    (Some(QParam::Value(q)), None) => return finish(ModelSpec::Mallows { n, q }),
                    (Some(QParam::Beta { beta }), None) | (None, Some(beta)) => beta,
                    (None, None) => return Err(Error::Spec("mallows needs q or beta".into())),
                    (Some(_), Some(_)) => return Err(Error::Spec("give either q or beta, not both".into())),
                };
                if n == 0 || !beta.is_finite() {
                    return Err(Error::Spec("mallows beta needs n ≥ 1 and finite beta".into()));
                }
                ModelSpec::mallows_scaled(n, beta)
            }
            RawModelSpec::ExpFamily { n, score, theta, burn_in, thin } => ModelSpec::ExpFamily {
                n,
                score,
                theta,
                mcmc: McmcConfig { burn_in, thin },
            },
            RawModelSpec::MuRandom { n, density, grid_k } => ModelSpec::MuRandom { n, density, grid_k },
            RawModelSpec::FixedPointTilt { n, theta } => ModelSpec::FixedPointTilt { n, theta },
            RawModelSpec::IndependentZ { n, density } => ModelSpec::IndependentZ { n, density },
        };
        finish(spec)
    }
}

fn finish(spec: ModelSpec) -> Result<ModelSpec> {
    spec.validate()?;
    Ok(spec)
}

impl From<ModelSpec> for RawModelSpec {
    fn from(spec: ModelSpec) -> Self {
        match spec {
            ModelSpec::Uniform { n } => RawModelSpec::Uniform { n },
            ModelSpec::Mallows { n, q } => RawModelSpec::Mallows {
                n,
                q: Some(QParam::Value(q)),
                beta: None,
            },
            ModelSpec::ExpFamily { n, score, theta, mcmc } => RawModelSpec::ExpFamily {
                n,
                score,
                theta,
                burn_in: mcmc.burn_in,
                thin: mcmc.thin,
            },
            ModelSpec::MuRandom { n, density, grid_k } => RawModelSpec::MuRandom { n, density, grid_k },
            ModelSpec::FixedPointTilt { n, theta } => RawModelSpec::FixedPointTilt { n, theta },
            ModelSpec::IndependentZ { n, density } => RawModelSpec::IndependentZ { n, density },
        }
    }
}

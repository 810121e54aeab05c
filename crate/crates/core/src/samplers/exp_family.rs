use serde::{Deserialize, Serialize};

use crate::densities::ScoreFunction;
use crate::perm::Permutation;
use crate::rng::RandomStream;

/// Above this size the score is evaluated on the fly instead of tabulated.
const TABLE_LIMIT: usize = 2048;

/// Burn-in and thinning, counted in proposed swaps. `None` means the defaults `n²` and `n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub burn_in: Option<u64>,
    pub thin: Option<u64>,
}

impl McmcConfig {
    pub fn burn_in_for(&self, n: usize) -> u64 {
        self.burn_in.unwrap_or((n * n) as u64)
    }

    pub fn thin_for(&self, n: usize) -> u64 {
        self.thin.unwrap_or(n as u64).max(1)
    }
}

/// Metropolis chain on `S_n` targeting `Q(π) ∝ exp(θ Σ_i f(i/n, π(i)/n))`
/// with uniformly random transposition proposals.
#[derive(Clone, Debug)]
pub struct ExpFamilyChain {
    n: usize,
    theta: f64,
    score: ScoreFunction,
    table: Option<Vec<f64>>,
    state: Vec<u32>,
    proposed: u64,
    accepted: u64,
}

impl ExpFamilyChain {
    pub fn new(n: usize, score: ScoreFunction, theta: f64, start: Permutation) -> Self {
        assert_eq!(start.len(), n, "start state has the wrong size");
        assert!(theta.is_finite(), "theta must be finite");
        let table = (n <= TABLE_LIMIT).then(|| {
            let nf = n as f64;
            let mut t = Vec::with_capacity(n * n);
            for i in 1..=n {
                for j in 1..=n {
                    t.push(score.eval(i as f64 / nf, j as f64 / nf));
                }
            }
            t
        });
        Self {
            n,
            theta,
            score,
            table,
            state: start.as_zero_based().to_vec(),
            proposed: 0,
            accepted: 0,
        }
    }

    /// Chain started from a uniformly random permutation.
    pub fn from_random_start(n: usize, score: ScoreFunction, theta: f64, stream: &mut RandomStream) -> Self {
        let start = super::sample_uniform(n, stream);
        Self::new(n, score, theta, start)
    }

    fn f(&self, i: usize, j: u32) -> f64 {
        match &self.table {
            Some(t) => t[i * self.n + j as usize],
            None => {
                let nf = self.n as f64;
                self.score.eval((i + 1) as f64 / nf, (j + 1) as f64 / nf)
            }
        }
    }

    /// Change of `Σ_i f(i/n, π(i)/n)` if `π(i)` and `π(j)` were exchanged.
    pub fn swap_delta(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.state[i], self.state[j]);
        self.f(i, b) + self.f(j, a) - self.f(i, a) - self.f(j, b)
    }

    /// Acceptance probability `min(1, e^{θΔ})` of swapping positions `i` and `j`.
    pub fn acceptance(&self, i: usize, j: usize) -> f64 {
        (self.theta * self.swap_delta(i, j)).exp().min(1.0)
    }

    /// One Metropolis step; returns whether the proposal was accepted.
    pub fn step(&mut self, stream: &mut RandomStream) -> bool {
        if self.n < 2 {
            return false;
        }
        self.proposed += 1;
        let i = stream.below(self.n);
        let j = (i + 1 + stream.below(self.n - 1)) % self.n;
        let log_ratio = self.theta * self.swap_delta(i, j);
        if log_ratio >= 0.0 || stream.unit() < log_ratio.exp() {
            self.state.swap(i, j);
            self.accepted += 1;
            true
        } else {
            false
        }
    }

    pub fn advance(&mut self, steps: u64, stream: &mut RandomStream) {
        for _ in 0..steps {
            self.step(stream);
        }
    }

    pub fn state(&self) -> Permutation {
        Permutation::from_zero_based_unchecked(self.state.clone())
    }

    pub fn state_zero_based(&self) -> &[u32] {
        &self.state
    }

    pub fn statistic(&self) -> f64 {
        (0..self.n).map(|i| self.f(i, self.state[i])).sum()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// Burns in, then records `count` states spaced `thin` swaps apart.
    pub fn collect(&mut self, count: usize, mcmc: McmcConfig, stream: &mut RandomStream) -> Vec<Permutation> {
        self.advance(mcmc.burn_in_for(self.n), stream);
        let thin = mcmc.thin_for(self.n);
        (0..count)
            .map(|_| {
                self.advance(thin, stream);
                self.state()
            })
            .collect()
    }
}

/// Independent draw: a fresh chain from a uniform start, run for the burn-in.
pub fn sample_exp_family(
    n: usize,
    score: &ScoreFunction,
    theta: f64,
    mcmc: McmcConfig,
    stream: &mut RandomStream,
) -> Permutation {
    let mut chain = ExpFamilyChain::from_random_start(n, score.clone(), theta, stream);
    chain.advance(mcmc.burn_in_for(n), stream);
    chain.state()
}

/// Lag-`lag` autocorrelation of a statistic trace (mixing diagnostic).
pub fn autocorrelation(trace: &[f64], lag: usize) -> f64 {
    let m = trace.len();
    if lag >= m {
        return f64::NAN;
    }
    let mean = trace.iter().sum::<f64>() / m as f64;
    let var: f64 = trace.iter().map(|v| (v - mean).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let cov: f64 = (0..m - lag)
        .map(|t| (trace[t] - mean) * (trace[t + lag] - mean))
        .sum();
    cov / var
}

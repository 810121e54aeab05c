use rand::distr::Distribution;
use rand_distr::weighted::WeightedAliasIndex;

use crate::densities::Density;
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// The independent model: `Z(p)` for `p = 1..n` drawn independently with
/// `P(Z(p) = q) ∝ ρ(p/n, q/n)`. Collisions are allowed, so a draw is a map
/// `{1..n} → {1..n}` rather than a permutation.
#[derive(Clone, Debug)]
pub struct IndependentZSampler {
    n: usize,
    rows: Vec<Vec<f64>>,
    alias: Vec<WeightedAliasIndex<f64>>,
}

impl IndependentZSampler {
    pub fn new(density: &Density<f64>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("n must be positive".into()));
        }
        let nf = n as f64;
        let mut rows = Vec::with_capacity(n);
        let mut alias = Vec::with_capacity(n);
        for p in 1..=n {
            let weights: Vec<f64> = (1..=n)
                .map(|q| density.eval(p as f64 / nf, q as f64 / nf))
                .collect();
            let total: f64 = weights.iter().sum();
            let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
            alias.push(
                WeightedAliasIndex::new(weights)
                    .map_err(|e| Error::Parameter(format!("row {p}: {e}")))?,
            );
            rows.push(probs);
        }
        Ok(Self { n, rows, alias })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Normalized row law of `Z(p)`, `p` 1-based; entry `q − 1` is `P(Z(p) = q)`.
    pub fn row_probabilities(&self, p: usize) -> &[f64] {
        &self.rows[p - 1]
    }

    /// One draw as a 0-based map: entry `p − 1` holds `Z(p) − 1`.
    pub fn sample(&self, stream: &mut RandomStream) -> Vec<u32> {
        self.alias.iter().map(|a| a.sample(stream) as u32).collect()
    }
}

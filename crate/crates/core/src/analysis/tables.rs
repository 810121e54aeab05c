use serde::{Deserialize, Serialize};

use super::enumerate::{enumerate_model, ExactPmf};
use crate::densities::Density;
use crate::error::{Error, Result};
use crate::perm::IndexTuple;
use crate::samplers::ModelSpec;

/// Upper limit on `|S(n,l)|²`, the number of table cells.
pub const MAX_TABLE_CELLS: usize = 10_000_000;

/// Exact `P(π(p) = q)` for all `p, q ∈ S(n,l)`.
#[derive(Clone, Debug)]
pub struct MarginalTable {
    n: usize,
    l: usize,
    tuples: Vec<IndexTuple>,
    probs: Vec<f64>,
}

impl MarginalTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn tuples(&self) -> &[IndexTuple] {
        &self.tuples
    }

    /// `P(π(tuples[p]) = tuples[q])`.
    pub fn prob(&self, p: usize, q: usize) -> f64 {
        self.probs[p * self.tuples.len() + q]
    }

    pub fn lookup(&self, p: &IndexTuple, q: &IndexTuple) -> Option<f64> {
        let pi = self.tuples.iter().position(|t| t == p)?;
        let qi = self.tuples.iter().position(|t| t == q)?;
        Some(self.prob(pi, qi))
    }

    /// `max_p |Σ_q P(π(p) = q) − 1|`.
    pub fn row_sum_deviation(&self) -> f64 {
        let t = self.tuples.len();
        (0..t)
            .map(|p| (self.probs[p * t..(p + 1) * t].iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `sup_{p,q} |n^l P(π(p) = q) / Π_a ρ(p_a/n, q_a/n) − 1|`.
    pub fn density_ratio_sup(&self, density: &Density<f64>) -> f64 {
        let nf = self.n as f64;
        let scale = nf.powi(self.l as i32);
        let t = self.tuples.len();
        let mut sup = 0.0f64;
        for (pi, p) in self.tuples.iter().enumerate() {
            for (qi, q) in self.tuples.iter().enumerate() {
                let rho: f64 = p
                    .entries()
                    .iter()
                    .zip(q.entries())
                    .map(|(&a, &b)| density.eval(a as f64 / nf, b as f64 / nf))
                    .product();
                sup = sup.max((scale * self.probs[pi * t + qi] / rho - 1.0).abs());
            }
        }
        sup
    }

    /// `max |P(π(p) = q) / P(π(r) = s) − 1|` over `‖p − r‖_∞ ≤ w`, `‖q − s‖_∞ ≤ w`.
    pub fn equi_continuity_ratio(&self, window: usize) -> f64 {
        let t = self.tuples.len();
        let near: Vec<Vec<usize>> = self
            .tuples
            .iter()
            .map(|a| {
                (0..t)
                    .filter(|&b| a.sup_distance(&self.tuples[b]) <= window)
                    .collect()
            })
            .collect();
        let mut worst = 0.0f64;
        for p in 0..t {
            for q in 0..t {
                let num = self.probs[p * t + q];
                for &r in &near[p] {
                    for &s in &near[q] {
                        let den = self.probs[r * t + s];
                        let ratio = if den == 0.0 {
                            if num == 0.0 {
                                1.0
                            } else {
                                f64::INFINITY
                            }
                        } else {
                            num / den
                        };
                        worst = worst.max((ratio - 1.0).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Window `⌊nδ⌋` (with a guard against `nδ` landing just under an integer).
pub fn window_for(n: usize, delta: f64) -> usize {
    (n as f64 * delta + 1e-9).floor() as usize
}

/// Builds the exact `l`-point marginal table of an enumerated law.
pub fn marginal_table(pmf: &ExactPmf<f64>, l: usize) -> Result<MarginalTable> {
    let n = pmf.n();
    if l == 0 || l > n {
        return Err(Error::Parameter(format!("tuple length {l} outside 1..={n}")));
    }
    let tuples = IndexTuple::all(n, l);
    let t = tuples.len();
    if t.saturating_mul(t) > MAX_TABLE_CELLS {
        return Err(Error::TooLarge { n, max: MAX_TABLE_CELLS });
    }
    // dense index over n^l codes
    let code = |e: &[usize]| e.iter().fold(0usize, |acc, &v| acc * n + (v - 1));
    let mut index = vec![usize::MAX; n.pow(l as u32)];
    for (i, tup) in tuples.iter().enumerate() {
        index[code(tup.entries())] = i;
    }
    let mut probs = vec![0.0; t * t];
    let mut image = vec![0usize; l];
    for (perm, &w) in pmf.iter() {
        let targets = perm.as_zero_based();
        for (pi, tup) in tuples.iter().enumerate() {
            for (slot, &e) in image.iter_mut().zip(tup.entries()) {
                *slot = targets[e - 1] as usize + 1;
            }
            probs[pi * t + index[code(&image)]] += w;
        }
    }
    Ok(MarginalTable { n, l, tuples, probs })
}

/// One row of the finite-`n` trend diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub n: usize,
    pub q: f64,
    pub window: usize,
    pub density_ratio: f64,
    pub equi_continuity_ratio: f64,
    /// `max(q, 1/q)^{2l(2w − 1)} − 1`: a transposition of indices at distance
    /// `d` moves `Inv` by at most `2d − 1`, once for positions and once for values.
    pub transposition_bound: f64,
    pub row_sum_deviation: f64,
}

/// Finite-`n` trend for β-scaled Mallows (`q = e^{−β/n}`). Monotonicity is a
/// heuristic diagnostic: the underlying statements are limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub beta: f64,
    pub l: usize,
    pub delta: f64,
    pub rows: Vec<TrendRow>,
    pub density_ratio_non_increasing: bool,
    pub equi_continuity_non_increasing: bool,
    /// All ratios finite and every table row sums to 1 within `1e−12`.
    pub normalized: bool,
    pub note: String,
}

/// Upper bound on the Mallows equi-continuity ratio for `l`-tuples and window `w`.
pub fn transposition_bound(q: f64, l: usize, window: usize) -> f64 {
    if window == 0 {
        return 0.0;
    }
    q.max(q.recip()).powi((2 * l * (2 * window - 1)) as i32) - 1.0
}

pub fn mallows_trend(beta: f64, ns: &[usize], l: usize, delta: f64) -> Result<TrendReport> {
    let density = Density::frank(beta)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let spec = ModelSpec::mallows_scaled(n, beta);
        let q = match spec {
            ModelSpec::Mallows { q, .. } => q,
            _ => unreachable!(),
        };
        let table = marginal_table(&enumerate_model(&spec)?, l)?;
        let window = window_for(n, delta);
        rows.push(TrendRow {
            n,
            q,
            window,
            density_ratio: table.density_ratio_sup(&density),
            equi_continuity_ratio: table.equi_continuity_ratio(window),
            transposition_bound: transposition_bound(q, l, window),
            row_sum_deviation: table.row_sum_deviation(),
        });
    }
    let non_increasing = |f: &dyn Fn(&TrendRow) -> f64| rows.windows(2).all(|w| f(&w[1]) <= f(&w[0]) + 1e-12);
    let density_ratio_non_increasing = non_increasing(&|r| r.density_ratio);
    let equi_continuity_non_increasing = non_increasing(&|r| r.equi_continuity_ratio);
    let normalized = rows.iter().all(|r| {
        r.density_ratio.is_finite() && r.equi_continuity_ratio.is_finite() && r.row_sum_deviation < 1e-12
    });
    Ok(TrendReport {
        beta,
        l,
        delta,
        rows,
        density_ratio_non_increasing,
        equi_continuity_non_increasing,
        normalized,
        note: "finite-n trend only; monotonicity across n is a heuristic, not a proof of the limit".into(),
    })
}

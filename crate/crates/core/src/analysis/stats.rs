use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Minimum expected count per pooled χ² bin.
pub const MIN_EXPECTED_PER_BIN: f64 = 5.0;

/// `(1/2) Σ_j |p_j − q_j|`, shorter vector padded with zeros.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    let at = |v: &[f64], j: usize| v.get(j).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|j| (at(p, j) - at(q, j)).abs()).sum::<f64>()
}

/// Normalized histogram.
pub fn empirical_pmf(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Monte Carlo half-width of a TV estimate, `(1/2) Σ_j sqrt(p̂_j(1 − p̂_j)/R)`.
pub fn tv_half_width(counts: &[u64]) -> f64 {
    let r: u64 = counts.iter().sum();
    let rf = r as f64;
    0.5 * empirical_pmf(counts)
        .iter()
        .map(|&p| (p * (1.0 - p) / rf).sqrt())
        .sum::<f64>()
}

/// Raw moment of order `k` of a histogram, with the standard error of the
/// sample mean of `X^k` (first-order delta method for a plain average).
pub fn raw_moment(counts: &[u64], k: u32) -> (f64, f64) {
    let r: u64 = counts.iter().sum();
    let rf = r as f64;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for (v, &c) in counts.iter().enumerate() {
        let x = (v as f64).powi(k as i32);
        s1 += c as f64 * x;
        s2 += c as f64 * x * x;
    }
    let mean = s1 / rf;
    let var = if r > 1 { ((s2 - rf * mean * mean) / (rf - 1.0)).max(0.0) } else { 0.0 };
    (mean, (var / rf).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareBin {
    /// Smallest value in the bin.
    pub from: usize,
    /// Largest value, `None` for the open upper tail.
    pub to: Option<usize>,
    pub observed: u64,
    pub expected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub bins: Vec<ChiSquareBin>,
}

impl ChiSquareTest {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// Pearson χ² of a histogram against a reference pmf on `0, 1, 2, …`.
///
/// Bins are pooled left to right until each expected count reaches 5; the
/// last bin is the open tail and absorbs the previous bin if it falls short.
/// `fitted` parameters are subtracted from the degrees of freedom.
pub fn chi_square_pooled(counts: &[u64], reference: impl Fn(usize) -> f64, fitted: usize) -> ChiSquareTest {
    let r: u64 = counts.iter().sum();
    let rf = r as f64;
    let mut bins: Vec<ChiSquareBin> = Vec::new();
    let mut open = ChiSquareBin { from: 0, to: None, observed: 0, expected: 0.0 };
    let mut cdf = 0.0;
    let mut closed_cdf = 0.0;
    let mut v = 0usize;
    // close bins while the remaining tail can still fill one more
    loop {
        let p = reference(v);
        let obs = counts.get(v).copied().unwrap_or(0);
        let tail_after = (1.0 - cdf - p).max(0.0) * rf;
        if tail_after < MIN_EXPECTED_PER_BIN && v + 1 >= counts.len() {
            break;
        }
        open.observed += obs;
        open.expected += p * rf;
        cdf += p;
        if open.expected >= MIN_EXPECTED_PER_BIN {
            open.to = Some(v);
            closed_cdf = cdf;
            bins.push(open.clone());
            open = ChiSquareBin { from: v + 1, to: None, observed: 0, expected: 0.0 };
        }
        v += 1;
        if v > 100_000 {
            break;
        }
    }
    // open tail [open.from, ∞)
    open.to = None;
    open.observed = counts.iter().skip(open.from).sum();
    open.expected = (1.0 - closed_cdf).max(0.0) * rf;
    if open.expected < MIN_EXPECTED_PER_BIN {
        if let Some(mut last) = bins.pop() {
            last.to = None;
            last.observed += open.observed;
            last.expected += open.expected;
            open = last;
        }
    }
    bins.push(open);
    let statistic: f64 = bins
        .iter()
        .map(|b| {
            if b.expected > 0.0 {
                (b.observed as f64 - b.expected).powi(2) / b.expected
            } else if b.observed > 0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let dof = bins.len().saturating_sub(1 + fitted);
    let p_value = if dof == 0 {
        f64::NAN
    } else if statistic.is_infinite() {
        0.0
    } else {
        ChiSquared::new(dof as f64)
            .map(|d| d.sf(statistic))
            .unwrap_or(f64::NAN)
    };
    ChiSquareTest { statistic, dof, p_value, bins }
}

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::perm::Permutation;
use crate::rng::RandomStream;
use crate::special::{ln_choose, ln_factorial, log_sum_exp};

/// Number of derangements `D_n`, exactly and as `ln D_n` (`-inf` for `n = 1`).
pub fn derangement_count(n: usize) -> (BigUint, f64) {
    // D_n = (n−1)(D_{n−1} + D_{n−2})
    let mut prev2 = BigUint::one();
    let mut prev1 = BigUint::zero();
    let exact = match n {
        0 => BigUint::one(),
        1 => BigUint::zero(),
        _ => {
            for m in 2..=n {
                let next = BigUint::from(m - 1) * (&prev1 + &prev2);
                prev2 = std::mem::replace(&mut prev1, next);
            }
            prev1
        }
    };
    (exact, ln_derangements(n))
}

/// `ln D_n = ln n! + ln Σ_{k=0}^n (−1)^k / k!`.
pub fn ln_derangements(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => f64::NEG_INFINITY,
        _ => {
            let mut term = 1.0f64;
            let mut sum = 1.0f64;
            for k in 1..=n.min(40) {
                term /= -(k as f64);
                sum += term;
            }
            ln_factorial(n) + sum.ln()
        }
    }
}

/// Exact sampler for `P(π) ∝ e^{θ · #fixed points}`.
#[derive(Clone, Debug)]
pub struct FixedPointTiltSampler {
    n: usize,
    theta: f64,
    // P(K = k), k = 0..=n
    count_pmf: Vec<f64>,
    count_cdf: Vec<f64>,
    log_norm: f64,
}

impl FixedPointTiltSampler {
    pub fn new(n: usize, theta: f64) -> Self {
        assert!(n >= 1, "permutation size must be positive");
        assert!(theta.is_finite(), "theta must be finite");
        let log_w: Vec<f64> = (0..=n)
            .map(|k| theta * k as f64 + ln_choose(n, k) + ln_derangements(n - k))
            .collect();
        let log_norm = log_sum_exp(&log_w);
        let count_pmf: Vec<f64> = log_w.iter().map(|&w| (w - log_norm).exp()).collect();
        let mut acc = 0.0;
        let count_cdf = count_pmf
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        Self {
            n,
            theta,
            count_pmf,
            count_cdf,
            log_norm,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `P(#fixed points = k)` for `k = 0..=n`.
    pub fn fixed_count_pmf(&self) -> &[f64] {
        &self.count_pmf
    }

    /// `Z_n(θ) = ln Σ_π e^{θ N(π)}`.
    pub fn log_normalizer(&self) -> f64 {
        self.log_norm
    }

    pub fn sample(&self, stream: &mut RandomStream) -> Permutation {
        let n = self.n;
        let u = stream.unit() * self.count_cdf[n];
        let k = self
            .count_cdf
            .partition_point(|&c| c <= u)
            .min(n);
        let k = if self.count_pmf[k] > 0.0 { k } else { self.nearest_supported(k) };

        // partial shuffle: the first k entries become the fixed set
        let mut items: Vec<u32> = (0..n as u32).collect();
        for i in 0..k {
            let j = i + stream.below(n - i);
            items.swap(i, j);
        }
        let mut targets = vec![0u32; n];
        for &f in &items[..k] {
            targets[f as usize] = f;
        }
        let rest = &items[k..];
        let local = uniform_derangement(rest.len(), stream);
        for (a, &d) in local.iter().enumerate() {
            targets[rest[a] as usize] = rest[d as usize];
        }
        Permutation::from_zero_based_unchecked(targets)
    }

    fn nearest_supported(&self, k: usize) -> usize {
        (0..k).rev().find(|&j| self.count_pmf[j] > 0.0).unwrap_or(0)
    }
}

/// Uniform derangement of `{0..m-1}` by rejection from uniform shuffles; `m != 1`.
pub(crate) fn uniform_derangement(m: usize, stream: &mut RandomStream) -> Vec<u32> {
    assert!(m != 1, "no derangement of a single element");
    let mut v: Vec<u32> = (0..m as u32).collect();
    loop {
        for i in (1..m).rev() {
            let j = stream.below(i + 1);
            v.swap(i, j);
        }
        if v.iter().enumerate().all(|(i, &t)| i as u32 != t) {
            return v;
        }
        v.iter_mut().enumerate().for_each(|(i, t)| *t = i as u32);
    }
}

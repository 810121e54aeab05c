//! Log-space combinatorics.

use std::sync::OnceLock;

const TABLE: usize = 1024;

fn ln_factorial_table() -> &'static [f64] {
    static CELL: OnceLock<Vec<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln n!`
pub fn ln_factorial(n: usize) -> f64 {
    if n < TABLE {
        ln_factorial_table()[n]
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

/// `ln C(n, k)`, `-inf` when `k > n`.
pub fn ln_choose(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `ln Σ exp(x_i)`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::densities::Density;
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::quadrature::GaussLegendre;
use crate::samplers::ModelSpec;
use crate::special::log_sum_exp;

/// Largest `n` the enumeration oracle accepts.
pub const MAX_ENUMERATION_N: usize = 8;
/// Largest `n` for the μ-random quadrature oracle.
pub const MAX_MU_RANDOM_ENUMERATION_N: usize = 4;
/// Largest `n` for the exact Mallows marginal recursion.
pub const MAX_MARGINAL_DP_N: usize = 4000;

/// Exact law on `S_n`, indexed by lexicographic rank.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPmf<W> {
    n: usize,
    probs: Vec<W>,
}

impl<W> ExactPmf<W> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probability(&self, p: &Permutation) -> &W {
        assert_eq!(p.len(), self.n, "permutation size does not match the pmf");
        &self.probs[p.lex_rank()]
    }

    pub fn probabilities(&self) -> &[W] {
        &self.probs
    }

    /// `(permutation, probability)` in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Permutation, &W)> + '_ {
        Permutation::all(self.n).zip(self.probs.iter())
    }
}

impl ExactPmf<f64> {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn expectation(&self, f: impl Fn(&Permutation) -> f64) -> f64 {
        self.iter().map(|(p, &w)| w * f(&p)).sum()
    }

    /// Total variation distance to an empirical count vector in the same order.
    pub fn tv_to_counts(&self, counts: &[u64]) -> f64 {
        assert_eq!(counts.len(), self.probs.len());
        let total: u64 = counts.iter().sum();
        let t = total as f64;
        0.5 * self
            .probs
            .iter()
            .zip(counts)
            .map(|(&p, &c)| (p - c as f64 / t).abs())
            .sum::<f64>()
    }
}

impl ExactPmf<BigRational> {
    pub fn to_f64(&self) -> ExactPmf<f64> {
        ExactPmf {
            n: self.n,
            probs: self.probs.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect(),
        }
    }

    pub fn total(&self) -> BigRational {
        self.probs.iter().fold(BigRational::zero(), |a, b| a + b)
    }
}

fn check_n(n: usize, max: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    if n > max {
        return Err(Error::TooLarge { n, max });
    }
    Ok(())
}

fn from_log_weights(n: usize, log_w: Vec<f64>) -> ExactPmf<f64> {
    let norm = log_sum_exp(&log_w);
    ExactPmf {
        n,
        probs: log_w.into_iter().map(|w| (w - norm).exp()).collect(),
    }
}

/// Exact law of a permutation model for `n ≤ 8` (μ-random: `n ≤ 4`, by quadrature).
///
/// The μ-random law is renormalized nested Gauss–Legendre quadrature. It is
/// accurate to about `1e−9` for Frank `|β| ≤ 3`, but steep densities lose
/// accuracy quickly at `n ≥ 3` (Frank `β = 20`, `n = 4`: a few percent).
pub fn enumerate_model(spec: &ModelSpec) -> Result<ExactPmf<f64>> {
    spec.validate()?;
    let n = spec.n();
    if let ModelSpec::MuRandom { density, .. } = spec {
        check_n(n, MAX_MU_RANDOM_ENUMERATION_N)?;
        return mu_random_pmf(&density.build()?, n);
    }
    check_n(n, MAX_ENUMERATION_N)?;
    let log_weight: Box<dyn Fn(&Permutation) -> f64> = match spec {
        ModelSpec::Uniform { .. } => Box::new(|_| 0.0),
        ModelSpec::Mallows { q, .. } => {
            let ln_q = q.ln();
            Box::new(move |p| p.inversions() as f64 * ln_q)
        }
        ModelSpec::ExpFamily { score, theta, .. } => {
            let (score, theta) = (score.clone(), *theta);
            let nf = n as f64;
            Box::new(move |p| {
                theta
                    * p.as_zero_based()
                        .iter()
                        .enumerate()
                        .map(|(i, &t)| score.eval((i + 1) as f64 / nf, (t + 1) as f64 / nf))
                        .sum::<f64>()
            })
        }
        ModelSpec::FixedPointTilt { theta, .. } => {
            let theta = *theta;
            Box::new(move |p| theta * p.fixed_points() as f64)
        }
        ModelSpec::IndependentZ { .. } => {
            return Err(Error::Unsupported(
                "the independent model is not a law on permutations".into(),
            ))
        }
        ModelSpec::MuRandom { .. } => unreachable!(),
    };
    let log_w = Permutation::all(n).map(|p| log_weight(&p)).collect();
    Ok(from_log_weights(n, log_w))
}

/// Exact Mallows law with rational `q`; also returns `Z_{n,q} = Σ_π q^{Inv(π)}`.
pub fn enumerate_mallows_exact(n: usize, q: &BigRational) -> Result<(ExactPmf<BigRational>, BigRational)> {
    check_n(n, MAX_ENUMERATION_N)?;
    if *q <= BigRational::zero() {
        return Err(Error::Parameter("q must be positive".into()));
    }
    let max_inv = n * (n - 1) / 2;
    let mut powers = Vec::with_capacity(max_inv + 1);
    let mut acc = BigRational::one();
    for _ in 0..=max_inv {
        powers.push(acc.clone());
        acc *= q;
    }
    let weights: Vec<BigRational> = Permutation::all(n)
        .map(|p| powers[p.inversions() as usize].clone())
        .collect();
    let z = weights.iter().fold(BigRational::zero(), |a, b| a + b);
    let probs = weights.into_iter().map(|w| w / &z).collect();
    Ok((ExactPmf { n, probs }, z))
}

/// `Σ_π q^{Inv(π)}` summed over `S_n` in floating point.
pub fn mallows_weight_sum(n: usize, q: f64) -> Result<f64> {
    check_n(n, MAX_ENUMERATION_N)?;
    Ok(Permutation::all(n).map(|p| q.powi(p.inversions() as i32)).sum())
}

/// Rational from an `f64` given as `num/den`.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// μ-random pattern law:
/// `P(π) = n! ∫_{x_1<⋯<x_n} ∫_{y_1<⋯<y_n} Π_i ρ(x_i, y_{π(i)})`,
/// by nested Gauss–Legendre on both ordered simplices.
fn mu_random_pmf(density: &Density<f64>, n: usize) -> Result<ExactPmf<f64>> {
    if n == 1 {
        return Ok(ExactPmf { n, probs: vec![1.0] });
    }
    let m = match n {
        2 => 32,
        3 => 14,
        _ => 8,
    };
    let simplex = ordered_simplex_rule(n, m);
    let perms: Vec<Permutation> = Permutation::all(n).collect();
    let mut probs = vec![0.0f64; perms.len()];
    let mut rho = vec![0.0f64; n * n];
    for (xs, wx) in &simplex {
        for (ys, wy) in &simplex {
            for i in 0..n {
                for j in 0..n {
                    rho[i * n + j] = density.eval(xs[i], ys[j]);
                }
            }
            let w = wx * wy;
            for (slot, p) in probs.iter_mut().zip(&perms) {
                let prod: f64 = p
                    .as_zero_based()
                    .iter()
                    .enumerate()
                    .map(|(i, &t)| rho[i * n + t as usize])
                    .product();
                *slot += w * prod;
            }
        }
    }
    // the nested rule is not symmetric under relabelling, so the raw masses
    // miss 1 by the quadrature error; renormalize
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(ExactPmf { n, probs })
}

/// Nodes and weights for `∫_{0<t_1<⋯<t_n<1}` (nested `m`-point rules, outermost `t_n`).
fn ordered_simplex_rule(n: usize, m: usize) -> Vec<(Vec<f64>, f64)> {
    let gl = GaussLegendre::<f64>::new(m);
    let mut out = Vec::new();
    let mut current = vec![0.0; n];
    fn recurse(
        gl: &GaussLegendre<f64>,
        level: usize,
        upper: f64,
        weight: f64,
        current: &mut Vec<f64>,
        out: &mut Vec<(Vec<f64>, f64)>,
    ) {
        if level == 0 {
            out.push((current.clone(), weight));
            return;
        }
        for (t, w) in gl.on(0.0, upper) {
            current[level - 1] = t;
            recurse(gl, level - 1, t, weight * w, current, out);
        }
    }
    recurse(&gl, n, 1.0, 1.0, &mut current, &mut out);
    out
}

/// Exact one-point marginals of the Mallows law, `P(π(t) = j)` as a row-major
/// `n × n` matrix (row `t − 1`, column `j − 1`).
///
/// Uses the Lehmer-code form of the model: `π(t)` is the `(d_t + 1)`-th
/// smallest unused value with independent `d_t ∝ q^{d}` on `{0..n−t}`. For a
/// fixed `j` the recursion tracks how many smaller values are still unused.
pub fn mallows_exact_marginals(n: usize, q: f64) -> Result<Vec<f64>> {
    check_n(n, MAX_MARGINAL_DP_N)?;
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::Parameter("q must be positive".into()));
    }
    // pmf[r][d] for d in 0..r, r = remaining count
    let ln_q = q.ln();
    let law: Vec<Vec<f64>> = (0..=n)
        .map(|r| {
            if r == 0 {
                return Vec::new();
            }
            let shift = if q > 1.0 { (r - 1) as f64 * ln_q } else { 0.0 };
            let w: Vec<f64> = (0..r).map(|d| (d as f64 * ln_q - shift).exp()).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|v| v / total).collect()
        })
        .collect();
    let mut out = vec![0.0; n * n];
    let mut state = vec![0.0f64; n];
    let mut next = vec![0.0f64; n];
    for j in 0..n {
        state.iter_mut().for_each(|v| *v = 0.0);
        state[j] = 1.0;
        for t in 0..n {
            let r = n - t;
            let pr = &law[r];
            next.iter_mut().for_each(|v| *v = 0.0);
            let mut below = 0.0;
            for c in 0..r {
                let mass = state[c];
                // P(d < c) accumulated as c grows
                if c > 0 {
                    below += pr[c - 1];
                }
                if mass == 0.0 {
                    continue;
                }
                let hit = pr[c];
                let above = (1.0 - below - hit).max(0.0);
                out[t * n + j] += mass * hit;
                if c > 0 {
                    next[c - 1] += mass * below;
                }
                next[c] += mass * above;
            }
            std::mem::swap(&mut state, &mut next);
        }
    }
    Ok(out)
}

/// `E[#fixed points]` under Mallows, from [`mallows_exact_marginals`].
pub fn mallows_expected_fixed_points(n: usize, q: f64) -> Result<f64> {
    let m = mallows_exact_marginals(n, q)?;
    Ok((0..n).map(|t| m[t * n + t]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_rule_volume() {
        for n in 1..=4 {
            let vol: f64 = ordered_simplex_rule(n, 6).iter().map(|(_, w)| w).sum();
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            assert!((vol - 1.0 / fact).abs() < 1e-14);
        }
    }

    #[test]
    fn marginals_match_enumeration() {
        for &q in &[0.3, 1.0, 2.5] {
            let n = 6;
            let pmf = enumerate_model(&ModelSpec::Mallows { n, q }).unwrap();
            let dp = mallows_exact_marginals(n, q).unwrap();
            for t in 0..n {
                for j in 0..n {
                    let brute: f64 = pmf
                        .iter()
                        .filter(|(p, _)| p.as_zero_based()[t] as usize == j)
                        .map(|(_, &w)| w)
                        .sum();
                    assert!((brute - dp[t * n + j]).abs() < 1e-13, "q={q} t={t} j={j}");
                }
            }
        }
    }

    #[test]
    fn rational_and_float_agree() {
        let (pmf, z) = enumerate_mallows_exact(4, &rational(1, 2)).unwrap();
        assert_eq!(pmf.total(), BigRational::one());
        assert_eq!(z, rational(3 * 7 * 15, 8 * 8)); // Π (1 − 2^{−i})/(1 − 1/2)
        let f = enumerate_model(&ModelSpec::Mallows { n: 4, q: 0.5 }).unwrap();
        for (a, b) in pmf.to_f64().probabilities().iter().zip(f.probabilities()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}

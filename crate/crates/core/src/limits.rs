//! Limiting Poisson parameters, finite-`n` parameters `λ_n`, Poisson moments
//! and Stein total-variation bounds.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::densities::Density;
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;
use crate::special::ln_factorial;

/// Largest moment order with a tabulated Stirling row.
pub const MAX_MOMENT_ORDER: usize = 20;

/// Smallest kernel grid accepted by [`c_rho`].
pub const MIN_KERNEL_GRID: usize = 64;

/// Nodes per Gauss–Legendre panel in the cycle kernel of a closed-form density.
pub const KERNEL_PANEL_ORDER: usize = 8;

/// Largest `n` for which the cycle `λ_n` materializes the `n × n` kernel.
pub const MAX_CYCLE_KERNEL_N: usize = 4096;

/// Which formula produced a Poisson parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// `μ[ρ]` along an explicit permutation.
    MuRho,
    /// Asymptotic `∫ρ(x, x) dx` by quadrature.
    DiagonalIntegral,
    /// `c_ρ(l)`.
    CRho(usize),
    /// `e^θ` for the fixed-point tilt.
    ExpTheta,
    /// Finite-`n` overlap parameter.
    LambdaNOverlap,
    /// Finite-`n` cycle parameter.
    LambdaNCycle(usize),
    /// Exact expectation under the model at this `n`.
    ExactMean,
    /// Fitted to the sample mean.
    EmpiricalMean,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MuRho => write!(f, "mu_rho"),
            Self::DiagonalIntegral => write!(f, "diagonal_integral"),
            Self::CRho(l) => write!(f, "c_rho({l})"),
            Self::ExpTheta => write!(f, "exp_theta"),
            Self::LambdaNOverlap => write!(f, "lambda_n_overlap"),
            Self::LambdaNCycle(l) => write!(f, "lambda_n_cycle({l})"),
            Self::ExactMean => write!(f, "exact_mean"),
            Self::EmpiricalMean => write!(f, "empirical_mean"),
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let with_l = |prefix: &str| -> Option<usize> {
            s.strip_prefix(prefix)?.strip_suffix(')')?.parse().ok()
        };
        Ok(match s {
            "mu_rho" => Self::MuRho,
            "diagonal_integral" => Self::DiagonalIntegral,
            "exp_theta" => Self::ExpTheta,
            "lambda_n_overlap" => Self::LambdaNOverlap,
            "exact_mean" => Self::ExactMean,
            "empirical_mean" => Self::EmpiricalMean,
            _ => {
                if let Some(l) = with_l("c_rho(") {
                    Self::CRho(l)
                } else if let Some(l) = with_l("lambda_n_cycle(") {
                    Self::LambdaNCycle(l)
                } else {
                    return Err(Error::Spec(format!("unknown provenance {s:?}")));
                }
            }
        })
    }
}

impl Serialize for Provenance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Provenance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonSpec {
    pub lambda: f64,
    pub provenance: Provenance,
}

impl PoissonSpec {
    pub fn new(lambda: f64, provenance: Provenance) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Parameter(format!("Poisson mean must be positive, got {lambda}")));
        }
        Ok(Self { lambda, provenance })
    }
}

/// Statistic a Stein bound refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `M_n(σ)`, overlaps of the independent model with `σ`.
    Overlap,
    /// `D_n(l)`, `l`-cycles of the independent model.
    Cycle(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinBound {
    pub lambda_n: f64,
    pub tv_bound: f64,
    pub regime: Regime,
}

/// Discrete `μ[ρ]` for the empirical permuton of `σ`: `(1/n) Σ_i ρ(i/n, σ(i)/n)`.
pub fn mu_rho_along<T: Real>(density: &Density<T>, sigma: &Permutation) -> T {
    let n = sigma.len();
    let nf = T::from_count(n);
    let total: T = sigma
        .as_zero_based()
        .iter()
        .enumerate()
        .map(|(i, &s)| density.eval(T::from_count(i + 1) / nf, T::from_count(s as usize + 1) / nf))
        .sum();
    total / nf
}

/// `∫_0^1 ρ(x, φ(x)) dx` by composite Gauss–Legendre; `φ` is the limit curve of `σ_n`.
pub fn mu_rho_curve<T: Real>(density: &Density<T>, curve: impl Fn(T) -> T) -> T {
    let panels = match density.kind() {
        crate::densities::DensityKind::Grid(g) => g.k(),
        crate::densities::DensityKind::ExpFamily(f) => f.grid().k(),
        _ => 256,
    };
    GaussLegendre::new(8).composite(T::zero(), T::one(), panels, |x| density.eval(x, curve(x)))
}

/// Asymptotic overlap parameter along the identity, `∫ρ(x, x) dx`.
pub fn diagonal_integral<T: Real>(density: &Density<T>) -> T {
    mu_rho_curve(density, |x| x)
}

/// `n × n` row-normalized kernel `W[p][q] = ρ(p/n, q/n) / Σ_s ρ(p/n, s/n)`, row-major.
pub fn row_kernel<T: Real>(density: &Density<T>, n: usize) -> Vec<T> {
    let nf = T::from_count(n);
    let mut w = vec![T::zero(); n * n];
    w.par_chunks_mut(n.max(1)).enumerate().for_each(|(p, row)| {
        let x = T::from_count(p + 1) / nf;
        for (q, v) in row.iter_mut().enumerate() {
            *v = density.eval(x, T::from_count(q + 1) / nf);
        }
        let total: T = row.iter().copied().sum();
        row.iter_mut().for_each(|v| *v = *v / total);
    });
    w
}

/// `λ_n = Σ_p ρ(p/n, σ(p)/n) / Σ_q ρ(p/n, q/n)`, the mean of `M_n(σ)`.
pub fn lambda_n_overlap<T: Real>(density: &Density<T>, sigma: &Permutation) -> T {
    let n = sigma.len();
    let nf = T::from_count(n);
    sigma
        .as_zero_based()
        .par_iter()
        .enumerate()
        .map(|(p, &s)| {
            let x = T::from_count(p + 1) / nf;
            let row: T = (1..=n).map(|q| density.eval(x, T::from_count(q) / nf)).sum();
            density.eval(x, T::from_count(s as usize + 1) / nf) / row
        })
        .collect::<Vec<T>>()
        .into_iter()
        .sum()
}

/// `λ_n = (1/l) Σ_{p ∈ S(n,l)} W[p_1,p_2] ⋯ W[p_l,p_1]`, the mean of `D_n(l)`.
///
/// Closed trace corrections cover `l ≤ 3`; larger `l` enumerates distinct
/// tuples and is limited to `n^l ≤ 10^8`.
pub fn lambda_n_cycle<T: Real>(density: &Density<T>, n: usize, l: usize) -> Result<T> {
    if l == 0 {
        return Err(Error::Parameter("cycle length must be at least 1".into()));
    }
    if l > n {
        return Ok(T::zero());
    }
    if n > MAX_CYCLE_KERNEL_N {
        return Err(Error::TooLarge { n, max: MAX_CYCLE_KERNEL_N });
    }
    let w = row_kernel(density, n);
    let at = |i: usize, j: usize| w[i * n + j];
    let diag: Vec<T> = (0..n).map(|i| at(i, i)).collect();
    // (W²)_pp
    let sq_diag: Vec<T> = (0..n).map(|p| (0..n).map(|j| at(p, j) * at(j, p)).sum()).collect();
    let lt = T::from_count(l);
    let total = match l {
        1 => diag.iter().copied().sum(),
        2 => sq_diag.iter().copied().sum::<T>() - diag.iter().map(|&d| d * d).sum::<T>(),
        3 => {
            let w2 = matmul(&w, &w, n);
            let tr3: T = (0..n).map(|i| (0..n).map(|j| w2[i * n + j] * at(j, i)).sum::<T>()).sum();
            let s: T = (0..n).map(|p| diag[p] * sq_diag[p]).sum();
            let t: T = diag.iter().map(|&d| d * d * d).sum();
            tr3 - T::lit(3.0) * s + T::lit(2.0) * t
        }
        _ => {
            let states = (n as f64).powi(l as i32);
            if states > 1e8 {
                return Err(Error::TooLarge { n, max: (1e8f64.powf(1.0 / l as f64)) as usize });
            }
            let mut tuple = Vec::with_capacity(l);
            let mut used = vec![false; n];
            cycle_sum(&w, n, l, &mut tuple, &mut used, T::one())
        }
    };
    Ok(total / lt)
}

fn cycle_sum<T: Real>(w: &[T], n: usize, l: usize, tuple: &mut Vec<usize>, used: &mut [bool], acc: T) -> T {
    if tuple.len() == l {
        return acc * w[tuple[l - 1] * n + tuple[0]];
    }
    let mut total = T::zero();
    for next in 0..n {
        if used[next] {
            continue;
        }
        let factor = match tuple.last() {
            Some(&prev) => w[prev * n + next],
            None => T::one(),
        };
        used[next] = true;
        tuple.push(next);
        total = total + cycle_sum(w, n, l, tuple, used, acc * factor);
        tuple.pop();
        used[next] = false;
    }
    total
}

/// `c_ρ(l) = trace(A^l) / l` for the Nyström kernel `A_ij = sqrt(w_i w_j) ρ(x_i, x_j)`.
///
/// Closed-form densities use composite Gauss–Legendre nodes, `k` rounded up
/// to a multiple of [`KERNEL_PANEL_ORDER`]. Grid densities are piecewise
/// constant, so their own cell midpoints give the exact trace and `k` is
/// only range-checked.
pub fn c_rho<T: Real>(density: &Density<T>, l: usize, k: usize) -> Result<T> {
    Ok(c_rho_range(density, l, k)?[l - 1])
}

/// `c_ρ(1), …, c_ρ(l_max)` from one kernel; powers are built incrementally.
pub fn c_rho_range<T: Real>(density: &Density<T>, l_max: usize, k: usize) -> Result<Vec<T>> {
    if l_max == 0 {
        return Err(Error::Parameter("cycle length must be at least 1".into()));
    }
    if k < MIN_KERNEL_GRID {
        return Err(Error::Parameter(format!("kernel grid must be at least {MIN_KERNEL_GRID}, got {k}")));
    }
    let (a, k) = cycle_kernel(density, k);
    let mut out = Vec::with_capacity(l_max);
    out.push(trace(&a, k));
    let mut power = a.clone();
    for l in 2..=l_max {
        if l == l_max {
            out.push(trace_of_product(&power, &a, k) / T::from_count(l));
        } else {
            power = matmul(&power, &a, k);
            out.push(trace(&power, k) / T::from_count(l));
        }
    }
    Ok(out)
}

/// `c_ρ(l)` for a single large `l` via repeated squaring.
pub fn c_rho_squaring<T: Real>(density: &Density<T>, l: usize, k: usize) -> Result<T> {
    if l == 0 {
        return Err(Error::Parameter("cycle length must be at least 1".into()));
    }
    if k < MIN_KERNEL_GRID {
        return Err(Error::Parameter(format!("kernel grid must be at least {MIN_KERNEL_GRID}, got {k}")));
    }
    let (mut base, k) = cycle_kernel(density, k);
    let mut acc: Option<Vec<T>> = None;
    let mut e = l;
    // keep the final multiply as a trace of a product
    let mut pending: Vec<Vec<T>> = Vec::new();
    while e > 0 {
        if e & 1 == 1 {
            pending.push(base.clone());
        }
        e >>= 1;
        if e > 0 {
            base = matmul(&base, &base, k);
        }
    }
    let last = pending.pop().expect("l >= 1");
    for m in pending {
        acc = Some(match acc {
            None => m,
            Some(a) => matmul(&a, &m, k),
        });
    }
    let tr = match acc {
        None => trace(&last, k),
        Some(a) => trace_of_product(&a, &last, k),
    };
    Ok(tr / T::from_count(l))
}

/// Symmetric Nyström kernel and its size.
fn cycle_kernel<T: Real>(density: &Density<T>, k: usize) -> (Vec<T>, usize) {
    if let Some(g) = density.as_grid() {
        let kg = g.k();
        let inv = T::from_count(kg).recip();
        return (g.values().iter().map(|&v| v * inv).collect(), kg);
    }
    let panels = k.div_ceil(KERNEL_PANEL_ORDER);
    let gl = GaussLegendre::<T>::new(KERNEL_PANEL_ORDER);
    let width = T::from_count(panels).recip();
    let mut nodes = Vec::with_capacity(panels * KERNEL_PANEL_ORDER);
    for p in 0..panels {
        let lo = T::from_count(p) * width;
        nodes.extend(gl.on(lo, lo + width).map(|(x, w)| (x, w.sqrt())));
    }
    let size = nodes.len();
    let mut a = vec![T::zero(); size * size];
    a.par_chunks_mut(size).enumerate().for_each(|(i, row)| {
        let (x, sx) = nodes[i];
        for (v, &(y, sy)) in row.iter_mut().zip(&nodes) {
            *v = sx * density.eval(x, y) * sy;
        }
    });
    (a, size)
}

fn trace<T: Real>(a: &[T], k: usize) -> T {
    (0..k).map(|i| a[i * k + i]).sum()
}

// tr(BC) = Σ_ij B_ij C_ji
fn trace_of_product<T: Real>(b: &[T], c: &[T], k: usize) -> T {
    (0..k)
        .map(|i| (0..k).map(|j| b[i * k + j] * c[j * k + i]).sum::<T>())
        .sum()
}

fn matmul<T: Real>(a: &[T], b: &[T], k: usize) -> Vec<T> {
    let mut out = vec![T::zero(); k * k];
    out.par_chunks_mut(k).enumerate().for_each(|(i, row)| {
        for (p, &aip) in a[i * k..(i + 1) * k].iter().enumerate() {
            let brow = &b[p * k..(p + 1) * k];
            for (o, &bv) in row.iter_mut().zip(brow) {
                *o = *o + aip * bv;
            }
        }
    });
    out
}

/// Stein total-variation bound for the independent model:
/// `(1/n)(M/m)²` for overlaps with `σ` (identity if `None`) and
/// `(1/n)(M/m)^{2l}` for `l`-cycles.
pub fn stein_tv_bound(
    density: &Density<f64>,
    n: usize,
    regime: Regime,
    sigma: Option<&Permutation>,
) -> Result<SteinBound> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    let (m, big_m) = density.bounds();
    let ratio = big_m / m;
    let (lambda_n, power) = match regime {
        Regime::Overlap => {
            let identity;
            let s = match sigma {
                Some(s) => {
                    if s.len() != n {
                        return Err(Error::SizeMismatch { left: n, right: s.len() });
                    }
                    s
                }
                None => {
                    identity = Permutation::identity(n);
                    &identity
                }
            };
            (lambda_n_overlap(density, s), 2)
        }
        Regime::Cycle(l) => (lambda_n_cycle(density, n, l)?, 2 * l),
    };
    Ok(SteinBound {
        lambda_n,
        tv_bound: ratio.powi(power as i32) / n as f64,
        regime,
    })
}

/// Row `k` of the Stirling numbers of the second kind, `S(k, 0..=k)`.
pub fn stirling2_row(k: usize) -> Result<Vec<u64>> {
    if k > MAX_MOMENT_ORDER {
        return Err(Error::Unsupported(format!(
            "moment order {k} exceeds the tabulated maximum {MAX_MOMENT_ORDER}"
        )));
    }
    let mut row = vec![1u64];
    for m in 1..=k {
        let mut next = vec![0u64; m + 1];
        for j in 1..=m {
            let keep = if j < m { j as u64 * row[j] } else { 0 };
            next[j] = keep + row[j - 1];
        }
        row = next;
    }
    Ok(row)
}

/// Touchard moment `E[Poi(λ)^k] = Σ_j S(k, j) λ^j`, `k ≤ 20`.
pub fn poisson_moment(lambda: f64, k: usize) -> Result<f64> {
    let row = stirling2_row(k)?;
    Ok(row.iter().rev().fold(0.0, |acc, &s| acc * lambda + s as f64))
}

/// `e^{−λ} λ^j / j!` evaluated in log space.
pub fn poisson_pmf(lambda: f64, j: usize) -> f64 {
    if lambda == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    (-lambda + j as f64 * lambda.ln() - ln_factorial(j)).exp()
}

/// Poisson pmf on `0..=J`, with `J` the first index past the mean whose upper tail is below `tail`.
pub fn poisson_pmf_table(lambda: f64, tail: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut cum = 0.0;
    let mut j = 0usize;
    loop {
        let p = poisson_pmf(lambda, j);
        out.push(p);
        cum += p;
        if j as f64 > lambda && 1.0 - cum < tail {
            break;
        }
        j += 1;
        if j > 10_000 {
            break;
        }
    }
    out
}

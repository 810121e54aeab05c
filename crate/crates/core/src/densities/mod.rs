//! Strictly positive densities on the unit square with uniform marginals.
//!
//! Grid-backed densities store one value per cell of the partition
//! `((i-1)/k, i/k] × ((j-1)/k, j/k]` and are piecewise constant, so their
//! marginals are exact cell averages. Closed forms are evaluated pointwise.
//! Discretizations use midpoint nodes `(i - 1/2)/k`.

mod frank;
mod ipf;
mod score;

use std::io::{BufRead, Write};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use frank::{frank_eval, FRANK_SERIES_CUTOFF, MAX_FRANK_BETA};
pub use ipf::{ipf_balance, IpfOptions, IpfOutcome};
pub use score::ScoreFunction;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;

/// Node count per axis of the scan used for closed-form bounds.
pub const BOUNDS_SCAN_RESOLUTION: usize = 1024;

/// Marginal tolerance for densities accepted from user grids.
pub const GRID_MARGINAL_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub enum DensityKind<T> {
    Uniform,
    Frank { beta: T },
    Grid(GridDensity<T>),
    ExpFamily(ExpFamilyFit<T>),
}

/// Piecewise-constant density on a `k × k` grid, row index along `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity<T> {
    k: usize,
    values: Vec<T>,
}

impl<T: Real> GridDensity<T> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, row: usize, col: usize) -> T {
        self.values[row * self.k + col]
    }

    fn cell(&self, t: T) -> usize {
        // cell ((i-1)/k, i/k]; t = 0 belongs to the first cell
        let idx = (t * T::from_count(self.k)).ceil().to_usize().unwrap_or(0);
        idx.clamp(1, self.k) - 1
    }

    fn eval(&self, x: T, y: T) -> T {
        self.value(self.cell(x), self.cell(y))
    }
}

/// Fitted `g(x, y) = exp(θ f(x, y) + a(x) + b(y))` on the fitting grid.
#[derive(Clone, Debug)]
pub struct ExpFamilyFit<T> {
    score: ScoreFunction,
    theta: T,
    grid: GridDensity<T>,
    row_log: Vec<T>,
    col_log: Vec<T>,
    sweeps: usize,
    kl_history: Vec<T>,
}

impl<T: Real> ExpFamilyFit<T> {
    pub fn score(&self) -> &ScoreFunction {
        &self.score
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn grid(&self) -> &GridDensity<T> {
        &self.grid
    }

    /// `(a(x_i), b(y_j))` at the midpoint nodes.
    pub fn log_corrections(&self) -> (&[T], &[T]) {
        (&self.row_log, &self.col_log)
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn kl_history(&self) -> &[T] {
        &self.kl_history
    }
}

/// A density `ρ ∈ 𝒞` with cached bounds `0 < m <= ρ <= M`.
#[derive(Clone, Debug)]
pub struct Density<T> {
    kind: DensityKind<T>,
    bounds: OnceLock<(T, T)>,
}

impl<T: Real> Density<T> {
    pub fn uniform() -> Self {
        Self::from_kind(DensityKind::Uniform)
    }

    pub fn frank(beta: T) -> Result<Self> {
        frank::check_beta(beta)?;
        Ok(Self::from_kind(DensityKind::Frank { beta }))
    }

    /// Grid density from `k × k` cell values. Values are rescaled to unit mass;
    /// the marginals must already be uniform within [`GRID_MARGINAL_TOLERANCE`].
    pub fn grid(k: usize, values: Vec<T>) -> Result<Self> {
        let grid = normalized_grid(k, values)?;
        let density = Self::from_kind(DensityKind::Grid(grid));
        let dev = density.marginal_deviation(k);
        if dev > T::lit(GRID_MARGINAL_TOLERANCE) {
            return Err(Error::Parameter(format!(
                "grid marginals deviate from uniform by {dev:e}; use Density::grid_balanced"
            )));
        }
        Ok(density)
    }

    /// Grid density from arbitrary positive cell values, balanced to uniform marginals by IPF.
    pub fn grid_balanced(k: usize, values: Vec<T>) -> Result<Self> {
        let grid = normalized_grid(k, values)?;
        let out = ipf_balance(k, &grid.values, IpfOptions::default())?;
        let k2 = T::from_count(k * k);
        let values = out.masses.iter().map(|&m| m * k2).collect();
        Ok(Self::from_kind(DensityKind::Grid(GridDensity { k, values })))
    }

    /// Realizes `g_{f,θ}` on a `k × k` midpoint grid by iterative proportional fitting.
    pub fn fit_exp_family(score: ScoreFunction, theta: T, k: usize) -> Result<Self> {
        if k < 8 {
            return Err(Error::Parameter(format!("fitting grid k = {k} must be at least 8")));
        }
        if !theta.is_finite() {
            return Err(Error::Parameter("theta must be finite".into()));
        }
        let kt = T::from_count(k);
        let half = T::lit(0.5);
        let mut exponents = Vec::with_capacity(k * k);
        for i in 0..k {
            let x = (T::from_count(i) + half) / kt;
            for j in 0..k {
                let y = (T::from_count(j) + half) / kt;
                exponents.push(theta * score.eval(x, y));
            }
        }
        if exponents.iter().any(|e| !e.is_finite()) {
            return Err(Error::Parameter("score function is not finite on the grid".into()));
        }
        let shift = exponents.iter().copied().fold(T::neg_infinity(), T::max);
        let kernel: Vec<T> = exponents.iter().map(|&e| (e - shift).exp()).collect();
        let out = ipf_balance(k, &kernel, IpfOptions::default())?;

        // ln g = θf + (α_i + c) + (β_j + c), c = ln k − shift/2
        let c = kt.ln() - shift * half;
        let row_log = out.row_log.iter().map(|&a| a + c).collect();
        let col_log = out.col_log.iter().map(|&b| b + c).collect();
        let k2 = T::from_count(k * k);
        let values = out.masses.iter().map(|&m| m * k2).collect();
        Ok(Self::from_kind(DensityKind::ExpFamily(ExpFamilyFit {
            score,
            theta,
            grid: GridDensity { k, values },
            row_log,
            col_log,
            sweeps: out.sweeps,
            kl_history: out.kl_history,
        })))
    }

    fn from_kind(kind: DensityKind<T>) -> Self {
        Self {
            kind,
            bounds: OnceLock::new(),
        }
    }

    pub fn kind(&self) -> &DensityKind<T> {
        &self.kind
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, DensityKind::Uniform)
    }

    /// The backing grid, for grid and fitted kinds.
    pub fn as_grid(&self) -> Option<&GridDensity<T>> {
        match &self.kind {
            DensityKind::Grid(g) => Some(g),
            DensityKind::ExpFamily(fit) => Some(&fit.grid),
            _ => None,
        }
    }

    /// `ρ(x, y)` for `(x, y)` in the unit square (not range-checked).
    pub fn eval(&self, x: T, y: T) -> T {
        match &self.kind {
            DensityKind::Uniform => T::one(),
            DensityKind::Frank { beta } => frank::frank_unchecked(*beta, x, y),
            DensityKind::Grid(g) => g.eval(x, y),
            DensityKind::ExpFamily(fit) => fit.grid.eval(x, y),
        }
    }

    /// `(m, M)` = (infimum, supremum) of the density.
    ///
    /// Grid kinds use the exact extreme entries. Closed forms are scanned on a
    /// `(R+1) × (R+1)` lattice including the boundary, `R = BOUNDS_SCAN_RESOLUTION`,
    /// then the extreme nodes are refined on a 64 × 64 lattice spanning their
    /// neighbouring cells. No further margin is added.
    pub fn bounds(&self) -> (T, T) {
        *self.bounds.get_or_init(|| match &self.kind {
            DensityKind::Uniform => (T::one(), T::one()),
            DensityKind::Grid(g) => extremes(&g.values),
            DensityKind::ExpFamily(fit) => extremes(&fit.grid.values),
            DensityKind::Frank { .. } => scan_bounds(|x, y| self.eval(x, y), BOUNDS_SCAN_RESOLUTION),
        })
    }

    /// Max over rows and columns of `|∫ρ − 1|`, at `k` midpoint abscissae for
    /// closed forms and over every cell row/column for grid kinds.
    pub fn marginal_deviation(&self, k: usize) -> T {
        match &self.kind {
            DensityKind::Uniform => T::zero(),
            DensityKind::Grid(g) => grid_marginal_deviation(g),
            DensityKind::ExpFamily(fit) => grid_marginal_deviation(&fit.grid),
            DensityKind::Frank { beta } => {
                let gl = GaussLegendre::<T>::new(6);
                let panels = 64.max((beta.abs().to_f64_lossy() * 4.0).ceil() as usize);
                let kt = T::from_count(k);
                let mut worst = T::zero();
                for i in 0..k {
                    let x = (T::from_count(i) + T::lit(0.5)) / kt;
                    let row = gl.composite(T::zero(), T::one(), panels, |y| self.eval(x, y));
                    let col = gl.composite(T::zero(), T::one(), panels, |y| self.eval(y, x));
                    worst = worst.max((row - T::one()).abs()).max((col - T::one()).abs());
                }
                worst
            }
        }
    }

    /// Cell masses `μ_ρ[I_i × I_j]` on a `k × k` grid, row-major, summing to one.
    pub fn cell_masses(&self, k: usize) -> Vec<T> {
        let kt = T::from_count(k);
        let area = (kt * kt).recip();
        let mut masses = match (&self.kind, self.as_grid()) {
            (DensityKind::Uniform, _) => vec![area; k * k],
            (_, Some(g)) if g.k == k => g.values.iter().map(|&v| v * area).collect(),
            _ => {
                let gl = GaussLegendre::<T>::new(3);
                let mut out = Vec::with_capacity(k * k);
                for i in 0..k {
                    let x0 = T::from_count(i) / kt;
                    for j in 0..k {
                        let y0 = T::from_count(j) / kt;
                        let mut m = T::zero();
                        for (x, wx) in gl.on(x0, x0 + kt.recip()) {
                            for (y, wy) in gl.on(y0, y0 + kt.recip()) {
                                m = m + wx * wy * self.eval(x, y);
                            }
                        }
                        out.push(m);
                    }
                }
                out
            }
        };
        let total: T = masses.iter().copied().sum();
        masses.iter_mut().for_each(|m| *m = *m / total);
        masses
    }

    /// Parameter form used for JSON round trips.
    pub fn spec(&self) -> DensitySpec {
        match &self.kind {
            DensityKind::Uniform => DensitySpec::Uniform,
            DensityKind::Frank { beta } => DensitySpec::Frank {
                beta: beta.to_f64_lossy(),
            },
            DensityKind::Grid(g) => DensitySpec::Grid {
                values: g
                    .values
                    .chunks(g.k)
                    .map(|r| r.iter().map(|v| v.to_f64_lossy()).collect())
                    .collect(),
                balance: false,
            },
            DensityKind::ExpFamily(fit) => DensitySpec::ExpFamily {
                score: fit.score.clone(),
                theta: fit.theta.to_f64_lossy(),
                k: fit.grid.k,
            },
        }
    }

    /// Writes the backing grid as `k` CSV rows of `k` values.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let g = self
            .as_grid()
            .ok_or_else(|| Error::Unsupported("only grid-backed densities serialize to CSV".into()))?;
        for row in g.values.chunks(g.k) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Reads a square CSV grid; balances it when `balance` is set.
    pub fn read_csv<R: BufRead>(input: R, balance: bool) -> Result<Self> {
        let rows = parse_csv_rows(input)?;
        let k = rows.len();
        let values = rows
            .into_iter()
            .flatten()
            .map(|v| T::from_f64(v).ok_or_else(|| Error::Spec("value not representable".into())))
            .collect::<Result<Vec<T>>>()?;
        if balance {
            Self::grid_balanced(k, values)
        } else {
            Self::grid(k, values)
        }
    }
}

pub(crate) fn parse_csv_rows<R: BufRead>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Spec(format!("bad CSV value {s:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let k = rows.len();
    if k == 0 || rows.iter().any(|r| r.len() != k) {
        return Err(Error::Spec("grid CSV must be a non-empty square matrix".into()));
    }
    Ok(rows)
}

fn normalized_grid<T: Real>(k: usize, values: Vec<T>) -> Result<GridDensity<T>> {
    if k == 0 || values.len() != k * k {
        return Err(Error::Parameter(format!(
            "grid needs k*k = {} values, got {}",
            k * k,
            values.len()
        )));
    }
    if values.iter().any(|&v| v <= T::zero() || !v.is_finite()) {
        return Err(Error::Parameter("grid density must be strictly positive and finite".into()));
    }
    let mean = values.iter().copied().sum::<T>() / T::from_count(k * k);
    Ok(GridDensity {
        k,
        values: values.into_iter().map(|v| v / mean).collect(),
    })
}

fn grid_marginal_deviation<T: Real>(g: &GridDensity<T>) -> T {
    let kt = T::from_count(g.k);
    let mut worst = T::zero();
    for i in 0..g.k {
        let row: T = g.values[i * g.k..(i + 1) * g.k].iter().copied().sum::<T>() / kt;
        let col: T = (0..g.k).map(|r| g.value(r, i)).sum::<T>() / kt;
        worst = worst.max((row - T::one()).abs()).max((col - T::one()).abs());
    }
    worst
}

fn extremes<T: Real>(values: &[T]) -> (T, T) {
    values.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

fn scan_bounds<T: Real>(f: impl Fn(T, T) -> T, resolution: usize) -> (T, T) {
    let r = T::from_count(resolution);
    let mut lo = (T::infinity(), T::zero(), T::zero());
    let mut hi = (T::neg_infinity(), T::zero(), T::zero());
    for i in 0..=resolution {
        let x = T::from_count(i) / r;
        for j in 0..=resolution {
            let y = T::from_count(j) / r;
            let v = f(x, y);
            if v < lo.0 {
                lo = (v, x, y);
            }
            if v > hi.0 {
                hi = (v, x, y);
            }
        }
    }
    let refine = |(v0, x0, y0): (T, T, T), better: &dyn Fn(T, T) -> bool| {
        let mut best = v0;
        let steps = 64;
        let h = r.recip();
        for a in 0..=steps {
            let x = (x0 - h + (h + h) * T::from_count(a) / T::from_count(steps)).max(T::zero()).min(T::one());
            for b in 0..=steps {
                let y = (y0 - h + (h + h) * T::from_count(b) / T::from_count(steps)).max(T::zero()).min(T::one());
                let v = f(x, y);
                if better(v, best) {
                    best = v;
                }
            }
        }
        best
    };
    let m = refine(lo, &|v, b| v < b);
    let big_m = refine(hi, &|v, b| v > b);
    (m, big_m)
}

/// JSON parameter form: `{"kind": "frank", "beta": 2.0}` and friends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Uniform,
    Frank {
        beta: f64,
    },
    Grid {
        values: Vec<Vec<f64>>,
        #[serde(default)]
        balance: bool,
    },
    ExpFamily {
        score: ScoreFunction,
        theta: f64,
        #[serde(default = "default_fit_k")]
        k: usize,
    },
}

pub const DEFAULT_FIT_K: usize = 128;

fn default_fit_k() -> usize {
    DEFAULT_FIT_K
}

impl DensitySpec {
    pub fn build<T: Real>(&self) -> Result<Density<T>> {
        let conv = |v: f64| T::from_f64(v).ok_or_else(|| Error::Spec(format!("{v} not representable")));
        match self {
            DensitySpec::Uniform => Ok(Density::uniform()),
            DensitySpec::Frank { beta } => Density::frank(conv(*beta)?),
            DensitySpec::Grid { values, balance } => {
                let k = values.len();
                if values.iter().any(|r| r.len() != k) {
                    return Err(Error::Spec("grid values must be a square matrix".into()));
                }
                let flat = values
                    .iter()
                    .flatten()
                    .map(|&v| conv(v))
                    .collect::<Result<Vec<T>>>()?;
                if *balance {
                    Density::grid_balanced(k, flat)
                } else {
                    Density::grid(k, flat)
                }
            }
            DensitySpec::ExpFamily { score, theta, k } => {
                Density::fit_exp_family(score.clone(), conv(*theta)?, *k)
            }
        }
    }
}

impl<T: Real> Serialize for Density<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.spec().serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Density<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = DensitySpec::deserialize(d)?;
        spec.build().map_err(serde::de::Error::custom)
    }
}

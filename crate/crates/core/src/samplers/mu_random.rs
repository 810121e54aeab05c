use crate::densities::Density;
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::rng::RandomStream;

/// Grid resolution used for closed-form densities.
pub const DEFAULT_MU_RANDOM_GRID: usize = 512;

/// Marginal tolerance a density must meet before it is sampled from.
pub const SAMPLER_MARGINAL_TOLERANCE: f64 = 1e-5;

/// μ-random permutations: rank patterns of `n` i.i.d. points from a density.
///
/// Points are drawn by grid inverse CDF (x cell from the row masses, y cell
/// from the conditional row) with uniform jitter inside the cell.
#[derive(Clone, Debug)]
pub struct MuRandomSampler {
    k: usize,
    uniform: bool,
    row_cdf: Vec<f64>,
    // per-row conditional CDFs, row-major
    cond_cdf: Vec<f64>,
}

impl MuRandomSampler {
    pub fn new(density: &Density<f64>, grid_k: Option<usize>) -> Result<Self> {
        let dev = density.marginal_deviation(512);
        if dev > SAMPLER_MARGINAL_TOLERANCE {
            return Err(Error::Parameter(format!(
                "density marginals deviate from uniform by {dev:e}"
            )));
        }
        let k = grid_k
            .or_else(|| density.as_grid().map(|g| g.k()))
            .unwrap_or(DEFAULT_MU_RANDOM_GRID);
        if k == 0 {
            return Err(Error::Parameter("grid resolution must be positive".into()));
        }
        if density.is_uniform() {
            return Ok(Self {
                k,
                uniform: true,
                row_cdf: Vec::new(),
                cond_cdf: Vec::new(),
            });
        }
        let masses = density.cell_masses(k);
        let mut row_cdf = Vec::with_capacity(k);
        let mut cond_cdf = Vec::with_capacity(k * k);
        let mut acc = 0.0;
        for row in masses.chunks_exact(k) {
            let total: f64 = row.iter().sum();
            acc += total;
            row_cdf.push(acc);
            let mut c = 0.0;
            for &m in row {
                c += m / total;
                cond_cdf.push(c);
            }
        }
        Ok(Self {
            k,
            uniform: false,
            row_cdf,
            cond_cdf,
        })
    }

    pub fn grid_k(&self) -> usize {
        self.k
    }

    /// One point from the (discretized) density.
    pub fn sample_point(&self, stream: &mut RandomStream) -> (f64, f64) {
        if self.uniform {
            return (stream.unit(), stream.unit());
        }
        let k = self.k;
        let total = self.row_cdf[k - 1];
        let row = pick(&self.row_cdf, stream.unit() * total);
        let cond = &self.cond_cdf[row * k..(row + 1) * k];
        let col = pick(cond, stream.unit() * cond[k - 1]);
        let kf = k as f64;
        ((row as f64 + stream.unit()) / kf, (col as f64 + stream.unit()) / kf)
    }

    pub fn sample(&self, n: usize, stream: &mut RandomStream) -> Permutation {
        assert!(n >= 1, "permutation size must be positive");
        let points: Vec<(f64, f64)> = (0..n).map(|_| self.sample_point(stream)).collect();
        rank_pattern(&points)
    }
}

fn pick(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// `σ_y^{-1} ∘ σ_x`: the point with the `i`-th smallest x has the `π(i)`-th smallest y.
pub fn rank_pattern(points: &[(f64, f64)]) -> Permutation {
    let n = points.len();
    let mut by_x: Vec<usize> = (0..n).collect();
    by_x.sort_by(|&a, &b| points[a].0.total_cmp(&points[b].0));
    let mut by_y: Vec<usize> = (0..n).collect();
    by_y.sort_by(|&a, &b| points[a].1.total_cmp(&points[b].1));
    let mut y_rank = vec![0u32; n];
    for (r, &m) in by_y.iter().enumerate() {
        y_rank[m] = r as u32;
    }
    let targets = by_x.iter().map(|&m| y_rank[m]).collect();
    Permutation::from_zero_based_unchecked(targets)
}

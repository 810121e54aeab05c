//! Iterative proportional fitting of a positive `k × k` matrix to uniform marginals.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct IpfOptions {
    /// Stop once every row and column sum is within `tolerance / k` of `1 / k`.
    pub relative_tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for IpfOptions {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-13,
            max_sweeps: 100_000,
        }
    }
}

/// Result of balancing: `masses[i*k + j] = kernel[i*k + j] · e^{row_log[i] + col_log[j]}`.
#[derive(Clone, Debug)]
pub struct IpfOutcome<T> {
    pub k: usize,
    pub masses: Vec<T>,
    pub row_log: Vec<T>,
    pub col_log: Vec<T>,
    pub sweeps: usize,
    /// Max absolute deviation of any row or column sum from `1/k` at exit.
    pub residual: T,
    /// Marginal divergence measured before every half-sweep:
    /// `KL(uniform ‖ current row sums)` before a row step, the column analogue before a column step.
    pub kl_history: Vec<T>,
}

/// Sinkhorn scaling of `kernel` (row-major, strictly positive) to row and column sums `1/k`.
pub fn ipf_balance<T: Real>(k: usize, kernel: &[T], opts: IpfOptions) -> Result<IpfOutcome<T>> {
    assert_eq!(kernel.len(), k * k, "kernel must be k x k");
    if kernel.iter().any(|&v| v <= T::zero() || !v.is_finite()) {
        return Err(Error::Parameter(
            "fitting requires a strictly positive finite matrix".into(),
        ));
    }
    let kt = T::from_count(k);
    let target = kt.recip();
    let tol = T::lit(opts.relative_tolerance.max(64.0 * T::epsilon().to_f64_lossy())) / kt;

    let mut masses = kernel.to_vec();
    let mut row_log = vec![T::zero(); k];
    let mut col_log = vec![T::zero(); k];
    let mut kl_history = Vec::new();
    let mut rows = vec![T::zero(); k];
    let mut cols = vec![T::zero(); k];

    let mut best = T::infinity();
    let mut stalled = 0usize;
    for sweep in 0..=opts.max_sweeps {
        row_sums(k, &masses, &mut rows);
        col_sums(k, &masses, &mut cols);
        let residual = rows
            .iter()
            .chain(&cols)
            .map(|&s| (s - target).abs())
            .fold(T::zero(), T::max);
        if residual <= tol {
            return Ok(IpfOutcome {
                k,
                masses,
                row_log,
                col_log,
                sweeps: sweep,
                residual,
                kl_history,
            });
        }
        // floating-point floor: accept a stalled fit that already meets 1e-10 absolute
        if residual < best {
            best = residual;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 200 && residual <= T::lit(1e-10) {
                return Ok(IpfOutcome {
                    k,
                    masses,
                    row_log,
                    col_log,
                    sweeps: sweep,
                    residual,
                    kl_history,
                });
            }
        }
        if sweep == opts.max_sweeps {
            return Err(Error::NotConverged {
                sweeps: sweep,
                residual: residual.to_f64_lossy(),
            });
        }

        kl_history.push(uniform_kl(target, &rows));
        for i in 0..k {
            let scale = target / rows[i];
            row_log[i] = row_log[i] + scale.ln();
            for v in &mut masses[i * k..(i + 1) * k] {
                *v = *v * scale;
            }
        }
        col_sums(k, &masses, &mut cols);
        kl_history.push(uniform_kl(target, &cols));
        for j in 0..k {
            let scale = target / cols[j];
            col_log[j] = col_log[j] + scale.ln();
            for i in 0..k {
                masses[i * k + j] = masses[i * k + j] * scale;
            }
        }
    }
    unreachable!("loop returns on its final iteration")
}

fn row_sums<T: Real>(k: usize, m: &[T], out: &mut [T]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = m[i * k..(i + 1) * k].iter().copied().sum();
    }
}

fn col_sums<T: Real>(k: usize, m: &[T], out: &mut [T]) {
    out.iter_mut().for_each(|o| *o = T::zero());
    for row in m.chunks_exact(k) {
        for (o, &v) in out.iter_mut().zip(row) {
            *o = *o + v;
        }
    }
}

// KL(u ‖ s) with u ≡ target, s normalized to a probability vector
fn uniform_kl<T: Real>(target: T, sums: &[T]) -> T {
    let total: T = sums.iter().copied().sum();
    sums.iter()
        .map(|&s| target * (target * total / s).ln())
        .sum()
}

//! Gauss–Legendre rules on `[0, 1]` and composite integration.

use crate::scalar::Real;

/// Nodes and weights of the `m`-point Gauss–Legendre rule mapped to `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "rule needs at least one node");
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        let mf = m as f64;
        for i in 0..m {
            // Newton iteration from the Chebyshev-like initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes.push(T::lit(0.5 * (1.0 - x)));
            weights.push(T::lit(0.5 * w));
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(node, weight)` pairs for the interval `[a, b]`.
    pub fn on(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (a + h * x, h * w))
    }

    pub fn integrate(&self, a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `panels` equal sub-intervals of `[a, b]`.
    pub fn composite(&self, a: T, b: T, panels: usize, mut f: impl FnMut(T) -> T) -> T {
        let h = (b - a) / T::from_count(panels);
        let mut total = T::zero();
        for p in 0..panels {
            let lo = a + h * T::from_count(p);
            total = total + self.on(lo, lo + h).map(|(x, w)| w * f(x)).sum::<T>();
        }
        total
    }
}

// P_m(x) and P_m'(x) by the three-term recurrence
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

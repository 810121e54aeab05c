use crate::perm::Permutation;
use crate::rng::RandomStream;
use crate::special::ln_factorial;

/// `ln Z_{n,q}` with `Z_{n,q} = Π_{i=1}^n (1 − q^i)/(1 − q) = Σ_π q^{Inv(π)}`.
pub fn mallows_normalizer(n: usize, q: f64) -> f64 {
    assert!(q > 0.0 && q.is_finite(), "mallows parameter must be positive");
    if q == 1.0 {
        return ln_factorial(n);
    }
    if q > 1.0 {
        // Z_{n,q} = q^{n(n-1)/2} Z_{n,1/q}
        let pairs = (n * n.saturating_sub(1) / 2) as f64;
        return pairs * q.ln() + mallows_normalizer(n, q.recip());
    }
    let ln_q = q.ln();
    let denom = (-ln_q.exp_m1()).ln();
    (1..=n)
        .map(|i| (-(i as f64 * ln_q).exp_m1()).ln() - denom)
        .sum()
}

/// Draw `d ∈ {0, …, r−1}` with `P(d) ∝ q^d`.
pub(crate) fn truncated_geometric(q: f64, r: usize, stream: &mut RandomStream) -> usize {
    debug_assert!(r >= 1);
    if r == 1 {
        return 0;
    }
    if q == 1.0 {
        return stream.below(r);
    }
    if q > 1.0 {
        return r - 1 - truncated_geometric(q.recip(), r, stream);
    }
    let ln_q = q.ln();
    // inverse CDF: F(d) = (1 − q^{d+1}) / (1 − q^r)
    let mass = -(r as f64 * ln_q).exp_m1();
    let u = stream.unit();
    let d = ((-u * mass).ln_1p() / ln_q).floor();
    if d.is_finite() && d >= 0.0 {
        (d as usize).min(r - 1)
    } else {
        0
    }
}

/// Exact Mallows sampler: `P(π) = q^{Inv(π)} / Z_{n,q}`.
///
/// Items `1..=n` are inserted in order; item `i` lands in slot `j ∈ {1..i}` with
/// probability `∝ q^{i−j}`, creating `i − j` new inversions. The final arrangement
/// is assembled in `O(n log n)` by placing items from `n` down to `1` into the
/// `(i − d_i)`-th free slot, `d_i = i − j`.
pub fn sample_mallows(n: usize, q: f64, stream: &mut RandomStream) -> Permutation {
    assert!(n >= 1, "permutation size must be positive");
    assert!(q > 0.0 && q.is_finite(), "mallows parameter must be positive");
    let offsets: Vec<usize> = (1..=n)
        .map(|i| truncated_geometric(q, i, stream))
        .collect();
    let mut free = FreeSlots::new(n);
    let mut targets = vec![0u32; n];
    for i in (1..=n).rev() {
        let slot = free.take_kth(i - offsets[i - 1]);
        targets[slot] = (i - 1) as u32;
    }
    Permutation::from_zero_based_unchecked(targets)
}

// Fenwick tree over slot occupancy with k-th free slot lookup.
struct FreeSlots {
    tree: Vec<u32>,
    top: usize,
}

impl FreeSlots {
    fn new(n: usize) -> Self {
        let mut tree = vec![0u32; n + 1];
        for i in 1..=n {
            tree[i] += 1;
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i];
            }
        }
        let top = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        Self { tree, top }
    }

    // removes and returns the 0-based index of the k-th (1-based) free slot
    fn take_kth(&mut self, mut k: usize) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next <= n && (self.tree[next] as usize) < k {
                pos = next;
                k -= self.tree[next] as usize;
            }
            step >>= 1;
        }
        let mut i = pos + 1;
        while i <= n {
            self.tree[i] -= 1;
            i += i & i.wrapping_neg();
        }
        pos
    }
}

//! Permutations of `{1..n}` and the statistics computed on them.
//!
//! Every public interface uses the 1-based convention `π(i)` for `i in 1..=n`.
//! Storage is 0-based `u32`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A bijection of `{1..n}`, `n >= 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    targets: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "permutation size must be positive");
        Self {
            targets: (0..n as u32).collect(),
        }
    }

    /// `i -> n + 1 - i`.
    pub fn reversal(n: usize) -> Self {
        assert!(n >= 1, "permutation size must be positive");
        Self {
            targets: (0..n as u32).rev().collect(),
        }
    }

    /// Builds a permutation from 1-based targets `(π(1), …, π(n))`.
    pub fn from_one_based(targets: &[usize]) -> Result<Self> {
        let n = targets.len();
        let mut zero = Vec::with_capacity(n);
        for &t in targets {
            if t == 0 || t > n {
                return Err(Error::InvalidPermutation {
                    n,
                    reason: format!("target {t} outside 1..={n}"),
                });
            }
            zero.push((t - 1) as u32);
        }
        Self::from_zero_based(zero)
    }

    /// Builds a permutation from 0-based targets, validating the bijection.
    pub fn from_zero_based(targets: Vec<u32>) -> Result<Self> {
        validate(&targets)?;
        Ok(Self { targets })
    }

    /// Used by samplers whose construction is a bijection by design; checked in debug builds.
    pub(crate) fn from_zero_based_unchecked(targets: Vec<u32>) -> Self {
        debug_assert!(validate(&targets).is_ok(), "sampler produced a non-bijection");
        Self { targets }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// `π(i)` with 1-based `i`.
    ///
    /// Panics when `i` is outside `1..=n`.
    pub fn get(&self, i: usize) -> usize {
        self.targets[i - 1] as usize + 1
    }

    pub fn as_zero_based(&self) -> &[u32] {
        &self.targets
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.targets.iter().map(|&t| t as usize + 1).collect()
    }

    /// Number of pairs `i < j` with `π(i) > π(j)`, by merge counting in `O(n log n)`.
    pub fn inversions(&self) -> u64 {
        let mut buf: Vec<u32> = self.targets.clone();
        let mut scratch = vec![0u32; buf.len()];
        merge_count(&mut buf, &mut scratch)
    }

    /// Quadratic pair count. Reference implementation for tests and tiny `n`.
    pub fn inversions_naive(&self) -> u64 {
        let t = &self.targets;
        let mut count = 0;
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                if t[i] > t[j] {
                    count += 1;
                }
            }
        }
        count
    }

    /// `N(π, σ) = #{i : π(i) = σ(i)}`.
    pub fn overlap(&self, other: &Permutation) -> Result<usize> {
        check_sizes(self.len(), other.len())?;
        Ok(self
            .targets
            .iter()
            .zip(&other.targets)
            .filter(|(a, b)| a == b)
            .count())
    }

    pub fn fixed_points(&self) -> usize {
        self.targets
            .iter()
            .enumerate()
            .filter(|&(i, &t)| i as u32 == t)
            .count()
    }

    pub fn cycle_census(&self) -> CycleCensus {
        let census = functional_cycle_census(&self.targets);
        debug_assert_eq!(census.weighted_total(), self.len());
        census
    }

    /// `(π(p_1), …, π(p_l))`.
    pub fn apply_tuple(&self, tuple: &IndexTuple) -> Result<IndexTuple> {
        let n = self.len();
        let mut out = Vec::with_capacity(tuple.len());
        for &p in tuple.entries() {
            if p == 0 || p > n {
                return Err(Error::IndexOutOfRange { index: p, n });
            }
            out.push(self.get(p));
        }
        Ok(IndexTuple { entries: out })
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        check_sizes(self.len(), other.len())?;
        let targets = other
            .targets
            .iter()
            .map(|&j| self.targets[j as usize])
            .collect();
        Ok(Self { targets })
    }

    pub fn inverse(&self) -> Permutation {
        let mut targets = vec![0u32; self.len()];
        for (i, &t) in self.targets.iter().enumerate() {
            targets[t as usize] = i as u32;
        }
        Self { targets }
    }

    pub fn empirical_permuton(&self) -> EmpiricalPermuton<'_> {
        EmpiricalPermuton { perm: self }
    }

    /// Lexicographic rank in `0..n!`, via the Lehmer code. Requires `n <= 20`.
    pub fn lex_rank(&self) -> usize {
        let n = self.len();
        assert!(n <= 20, "lex_rank supports n <= 20");
        let mut rank = 0usize;
        for i in 0..n {
            let smaller_after = self.targets[i + 1..]
                .iter()
                .filter(|&&t| t < self.targets[i])
                .count();
            rank = rank * (n - i) + smaller_after;
        }
        rank
    }

    /// Inverse of [`Permutation::lex_rank`].
    pub fn from_lex_rank(n: usize, mut rank: usize) -> Permutation {
        assert!((1..=20).contains(&n), "from_lex_rank supports 1 <= n <= 20");
        let mut digits = vec![0usize; n];
        for i in (0..n).rev() {
            let base = n - i;
            digits[i] = rank % base;
            rank /= base;
        }
        let mut pool: Vec<u32> = (0..n as u32).collect();
        let targets = digits.into_iter().map(|d| pool.remove(d)).collect();
        Self { targets }
    }

    /// All of `S_n` in lexicographic order.
    pub fn all(n: usize) -> AllPermutations {
        AllPermutations {
            next: Some((0..n as u32).collect()),
        }
    }
}

fn validate(targets: &[u32]) -> Result<()> {
    let n = targets.len();
    if n == 0 {
        return Err(Error::InvalidPermutation {
            n,
            reason: "empty".into(),
        });
    }
    let mut seen = vec![false; n];
    for &t in targets {
        let t = t as usize;
        if t >= n {
            return Err(Error::InvalidPermutation {
                n,
                reason: format!("target {} outside 1..={n}", t + 1),
            });
        }
        if seen[t] {
            return Err(Error::InvalidPermutation {
                n,
                reason: format!("target {} repeated", t + 1),
            });
        }
        seen[t] = true;
    }
    Ok(())
}

fn check_sizes(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::SizeMismatch { left, right });
    }
    Ok(())
}

fn merge_count(v: &mut [u32], scratch: &mut [u32]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (lo, hi) = v.split_at_mut(mid);
        let (slo, shi) = scratch.split_at_mut(mid);
        merge_count(lo, slo) + merge_count(hi, shi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            scratch[k] = v[i];
            i += 1;
        } else {
            scratch[k] = v[j];
            // every remaining left element exceeds v[j]
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    scratch[k..n].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&scratch[..n]);
    count
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_one_based()).finish()
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        Permutation::from_one_based(&raw).map_err(D::Error::custom)
    }
}

/// Lexicographic iterator over `S_n`.
pub struct AllPermutations {
    next: Option<Vec<u32>>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        if current.is_empty() {
            return None;
        }
        let mut succ = current.clone();
        // standard next-permutation step
        if let Some(i) = (0..succ.len().saturating_sub(1)).rev().find(|&i| succ[i] < succ[i + 1]) {
            let j = (i + 1..succ.len()).rev().find(|&j| succ[j] > succ[i]).unwrap();
            succ.swap(i, j);
            succ[i + 1..].reverse();
            self.next = Some(succ);
        }
        Some(Permutation { targets: current })
    }
}

/// An element of `S(n, l)`: `l` pairwise distinct indices in `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexTuple {
    entries: Vec<usize>,
}

impl IndexTuple {
    pub fn new(entries: Vec<usize>, n: usize) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidTuple("length must be at least 1".into()));
        }
        if entries.len() > n {
            return Err(Error::InvalidTuple(format!(
                "length {} exceeds n = {n}",
                entries.len()
            )));
        }
        let mut seen = vec![false; n + 1];
        for &p in &entries {
            if p == 0 || p > n {
                return Err(Error::IndexOutOfRange { index: p, n });
            }
            if seen[p] {
                return Err(Error::InvalidTuple(format!("index {p} repeated")));
            }
            seen[p] = true;
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `T(p) = (p_2, …, p_l, p_1)`.
    pub fn shift(&self) -> IndexTuple {
        let mut entries = self.entries.clone();
        entries.rotate_left(1);
        IndexTuple { entries }
    }

    /// Membership in `U(n, l)`: the first entry is the minimum.
    pub fn is_canonical_rotation(&self) -> bool {
        self.entries
            .iter()
            .all(|&p| p >= self.entries[0])
    }

    /// `max_a |p_a - q_a|`.
    pub fn sup_distance(&self, other: &IndexTuple) -> usize {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| a.abs_diff(b))
            .max()
            .unwrap_or(0)
    }

    /// Every tuple of `S(n, l)` in lexicographic order.
    pub fn all(n: usize, l: usize) -> Vec<IndexTuple> {
        let mut out = Vec::new();
        if l == 0 || l > n {
            return out;
        }
        let mut current = Vec::with_capacity(l);
        let mut used = vec![false; n + 1];
        fill_tuples(n, l, &mut current, &mut used, &mut out);
        out
    }
}

fn fill_tuples(
    n: usize,
    l: usize,
    current: &mut Vec<usize>,
    used: &mut [bool],
    out: &mut Vec<IndexTuple>,
) {
    if current.len() == l {
        out.push(IndexTuple {
            entries: current.clone(),
        });
        return;
    }
    for p in 1..=n {
        if !used[p] {
            used[p] = true;
            current.push(p);
            fill_tuples(n, l, current, used, out);
            current.pop();
            used[p] = false;
        }
    }
}

/// Cycle-length counts `(C(1), …, C(n))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleCensus {
    n: usize,
    // counts[l] = number of l-cycles; index 0 unused
    counts: Vec<usize>,
}

impl CycleCensus {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of cycles of length `l` (zero for `l == 0` or `l > n`).
    pub fn count(&self, l: usize) -> usize {
        self.counts.get(l).copied().unwrap_or(0)
    }

    /// `Σ_l l · C(l)`; equals `n` for permutations.
    pub fn weighted_total(&self) -> usize {
        self.counts.iter().enumerate().map(|(l, c)| l * c).sum()
    }

    pub fn total_cycles(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Nonzero entries as `length -> count`.
    pub fn sparse(&self) -> BTreeMap<usize, usize> {
        self.counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(l, &c)| (l, c))
            .collect()
    }
}

impl Serialize for CycleCensus {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.sparse().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycleCensus {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let sparse = BTreeMap::<usize, usize>::deserialize(d)?;
        if sparse.contains_key(&0) {
            return Err(D::Error::custom("cycle length 0 is invalid"));
        }
        let n: usize = sparse.iter().map(|(l, c)| l * c).sum();
        let mut counts = vec![0; n + 1];
        for (l, c) in sparse {
            counts[l] = c;
        }
        Ok(CycleCensus { n, counts })
    }
}

/// Cycles of the functional graph `i -> map[i]` on `{0..n-1}`.
///
/// For a permutation every node lies on a cycle. For a general map (such as
/// independent row draws) only the nodes on cycles are counted, so
/// `weighted_total() <= n`.
pub fn functional_cycle_census(map: &[u32]) -> CycleCensus {
    let n = map.len();
    let mut counts = vec![0usize; n + 1];
    // 0 = unvisited, 1 = on current walk, 2 = finished
    let mut state = vec![0u8; n];
    let mut walk: Vec<usize> = Vec::new();
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        walk.clear();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            walk.push(v);
            v = map[v] as usize;
        }
        if state[v] == 1 {
            let pos = walk.iter().position(|&w| w == v).unwrap();
            counts[walk.len() - pos] += 1;
        }
        for &w in &walk {
            state[w] = 2;
        }
    }
    CycleCensus { n, counts }
}

/// The atomic measure `ν_π` placing mass `1/n` at each `(i/n, π(i)/n)`.
#[derive(Clone, Copy, Debug)]
pub struct EmpiricalPermuton<'a> {
    perm: &'a Permutation,
}

impl<'a> EmpiricalPermuton<'a> {
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn atoms<T: Real>(&self) -> impl Iterator<Item = (T, T)> + 'a {
        let n = T::from_count(self.perm.len());
        self.perm
            .targets
            .iter()
            .enumerate()
            .map(move |(i, &t)| (T::from_count(i + 1) / n, T::from_count(t as usize + 1) / n))
    }

    /// Masses `ν_π[I_a × I_b]` on the partition `I_a = ((a-1)/k, a/k]`.
    pub fn grid_mass(&self, k: usize) -> GridMass {
        assert!(k >= 1, "grid resolution must be positive");
        let n = self.perm.len();
        let mut counts = vec![0u64; k * k];
        for (i, &t) in self.perm.targets.iter().enumerate() {
            let a = cell_of(i + 1, n, k);
            let b = cell_of(t as usize + 1, n, k);
            counts[a * k + b] += 1;
        }
        GridMass { k, n, counts }
    }
}

// 0-based index of the cell ((a-1)/k, a/k] containing i/n: ceil(k i / n) - 1
fn cell_of(i: usize, n: usize, k: usize) -> usize {
    (k * i).div_ceil(n) - 1
}

/// Exact cell masses of an empirical permuton, kept as atom counts over `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMass {
    k: usize,
    n: usize,
    counts: Vec<u64>,
}

impl GridMass {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn count(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.k + col]
    }

    /// Exact mass of cell `(row, col)` (0-based).
    pub fn mass(&self, row: usize, col: usize) -> Ratio<u64> {
        Ratio::new(self.count(row, col), self.n as u64)
    }

    pub fn total(&self) -> Ratio<u64> {
        Ratio::new(self.counts.iter().sum(), self.n as u64)
    }

    pub fn row_mass(&self, row: usize) -> Ratio<u64> {
        Ratio::new(
            self.counts[row * self.k..(row + 1) * self.k].iter().sum(),
            self.n as u64,
        )
    }

    pub fn col_mass(&self, col: usize) -> Ratio<u64> {
        Ratio::new(
            (0..self.k).map(|r| self.count(r, col)).sum(),
            self.n as u64,
        )
    }

    /// Row-major `k × k` matrix of masses; the division happens once per cell.
    pub fn to_matrix<T: Real>(&self) -> Vec<Vec<T>> {
        let n = T::from_count(self.n);
        (0..self.k)
            .map(|r| {
                (0..self.k)
                    .map(|c| T::from_count(self.count(r, c) as usize) / n)
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Permutation {
        Permutation::from_one_based(v).unwrap()
    }

    #[test]
    fn inversions_examples() {
        assert_eq!(Permutation::identity(5).inversions(), 0);
        assert_eq!(Permutation::reversal(4).inversions(), 6);
        assert_eq!(p(&[2, 1, 4, 3]).inversions_naive(), 2);
        assert_eq!(p(&[2, 1, 4, 3]).inversions(), 2);
    }

    #[test]
    fn overlap_examples() {
        let q = p(&[3, 1, 4, 2]);
        assert_eq!(q.overlap(&q).unwrap(), 4);
        assert_eq!(
            Permutation::identity(4)
                .overlap(&Permutation::reversal(4))
                .unwrap(),
            0
        );
        assert_eq!(p(&[2, 1, 3]).overlap(&Permutation::identity(3)).unwrap(), 1);
        assert!(matches!(
            q.overlap(&Permutation::identity(3)),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn cycle_census_examples() {
        let c = Permutation::identity(4).cycle_census();
        assert_eq!(c.count(1), 4);
        assert_eq!(c.total_cycles(), 4);
        let c = p(&[2, 3, 1]).cycle_census();
        assert_eq!((c.count(1), c.count(2), c.count(3)), (0, 0, 1));
        let c = p(&[4, 3, 2, 1]).cycle_census();
        assert_eq!(c.count(2), 2);
        assert_eq!(c.total_cycles(), 2);
        assert_eq!(c.count(7), 0);
    }

    #[test]
    fn functional_graph_with_tails() {
        // 0->1->2->1, 3->3: one 2-cycle, one fixed point, node 0 on a tail
        let c = functional_cycle_census(&[1, 2, 1, 3]);
        assert_eq!(c.count(2), 1);
        assert_eq!(c.count(1), 1);
        assert_eq!(c.weighted_total(), 3);
    }

    #[test]
    fn tuples_apply_and_shift() {
        let t = IndexTuple::new(vec![3, 1], 3).unwrap();
        assert_eq!(Permutation::identity(3).apply_tuple(&t).unwrap(), t);
        let t = IndexTuple::new(vec![1, 2], 3).unwrap();
        assert_eq!(
            p(&[2, 3, 1]).apply_tuple(&t).unwrap().entries(),
            &[2, 3]
        );
        let q = p(&[4, 2, 5, 1, 3]);
        let single = IndexTuple::new(vec![3], 5).unwrap();
        assert_eq!(q.apply_tuple(&single).unwrap().entries(), &[5]);

        let t = IndexTuple::new(vec![2, 5, 4], 6).unwrap();
        assert!(t.is_canonical_rotation());
        let s = t.shift();
        assert_eq!(s.entries(), &[5, 4, 2]);
        assert!(!s.is_canonical_rotation());
        let one = IndexTuple::new(vec![7], 7).unwrap();
        assert_eq!(one.shift(), one);
        let t = IndexTuple::new(vec![1, 2, 3], 3).unwrap();
        assert_eq!(t.shift().shift().shift(), t);
    }

    #[test]
    fn tuple_validation() {
        assert!(IndexTuple::new(vec![1, 1], 3).is_err());
        assert!(IndexTuple::new(vec![0], 3).is_err());
        assert!(IndexTuple::new(vec![4], 3).is_err());
        assert!(IndexTuple::new(vec![], 3).is_err());
        let t = IndexTuple::new(vec![1, 4], 4).unwrap();
        assert!(matches!(
            Permutation::identity(3).apply_tuple(&t),
            Err(Error::IndexOutOfRange { index: 4, n: 3 })
        ));
    }

    #[test]
    fn tuple_enumeration_sizes() {
        // |S(n,l)| = n!/(n-l)!, |U(n,l)| = |S(n,l)| / l
        let all = IndexTuple::all(6, 3);
        assert_eq!(all.len(), 120);
        assert_eq!(all.iter().filter(|t| t.is_canonical_rotation()).count(), 40);
    }

    #[test]
    fn compose_and_inverse() {
        let q = p(&[2, 3, 1]);
        assert_eq!(q.inverse(), p(&[3, 1, 2]));
        assert_eq!(q.compose(&Permutation::identity(3)).unwrap(), q);
        assert_eq!(q.compose(&q.inverse()).unwrap(), Permutation::identity(3));
        // (q ∘ r)(1) = q(r(1)) = q(3) = 1
        let r = p(&[3, 1, 2]);
        assert_eq!(q.compose(&r).unwrap().get(1), 1);
        assert!(q.compose(&Permutation::identity(2)).is_err());
    }

    #[test]
    fn grid_mass_examples() {
        let g = Permutation::identity(5).empirical_permuton().grid_mass(5);
        for r in 0..5 {
            for c in 0..5 {
                let expect = if r == c { Ratio::new(1, 5) } else { Ratio::new(0, 1) };
                assert_eq!(g.mass(r, c), expect);
            }
        }
        let g = p(&[3, 1, 2]).empirical_permuton().grid_mass(1);
        assert_eq!(g.mass(0, 0), Ratio::from_integer(1));
        let g = Permutation::reversal(4).empirical_permuton().grid_mass(2);
        assert_eq!(g.mass(0, 1), Ratio::new(1, 2));
        assert_eq!(g.mass(1, 0), Ratio::new(1, 2));
        assert_eq!(g.mass(0, 0), Ratio::from_integer(0));
        assert_eq!(g.total(), Ratio::from_integer(1));
    }

    #[test]
    fn lex_rank_roundtrip_small() {
        for (r, q) in Permutation::all(4).enumerate() {
            assert_eq!(q.lex_rank(), r);
            assert_eq!(Permutation::from_lex_rank(4, r), q);
        }
        assert_eq!(Permutation::all(5).count(), 120);
    }

    #[test]
    fn json_forms() {
        let q = p(&[2, 3, 1]);
        assert_eq!(serde_json::to_string(&q).unwrap(), "[2,3,1]");
        let back: Permutation = serde_json::from_str("[2,3,1]").unwrap();
        assert_eq!(back, q);
        assert!(serde_json::from_str::<Permutation>("[1,1,2]").is_err());
        let c = p(&[4, 3, 2, 1]).cycle_census();
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"2":2}"#);
        let back: CycleCensus = serde_json::from_str(r#"{"2":2}"#).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn invalid_permutations_rejected() {
        assert!(Permutation::from_one_based(&[]).is_err());
        assert!(Permutation::from_one_based(&[1, 3]).is_err());
        assert!(Permutation::from_one_based(&[2, 2]).is_err());
    }
}

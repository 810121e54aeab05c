mod common;

use num_rational::Ratio;
use permuton_lab::{IndexTuple, Permutation, RandomStream};
use proptest::prelude::*;

use common::naive_inversions;

fn perm(targets: &[usize]) -> Permutation {
    Permutation::from_one_based(targets).unwrap()
}

#[test]
fn inversion_examples() {
    assert_eq!(Permutation::identity(5).inversions(), 0);
    assert_eq!(Permutation::reversal(4).inversions(), 6);
    assert_eq!(perm(&[2, 1, 4, 3]).inversions(), naive_inversions(&[2, 1, 4, 3]));
    assert_eq!(perm(&[2, 1, 4, 3]).inversions(), 2);
}

#[test]
fn overlap_examples() {
    let p = perm(&[3, 1, 4, 2, 5]);
    assert_eq!(p.overlap(&p).unwrap(), 5);
    assert_eq!(Permutation::identity(4).overlap(&Permutation::reversal(4)).unwrap(), 0);
    assert_eq!(perm(&[2, 1, 3]).overlap(&Permutation::identity(3)).unwrap(), 1);
    assert!(p.overlap(&Permutation::identity(4)).is_err());
}

#[test]
fn cycle_census_examples() {
    let id = Permutation::identity(4).cycle_census();
    assert_eq!(id.count(1), 4);
    assert_eq!((2..=4).map(|l| id.count(l)).sum::<usize>(), 0);
    let c = perm(&[2, 3, 1]).cycle_census();
    assert_eq!((c.count(1), c.count(2), c.count(3)), (0, 0, 1));
    let r = perm(&[4, 3, 2, 1]).cycle_census();
    assert_eq!((r.count(1), r.count(2)), (0, 2));
}

#[test]
fn tuple_examples() {
    let t = IndexTuple::new(vec![3, 1], 3).unwrap();
    assert_eq!(Permutation::identity(3).apply_tuple(&t).unwrap(), t);
    let t12 = IndexTuple::new(vec![1, 2], 3).unwrap();
    assert_eq!(perm(&[2, 3, 1]).apply_tuple(&t12).unwrap().entries(), &[2, 3]);
    let p = perm(&[4, 2, 5, 1, 3]);
    for k in 1..=5 {
        let single = IndexTuple::new(vec![k], 5).unwrap();
        assert_eq!(p.apply_tuple(&single).unwrap().entries(), &[p.get(k)]);
    }
    let s = IndexTuple::new(vec![2, 5, 4], 5).unwrap();
    assert_eq!(s.shift().entries(), &[5, 4, 2]);
    let one = IndexTuple::new(vec![7], 9).unwrap();
    assert_eq!(one.shift(), one);
    let t123 = IndexTuple::new(vec![1, 2, 3], 3).unwrap();
    assert_eq!(t123.shift().shift().shift(), t123);
    assert!(IndexTuple::new(vec![2, 2], 3).is_err());
    assert!(IndexTuple::new(vec![4], 3).is_err());
}

#[test]
fn group_examples() {
    let p = perm(&[2, 3, 1]);
    assert_eq!(p.compose(&Permutation::identity(3)).unwrap(), p);
    assert_eq!(p.inverse(), perm(&[3, 1, 2]));
    let mut stream = RandomStream::new(50);
    let q = permuton_lab::samplers::sample_uniform(50, &mut stream);
    assert_eq!(q.inverse().compose(&q).unwrap(), Permutation::identity(50));
}

#[test]
fn grid_mass_examples() {
    let g = Permutation::identity(6).empirical_permuton().grid_mass(6);
    for a in 0..6 {
        for b in 0..6 {
            let want = if a == b { Ratio::new(1, 6) } else { Ratio::from_integer(0) };
            assert_eq!(g.mass(a, b), want);
        }
    }
    let g1 = perm(&[3, 1, 2]).empirical_permuton().grid_mass(1);
    assert_eq!(g1.mass(0, 0), Ratio::from_integer(1));
    let rev = Permutation::reversal(4).empirical_permuton().grid_mass(2);
    assert_eq!(rev.mass(0, 1), Ratio::new(1, 2));
    assert_eq!(rev.mass(1, 0), Ratio::new(1, 2));
    assert_eq!(rev.mass(0, 0), Ratio::from_integer(0));
    assert_eq!(rev.mass(1, 1), Ratio::from_integer(0));
}

fn permutation(max_n: usize) -> impl Strategy<Value = Vec<usize>> {
    (1..=max_n).prop_flat_map(|n| Just((1..=n).collect::<Vec<usize>>()).prop_shuffle())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn merge_inversions_match_pair_count(t in permutation(512)) {
        let p = perm(&t);
        prop_assert_eq!(p.inversions(), naive_inversions(&t));
        prop_assert_eq!(p.inversions(), p.inversions_naive());
    }
}

proptest! {
    #[test]
    fn cycle_lengths_partition_n(t in permutation(200)) {
        let p = perm(&t);
        let c = p.cycle_census();
        let total: usize = (1..=t.len()).map(|l| l * c.count(l)).sum();
        prop_assert_eq!(total, t.len());
        prop_assert_eq!(c.weighted_total(), t.len());
    }

    #[test]
    fn overlap_with_identity_counts_fixed_points(t in permutation(200)) {
        let p = perm(&t);
        let c1 = p.cycle_census().count(1);
        prop_assert_eq!(p.overlap(&Permutation::identity(t.len())).unwrap(), c1);
        prop_assert_eq!(p.fixed_points(), c1);
    }

    #[test]
    fn compose_and_inverse_are_consistent(a in permutation(60), seed in any::<u64>()) {
        let p = perm(&a);
        let n = a.len();
        let mut stream = RandomStream::new(seed);
        let q = permuton_lab::samplers::sample_uniform(n, &mut stream);
        let pq = p.compose(&q).unwrap();
        for i in 1..=n {
            prop_assert_eq!(pq.get(i), p.get(q.get(i)));
        }
        prop_assert_eq!(p.compose(&p.inverse()).unwrap(), Permutation::identity(n));
        prop_assert_eq!(pq.inverse(), q.inverse().compose(&p.inverse()).unwrap());
    }

    #[test]
    fn bijection_is_enforced(t in prop::collection::vec(1usize..8, 1..8)) {
        let mut sorted = t.clone();
        sorted.sort_unstable();
        let is_perm = sorted == (1..=t.len()).collect::<Vec<_>>();
        prop_assert_eq!(Permutation::from_one_based(&t).is_ok(), is_perm);
    }

    #[test]
    fn grid_mass_is_exactly_one(t in permutation(300), k in 1usize..40) {
        let g = perm(&t).empirical_permuton().grid_mass(k);
        prop_assert_eq!(g.total(), Ratio::from_integer(1));
        for a in 0..k {
            // each row block holds the atoms of its index range
            let lo = a * t.len() / k;
            let hi = (a + 1) * t.len() / k;
            prop_assert_eq!(g.row_mass(a), Ratio::new((hi - lo) as u64, t.len() as u64));
        }
    }

    #[test]
    fn lex_rank_round_trips(t in permutation(9)) {
        let p = perm(&t);
        prop_assert_eq!(Permutation::from_lex_rank(t.len(), p.lex_rank()), p);
    }

    #[test]
    fn shifting_l_times_is_identity(t in permutation(12)) {
        let l = t.len().min(5);
        let tup = IndexTuple::new(t[..l].to_vec(), t.len()).unwrap();
        let mut s = tup.clone();
        for _ in 0..l {
            s = s.shift();
        }
        prop_assert_eq!(s, tup);
    }
}

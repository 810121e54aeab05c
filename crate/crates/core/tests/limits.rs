mod common;

use permuton_lab::limits::{
    c_rho, c_rho_range, c_rho_squaring, diagonal_integral, lambda_n_cycle, lambda_n_overlap, mu_rho_along,
    poisson_moment, poisson_pmf, poisson_pmf_table, row_kernel, stein_tv_bound, stirling2_row, PoissonSpec,
    Provenance, Regime,
};
use permuton_lab::{Density, Error, Permutation};
use proptest::prelude::*;

use common::{simpson, touchard};

fn integral_of(f: impl Fn(f64) -> f64) -> f64 {
    simpson(&f, 0.0, 1.0, 1e-13)
}

fn double_integral(f: impl Fn(f64, f64) -> f64 + Copy) -> f64 {
    integral_of(|x| simpson(&|y| f(x, y), 0.0, 1.0, 1e-12))
}

#[test]
fn mu_rho_uniform_is_one() {
    let d = Density::<f64>::uniform();
    for n in [1, 7, 100] {
        for sigma in [Permutation::identity(n), Permutation::reversal(n)] {
            assert!((mu_rho_along(&d, &sigma) - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn mu_rho_along_identity_and_reversal() {
    let d = Density::frank(20.0).unwrap();
    let diag = integral_of(|x| d.eval(x, x));
    let anti = integral_of(|x| d.eval(x, 1.0 - x));
    let n = 2000;
    assert!((mu_rho_along(&d, &Permutation::identity(n)) - diag).abs() < 1e-3);
    assert!((mu_rho_along(&d, &Permutation::reversal(n)) - anti).abs() < 1e-3);
    assert!((diagonal_integral(&d) - diag).abs() < 1e-9, "{} vs {diag}", diagonal_integral(&d));
}

#[test]
fn c_rho_uniform_is_reciprocal() {
    let c = c_rho_range(&Density::<f64>::uniform(), 10, 64).unwrap();
    for (i, v) in c.iter().enumerate() {
        assert!((v - 1.0 / (i + 1) as f64).abs() < 1e-12);
    }
}

#[test]
fn c_rho_first_two_terms_match_quadrature() {
    for beta in [2.0, -3.0, 8.0] {
        let d = Density::frank(beta).unwrap();
        let c = c_rho_range(&d, 2, 256).unwrap();
        let c1 = integral_of(|x| d.eval(x, x));
        // ρ is symmetric, so the two-cycle integrand ρ(x,y)ρ(y,x) is ρ²
        let c2 = double_integral(|x, y| d.eval(x, y).powi(2)) / 2.0;
        assert!((c[0] - c1).abs() < 1e-9, "beta {beta}: {} vs {c1}", c[0]);
        assert!((c[1] - c2).abs() < 1e-9, "beta {beta}: {} vs {c2}", c[1]);
    }
}

#[test]
fn c_rho_is_grid_stable() {
    for beta in [2.0f64, 20.0] {
        let d = Density::frank(beta).unwrap();
        let coarse = c_rho_range(&d, 5, 256).unwrap();
        let fine = c_rho_range(&d, 5, 512).unwrap();
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a - b).abs() < 1e-4, "beta {beta}: {a} vs {b}");
        }
        for l in 1..=5 {
            let sq = c_rho_squaring(&d, l, 512).unwrap();
            assert!((sq - fine[l - 1]).abs() < 1e-10 * fine[l - 1], "l {l}");
            assert_eq!(c_rho(&d, l, 512).unwrap(), fine[l - 1]);
        }
    }
}

#[test]
fn c_rho_of_a_grid_density_is_the_matrix_trace() {
    let k = 3;
    let raw = vec![3.0, 1.0, 2.0, 0.5, 4.0, 1.0, 2.0, 1.5, 0.5];
    let d = Density::grid_balanced(k, raw).unwrap();
    let m: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| d.eval((i as f64 + 0.5) / 3.0, (j as f64 + 0.5) / 3.0) / 3.0).collect())
        .collect();
    let mut power = m.clone();
    let c = c_rho_range(&d, 4, 64).unwrap();
    for l in 1..=4 {
        let trace: f64 = (0..k).map(|i| power[i][i]).sum();
        assert!((c[l - 1] - trace / l as f64).abs() < 1e-12, "l {l}");
        power = (0..k)
            .map(|i| (0..k).map(|j| (0..k).map(|t| power[i][t] * m[t][j]).sum()).collect())
            .collect();
    }
}

#[test]
fn c_rho_rejects_bad_arguments() {
    let d = Density::<f64>::uniform();
    assert!(c_rho(&d, 0, 64).is_err());
    assert!(c_rho(&d, 2, 8).is_err());
}

#[test]
fn lambda_n_overlap_examples() {
    let u = Density::<f64>::uniform();
    for sigma in [Permutation::identity(9), Permutation::reversal(9)] {
        assert!((lambda_n_overlap(&u, &sigma) - 1.0).abs() < 1e-13);
    }
    let d = Density::frank(2.0).unwrap();
    let r = |x: f64, y: f64| d.eval(x, y);
    let direct = r(0.5, 0.5) / (r(0.5, 0.5) + r(0.5, 1.0)) + r(1.0, 1.0) / (r(1.0, 0.5) + r(1.0, 1.0));
    assert!((lambda_n_overlap(&d, &Permutation::identity(2)) - direct).abs() < 1e-14);
}

#[test]
fn lambda_n_overlap_converges_to_diagonal_integral() {
    let d = Density::frank(2.0).unwrap();
    let limit = integral_of(|x| d.eval(x, x));
    let mut last = f64::INFINITY;
    for n in [100, 400, 1600] {
        let gap = (lambda_n_overlap(&d, &Permutation::identity(n)) - limit).abs();
        assert!(gap < last, "n {n}: {gap}");
        last = gap;
    }
    assert!(last < 2e-3, "{last}");
}

#[test]
fn row_kernel_rows_sum_to_one() {
    let d = Density::frank(-4.0).unwrap();
    let n = 37;
    let w = row_kernel(&d, n);
    for row in w.chunks(n) {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-13);
    }
}

fn brute_cycle_mean(w: &[f64], n: usize, l: usize) -> f64 {
    fn walk(w: &[f64], n: usize, l: usize, t: &mut Vec<usize>) -> f64 {
        if t.len() == l {
            return (0..l).map(|i| w[t[i] * n + t[(i + 1) % l]]).product();
        }
        let mut s = 0.0;
        for v in 0..n {
            if !t.contains(&v) {
                t.push(v);
                s += walk(w, n, l, t);
                t.pop();
            }
        }
        s
    }
    walk(w, n, l, &mut Vec::new()) / l as f64
}

#[test]
fn lambda_n_cycle_matches_tuple_enumeration() {
    let d = Density::frank(3.0).unwrap();
    for n in [3, 5, 8] {
        let w = row_kernel(&d, n);
        for l in 1..=5 {
            let got = lambda_n_cycle(&d, n, l).unwrap();
            let want = if l > n { 0.0 } else { brute_cycle_mean(&w, n, l) };
            assert!((got - want).abs() < 1e-12 * want.max(1.0), "n {n} l {l}: {got} vs {want}");
        }
    }
    let u = Density::<f64>::uniform();
    let n = 12usize;
    for l in 1..=4 {
        let falling: f64 = (0..l).map(|i| (n - i) as f64).product();
        let want = falling / (l as f64 * (n as f64).powi(l as i32));
        assert!((lambda_n_cycle(&u, n, l).unwrap() - want).abs() < 1e-13);
    }
    assert!(lambda_n_cycle(&u, 5, 0).is_err());
    assert!(matches!(lambda_n_cycle(&u, 5000, 2), Err(Error::TooLarge { .. })));
}

#[test]
fn stein_bound_examples() {
    let u = Density::<f64>::uniform();
    for n in [10, 100] {
        let b = stein_tv_bound(&u, n, Regime::Overlap, None).unwrap();
        assert!((b.tv_bound - 1.0 / n as f64).abs() < 1e-15);
        assert!((b.lambda_n - 1.0).abs() < 1e-13);
    }
    let d = Density::frank(2.0f64).unwrap();
    let (m, big_m) = d.bounds();
    assert!((m - 0.31303528549933135).abs() < 1e-12 && (big_m - 2.313035285499331).abs() < 1e-12);
    let ratio = big_m / m;
    let mut last = f64::INFINITY;
    for n in [50, 100, 200, 400] {
        let o = stein_tv_bound(&d, n, Regime::Overlap, Some(&Permutation::reversal(n))).unwrap();
        assert!((o.tv_bound - ratio.powi(2) / n as f64).abs() < 1e-12);
        for l in 1..=3 {
            let c = stein_tv_bound(&d, n, Regime::Cycle(l), None).unwrap();
            assert!((c.tv_bound - ratio.powi(2 * l as i32) / n as f64).abs() < 1e-9 * c.tv_bound);
        }
        assert!(o.tv_bound < last);
        last = o.tv_bound;
    }
    assert!(stein_tv_bound(&d, 0, Regime::Overlap, None).is_err());
    assert!(stein_tv_bound(&d, 5, Regime::Overlap, Some(&Permutation::identity(4))).is_err());
}

#[test]
fn stein_lambda_n_stays_within_density_ratio() {
    let d = Density::frank(5.0).unwrap();
    let (m, big_m) = d.bounds();
    for n in [2, 17, 300] {
        for sigma in [Permutation::identity(n), Permutation::reversal(n)] {
            let l = lambda_n_overlap(&d, &sigma);
            assert!(l >= m / big_m && l <= big_m / m, "n {n}: {l}");
        }
    }
}

#[test]
fn poisson_moment_examples() {
    let bell = [1.0, 1.0, 2.0, 5.0, 15.0, 52.0, 203.0];
    for (k, b) in bell.iter().enumerate() {
        assert!((poisson_moment(1.0, k).unwrap() - b).abs() < 1e-9);
    }
    assert_eq!(stirling2_row(4).unwrap(), vec![0, 1, 7, 6, 1]);
    for lambda in [0.3, 1.0, 5.846, 12.0] {
        for k in 0..=20 {
            let m = poisson_moment(lambda, k).unwrap();
            let want = touchard(lambda, k);
            assert!((m - want).abs() < 1e-12 * want, "lambda {lambda} k {k}");
            assert!(m >= lambda.powi(k as i32) * (1.0 - 1e-15));
        }
    }
    assert!(poisson_moment(1.0, 21).is_err());
}

#[test]
fn poisson_pmf_examples() {
    assert!((poisson_pmf(2.0, 3) - (-2f64).exp() * 8.0 / 6.0).abs() < 1e-15);
    assert_eq!(poisson_pmf(0.0, 0), 1.0);
    assert_eq!(poisson_pmf(0.0, 4), 0.0);
    let table = poisson_pmf_table(5.846, 1e-12);
    assert!((table.iter().sum::<f64>() - 1.0).abs() < 1e-11);
    let mean: f64 = table.iter().enumerate().map(|(j, p)| j as f64 * p).sum();
    assert!((mean - 5.846).abs() < 1e-9);
}

#[test]
fn provenance_labels_round_trip() {
    for p in [
        Provenance::MuRho,
        Provenance::DiagonalIntegral,
        Provenance::CRho(3),
        Provenance::ExpTheta,
        Provenance::LambdaNOverlap,
        Provenance::LambdaNCycle(2),
        Provenance::ExactMean,
        Provenance::EmpiricalMean,
    ] {
        assert_eq!(p.to_string().parse::<Provenance>().unwrap(), p);
        let spec = PoissonSpec::new(1.5, p).unwrap();
        let back: PoissonSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
    assert!("c_rho(x)".parse::<Provenance>().is_err());
    assert!(PoissonSpec::new(0.0, Provenance::MuRho).is_err());
    assert!(PoissonSpec::new(f64::NAN, Provenance::MuRho).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn c_rho_is_positive_with_even_traces_above_one(beta in -30.0f64..30.0) {
        let d = Density::frank(beta).unwrap();
        let c = c_rho_range(&d, 4, 128).unwrap();
        for (i, v) in c.iter().enumerate() {
            prop_assert!(*v > 0.0);
            // the top eigenvalue of a doubly stochastic kernel is 1; even powers
            // of the remaining real eigenvalues are non-negative
            if (i + 1) % 2 == 0 {
                prop_assert!(*v * (i + 1) as f64 >= 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn lambda_n_overlap_within_density_ratio(beta in -20.0f64..20.0, n in 1usize..60, seed in any::<u64>()) {
        let d = Density::frank(beta).unwrap();
        let (m, big_m) = d.bounds();
        let mut s = permuton_lab::RandomStream::new(seed);
        let sigma = permuton_lab::samplers::sample_uniform(n, &mut s);
        let l = lambda_n_overlap(&d, &sigma);
        prop_assert!(l >= m / big_m * (1.0 - 1e-12) && l <= big_m / m * (1.0 + 1e-12));
    }
}

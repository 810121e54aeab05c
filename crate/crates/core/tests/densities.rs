mod common;

use permuton_lab::densities::{frank_eval, DensityKind};
use permuton_lab::{Density, DensitySpec, RandomStream, ScoreFunction};

use common::{frank_cosh, frank_direct, separation_residual, simpson};

#[test]
fn frank_matches_closed_form() {
    for beta in [-30.0f64, -2.0, 0.5, 2.0, 20.0, 80.0] {
        for &(x, y) in &[(0.1, 0.2), (0.5, 0.5), (0.9, 0.05), (0.0, 1.0), (1.0, 1.0), (0.33, 0.77)] {
            let got = frank_eval(beta, x, y).unwrap();
            let want = frank_cosh(beta, x, y);
            assert!((got / want - 1.0).abs() < 1e-12, "beta {beta} ({x},{y}): {got} vs {want}");
            // the product form cancels badly near the corners once e^{-β} is tiny
            if beta.abs() <= 5.0 {
                let direct = frank_direct(beta, x, y);
                assert!((got / direct - 1.0).abs() < 1e-10, "beta {beta} ({x},{y}): {got} vs {direct}");
            }
        }
    }
}

#[test]
fn frank_near_zero_is_uniform() {
    for i in 0..=10 {
        for j in 0..=10 {
            let v = frank_eval(1e-9, i as f64 / 10.0, j as f64 / 10.0).unwrap();
            assert!((v - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn frank_is_symmetric() {
    let mut s = RandomStream::new(1);
    for _ in 0..1000 {
        let beta = 40.0 * s.unit() - 20.0;
        let (x, y) = (s.unit(), s.unit());
        assert_eq!(frank_eval(beta, x, y).unwrap(), frank_eval(beta, y, x).unwrap());
    }
}

#[test]
fn frank_rows_integrate_to_one() {
    let row = simpson(&|y| frank_eval(2.0, 0.3, y).unwrap(), 0.0, 1.0, 1e-12);
    assert!((row - 1.0).abs() < 1e-8, "{row}");
    for beta in [-7.0, 5.0, 20.0] {
        for x in [0.0, 0.25, 0.9] {
            let r = simpson(&|y| frank_eval(beta, x, y).unwrap(), 0.0, 1.0, 1e-12);
            assert!((r - 1.0).abs() < 1e-8, "beta {beta} x {x}: {r}");
        }
    }
}

#[test]
fn frank_lipschitz_estimate_is_grid_stable() {
    let estimate = |res: usize| {
        let h = 1.0 / res as f64;
        let mut worst = 0.0f64;
        for i in 0..res {
            for j in 0..=res {
                let (x, y) = (i as f64 * h, j as f64 * h);
                let dx = (frank_eval(5.0, x + h, y).unwrap() - frank_eval(5.0, x, y).unwrap()).abs() / h;
                worst = worst.max(dx);
            }
        }
        worst
    };
    let coarse = estimate(256);
    let fine = estimate(512);
    assert!(coarse.is_finite());
    assert!((fine / coarse - 1.0).abs() < 0.02, "{coarse} vs {fine}");
}

fn fitted(score: ScoreFunction, theta: f64, k: usize) -> Density<f64> {
    Density::fit_exp_family(score, theta, k).unwrap()
}

#[test]
fn zero_theta_fit_is_flat() {
    for score in [ScoreFunction::Footrule, ScoreFunction::SpearmanRank, ScoreFunction::IdentityBand] {
        let d = fitted(score, 0.0, 32);
        assert!(d.as_grid().unwrap().values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }
}

#[test]
fn fit_has_uniform_marginals() {
    let k = 64;
    let d = fitted(ScoreFunction::SpearmanRank, 2.0, k);
    let g = d.as_grid().unwrap();
    let cell = 1.0 / (k * k) as f64;
    for i in 0..k {
        let row: f64 = (0..k).map(|j| g.value(i, j) * cell).sum();
        let col: f64 = (0..k).map(|j| g.value(j, i) * cell).sum();
        assert!((row - 1.0 / k as f64).abs() < 1e-10);
        assert!((col - 1.0 / k as f64).abs() < 1e-10);
    }
}

#[test]
fn fit_separates_into_row_and_column_terms() {
    let d = fitted(ScoreFunction::SpearmanRank, 2.0, 64);
    assert!(separation_residual(&d, &ScoreFunction::SpearmanRank, 2.0) < 1e-9);
    let DensityKind::ExpFamily(fit) = d.kind() else { panic!("expected a fit") };
    let (a, b) = fit.log_corrections();
    let k = 64;
    let g = fit.grid();
    for c in [0, 17, 1000, k * k - 1] {
        let (i, j) = (c / k, c % k);
        let x = (i as f64 + 0.5) / k as f64;
        let y = (j as f64 + 0.5) / k as f64;
        let rebuilt = (2.0 * (x - y).powi(2) + a[i] + b[j]).exp();
        assert!((rebuilt / g.value(i, j) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn refit_is_idempotent() {
    let d = fitted(ScoreFunction::Footrule, -1.5, 48);
    let values = d.as_grid().unwrap().values().to_vec();
    let again = Density::grid_balanced(48, values.clone()).unwrap();
    let worst = values
        .iter()
        .zip(again.as_grid().unwrap().values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn ipf_divergence_never_increases() {
    let d = fitted(ScoreFunction::IdentityBand, 3.0, 40);
    let DensityKind::ExpFamily(fit) = d.kind() else { panic!("expected a fit") };
    let kl = fit.kl_history();
    assert!(kl.len() >= 2);
    for w in kl.windows(2) {
        assert!(w[1] <= w[0] + 1e-14, "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn bounds_examples() {
    assert_eq!(Density::<f64>::uniform().bounds(), (1.0, 1.0));
    let (m, big_m) = Density::<f64>::frank(1e-9).unwrap().bounds();
    assert!((m - 1.0).abs() < 1e-6 && (big_m - 1.0).abs() < 1e-6);
    let (m, big_m) = Density::<f64>::frank(2.0).unwrap().bounds();
    // fine rescan including the boundary
    let res = 4096;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..=res {
        for j in 0..=res {
            let v = frank_direct(2.0, i as f64 / res as f64, j as f64 / res as f64);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    assert!((m / lo - 1.0).abs() < 1e-4, "{m} vs {lo}");
    assert!((big_m / hi - 1.0).abs() < 1e-4, "{big_m} vs {hi}");
}

#[test]
fn marginal_deviation_examples() {
    assert_eq!(Density::<f64>::uniform().marginal_deviation(512), 0.0);
    assert!(Density::frank(5.0).unwrap().marginal_deviation(512) < 1e-6);
    let flat = Density::grid(12, vec![3.5; 144]).unwrap();
    assert!(flat.marginal_deviation(12) < 1e-15);
    // a grid without uniform marginals is rejected unless balanced
    let skew: Vec<f64> = (0..16).map(|c| 1.0 + (c / 4) as f64).collect();
    assert!(Density::grid(4, skew.clone()).is_err());
    assert!(Density::grid_balanced(4, skew).unwrap().marginal_deviation(4) < 1e-12);
}

#[test]
fn spec_round_trip() {
    for text in [
        r#"{"kind":"uniform"}"#,
        r#"{"kind":"frank","beta":2.5}"#,
        r#"{"kind":"exp_family","score":"footrule","theta":1.0,"k":16}"#,
    ] {
        let spec: DensitySpec = serde_json::from_str(text).unwrap();
        let d: Density<f64> = spec.build().unwrap();
        assert_eq!(d.spec(), spec);
    }
    assert!(serde_json::from_str::<DensitySpec>(r#"{"kind":"frank","beta":1,"x":2}"#).is_err());
    assert!(serde_json::from_str::<DensitySpec>(r#"{"kind":"frank","beta":1e6}"#)
        .unwrap()
        .build::<f64>()
        .is_err());
}

#[test]
fn grid_csv_round_trip() {
    let d = fitted(ScoreFunction::Footrule, 0.7, 16);
    let mut buf = Vec::new();
    d.write_csv(&mut buf).unwrap();
    let back = Density::<f64>::read_csv(buf.as_slice(), false).unwrap();
    // reading renormalizes to unit mass, which may move the last bit
    for (a, b) in back.as_grid().unwrap().values().iter().zip(d.as_grid().unwrap().values()) {
        assert!((a / b - 1.0).abs() < 1e-14);
    }
}

#[test]
fn single_precision_agrees() {
    let d32 = Density::<f32>::frank(3.0).unwrap();
    let d64 = Density::<f64>::frank(3.0).unwrap();
    for &(x, y) in &[(0.2, 0.4), (0.9, 0.1)] {
        let a = d32.eval(x as f32, y as f32) as f64;
        let b = d64.eval(x, y);
        assert!((a / b - 1.0).abs() < 1e-5);
    }
}

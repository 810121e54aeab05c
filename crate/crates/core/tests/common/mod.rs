//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's own quadrature or closed forms.
#![allow(dead_code)]

use permuton_lab::{Density, Permutation, RandomStream, ScoreFunction};

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Frank copula density written directly from its closed form.
pub fn frank_direct(beta: f64, x: f64, y: f64) -> f64 {
    let e = |t: f64| (-beta * t).exp();
    let num = beta * (1.0 - e(1.0)) * e(x + y);
    let den = (1.0 - e(1.0)) - (1.0 - e(x)) * (1.0 - e(y));
    num / (den * den)
}

/// The same density in hyperbolic form, well conditioned near the corners.
pub fn frank_cosh(beta: f64, x: f64, y: f64) -> f64 {
    let den = (beta / 4.0).exp() * (beta * (x - y) / 2.0).cosh()
        - (-beta / 4.0).exp() * (beta * (x + y - 1.0) / 2.0).cosh();
    beta / 2.0 * (beta / 2.0).sinh() / (den * den)
}

/// `O(n²)` inversion count from 1-based targets.
pub fn naive_inversions(targets: &[usize]) -> u64 {
    let mut c = 0;
    for i in 0..targets.len() {
        for j in i + 1..targets.len() {
            if targets[i] > targets[j] {
                c += 1;
            }
        }
    }
    c
}

/// All permutations of `1..=n` by Heap's algorithm, independent of the library enumerator.
pub fn heap_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (1..=n).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Binomial standard deviation of a frequency estimate.
pub fn binomial_sd(p: f64, draws: f64) -> f64 {
    (p * (1.0 - p) / draws).sqrt()
}

/// Empirical pmf over `S_n` indexed by lexicographic rank.
pub fn lex_histogram(n: usize, draws: u64, mut draw: impl FnMut(&mut RandomStream) -> Permutation, seed: u64) -> Vec<f64> {
    let size: usize = (1..=n).product();
    let mut counts = vec![0u64; size];
    let mut stream = RandomStream::new(seed);
    for _ in 0..draws {
        counts[draw(&mut stream).lex_rank()] += 1;
    }
    counts.iter().map(|&c| c as f64 / draws as f64).collect()
}

pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `E[Poi(λ)^k]` as the Touchard polynomial, Stirling numbers from their recurrence.
pub fn touchard(lambda: f64, k: usize) -> f64 {
    let mut s = vec![vec![0f64; k + 1]; k + 1];
    s[0][0] = 1.0;
    for i in 1..=k {
        for j in 1..=i {
            s[i][j] = j as f64 * s[i - 1][j] + s[i - 1][j - 1];
        }
    }
    (0..=k).map(|j| s[k][j] * lambda.powi(j as i32)).sum()
}

/// Fits a(x) + b(y) to `log g − θ f` of a fitted grid by row and column means and returns the
/// largest leftover cross term.
pub fn separation_residual(d: &Density<f64>, score: &ScoreFunction, theta: f64) -> f64 {
    let g = d.as_grid().unwrap();
    let k = g.k();
    let mid = |i: usize| (i as f64 + 0.5) / k as f64;
    let r: Vec<f64> = (0..k * k)
        .map(|c| g.value(c / k, c % k).ln() - theta * score.eval(mid(c / k), mid(c % k)))
        .collect();
    let row: Vec<f64> = (0..k).map(|i| r[i * k..(i + 1) * k].iter().sum::<f64>() / k as f64).collect();
    let col: Vec<f64> = (0..k).map(|j| (0..k).map(|i| r[i * k + j]).sum::<f64>() / k as f64).collect();
    let all = row.iter().sum::<f64>() / k as f64;
    (0..k * k)
        .map(|c| (r[c] - row[c / k] - col[c % k] + all).abs())
        .fold(0.0, f64::max)
}

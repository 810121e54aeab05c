use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest `|β|` accepted by [`frank_eval`].
pub const MAX_FRANK_BETA: f64 = 500.0;

/// Below this `|β|` the density is evaluated by its second-order expansion around `β = 0`.
pub const FRANK_SERIES_CUTOFF: f64 = 1e-4;

/// Limit density of β-scaled Mallows permutations (Frank copula with parameter `β`).
///
/// `ρ_β(x, y) = (β/2) sinh(β/2) / (e^{β/4} cosh(β(x−y)/2) − e^{−β/4} cosh(β(x+y−1)/2))²`
pub fn frank_eval<T: Real>(beta: T, x: T, y: T) -> Result<T> {
    let unit = T::zero()..=T::one();
    if !unit.contains(&x) || !unit.contains(&y) {
        return Err(Error::Parameter(format!(
            "frank density evaluated outside the unit square at ({x}, {y})"
        )));
    }
    check_beta(beta)?;
    Ok(frank_unchecked(beta, x, y))
}

pub(crate) fn check_beta<T: Real>(beta: T) -> Result<()> {
    if !beta.is_finite() || beta.abs() > T::lit(MAX_FRANK_BETA) {
        return Err(Error::Parameter(format!(
            "frank parameter beta = {beta} outside [-{MAX_FRANK_BETA}, {MAX_FRANK_BETA}]"
        )));
    }
    Ok(())
}

pub(crate) fn frank_unchecked<T: Real>(beta: T, x: T, y: T) -> T {
    if beta.abs() < T::lit(FRANK_SERIES_CUTOFF) {
        return frank_series(beta, x, y);
    }
    frank_closed(beta, x, y)
}

fn frank_closed<T: Real>(beta: T, x: T, y: T) -> T {
    let half = T::lit(0.5);
    let a = (beta * (x - y) * half).abs();
    let b = (beta * (x + y - T::one()) * half).abs();
    if beta < T::zero() {
        // ρ_{−β}(x, y) = ρ_β(x, 1 − y) exchanges the roles of a and b
        return frank_positive(-beta, b, a);
    }
    frank_positive(beta, a, b)
}

// 1 + β(2x−1)(2y−1)/2 + β²(6x²−6x+1)(6y²−6y+1)/12
fn frank_series<T: Real>(beta: T, x: T, y: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let first = (two * x - one) * (two * y - one) / two;
    let second = (six * x * x - six * x + one) * (six * y * y - six * y + one) / T::lit(12.0);
    one + beta * first + beta * beta * second
}

// Overflow-free rearrangement for β > 0 with a = |β(x−y)/2|, b = |β(x+y−1)/2|.
// Since a + b <= β/2, both exponents below are non-positive, so S has no cancellation.
fn frank_positive<T: Real>(beta: T, a: T, b: T) -> T {
    let half = T::lit(0.5);
    let e1 = -beta * half + b - a;
    let e2 = -beta * half - b + a;
    let decay = (-(a + a)).exp();
    let s = -e1.exp_m1() - decay * e2.exp_m1();
    beta * (-(-beta).exp_m1()) * decay / (s * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    // The displayed closed form, evaluated directly.
    fn direct(beta: f64, x: f64, y: f64) -> f64 {
        let num = (beta / 2.0) * (beta / 2.0).sinh();
        let den = (beta / 4.0).exp() * (beta * (x - y) / 2.0).cosh()
            - (-beta / 4.0).exp() * (beta * (x + y - 1.0) / 2.0).cosh();
        num / (den * den)
    }

    #[test]
    fn matches_direct_formula() {
        for &beta in &[-30.0, -5.0, -0.3, 0.001, 0.7, 2.0, 5.0, 20.0, 60.0] {
            for i in 0..=20 {
                for j in 0..=20 {
                    let (x, y) = (i as f64 / 20.0, j as f64 / 20.0);
                    let fast = frank_eval(beta, x, y).unwrap();
                    let slow = direct(beta, x, y);
                    assert!(
                        ((fast - slow) / slow).abs() < 1e-9,
                        "beta={beta} x={x} y={y}: {fast} vs {slow}"
                    );
                }
            }
        }
    }

    #[test]
    fn series_branch_is_continuous_with_closed_form() {
        for &(x, y) in &[(0.0f64, 0.0f64), (0.1, 0.9), (0.5, 0.5), (1.0, 0.3)] {
            let b = FRANK_SERIES_CUTOFF;
            let series = frank_series(b, x, y);
            assert!((series - frank_closed(b, x, y)).abs() < 1e-10);
            assert!((frank_series(-b, x, y) - frank_closed(-b, x, y)).abs() < 1e-10);
            assert!((frank_eval(1e-9, x, y).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn large_beta_stays_finite() {
        for &beta in &[500.0, -500.0, 499.0] {
            for &(x, y) in &[(0.0, 0.0), (0.0, 1.0), (0.5, 0.5), (1.0, 1.0), (0.3, 0.31)] {
                let v: f64 = frank_eval(beta, x, y).unwrap();
                assert!(v.is_finite() && v >= 0.0, "beta={beta} ({x},{y}) -> {v}");
            }
        }
        assert!(frank_eval(500.1, 0.5, 0.5).is_err());
        assert!(frank_eval(f64::NAN, 0.5, 0.5).is_err());
        assert!(frank_eval(2.0, 1.5, 0.5).is_err());
    }

    #[test]
    fn single_precision_evaluation() {
        let v: f32 = frank_eval(2.0f32, 0.3, 0.6).unwrap();
        assert!((v as f64 - direct(2.0, 0.3, 0.6)).abs() < 1e-5);
    }
}

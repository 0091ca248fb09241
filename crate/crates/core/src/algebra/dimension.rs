use num::{BigInt, One, Zero};

use super::rational::{check_unit_interval, is_perfect_power, to_f64, Rational};
use crate::error::{Error, Result};

/// Hausdorff dimension of a dust-like system: the unique `s > 0` with
/// `sum_i r_i^s = 1`, found by bisection on the strictly decreasing Moran
/// function.
pub fn solve_dimension(ratios: &[Rational], tol: f64) -> Result<f64> {
    if ratios.len() < 2 {
        return Err(Error::TooFewMaps(ratios.len()));
    }
    for r in ratios {
        check_unit_interval(r)?;
    }
    let rs: Vec<f64> = ratios.iter().map(to_f64).collect();
    let moran = |s: f64| rs.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while moran(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if moran(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 && moran(mid).abs() < tol {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    if moran(s).abs() >= tol {
        return Err(Error::PreconditionFailed(format!(
            "bisection stalled at |moran(s)| = {:e}",
            moran(s).abs()
        )));
    }
    Ok(s)
}

/// Outcome of [`verify_integer_exponents`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerExponentCheck {
    pub all_integers: bool,
    /// The exponents as integers when `all_integers` holds.
    pub integers: Option<Vec<u64>>,
}

/// For `m` not a perfect power and exponents with `sum_j m^{-alpha_j} = 1`,
/// checks that every `alpha_j` is an integer. A `false` answer contradicts
/// the known integrality lemma and is reported rather than thrown.
pub fn verify_integer_exponents(m: u64, alphas: &[Rational]) -> Result<IntegerExponentCheck> {
    if m < 2 {
        return Err(Error::PreconditionFailed(format!("m = {m} < 2")));
    }
    if let Some((p, l)) = is_perfect_power(m) {
        return Err(Error::PreconditionFailed(format!("m = {m} = {p}^{l}")));
    }
    if alphas.iter().any(|a| a <= &Rational::zero()) {
        return Err(Error::PreconditionFailed("non-positive exponent".into()));
    }
    if alphas.iter().all(|a| a.is_integer()) {
        let ints: Vec<u64> = alphas
            .iter()
            .map(|a| a.to_integer().try_into().unwrap_or(u64::MAX))
            .collect();
        let mb = BigInt::from(m);
        let sum: Rational = ints
            .iter()
            .map(|&a| Rational::new(BigInt::one(), num::pow(mb.clone(), a as usize)))
            .sum();
        if !sum.is_one() {
            return Err(Error::PreconditionFailed(format!(
                "sum of m^-alpha is {sum}, not 1"
            )));
        }
        return Ok(IntegerExponentCheck {
            all_integers: true,
            integers: Some(ints),
        });
    }
    // Non-integer exponents: the sum is irrational in general, so only a
    // numeric precondition check is possible.
    let mf = m as f64;
    let sum: f64 = alphas.iter().map(|a| mf.powf(-to_f64(a))).sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::PreconditionFailed(format!(
            "sum of m^-alpha is {sum}, not 1"
        )));
    }
    Ok(IntegerExponentCheck {
        all_integers: false,
        integers: None,
    })
}

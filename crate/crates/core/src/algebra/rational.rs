//! Exact rationals, prime exponent vectors and the commensurability tests
//! built on them.

use std::collections::BTreeMap;

use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Trial division stops here; any cofactor left above this bound must be
/// prime or the factorization is refused.
const TRIAL_LIMIT: u64 = 1_000_000;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

/// Canonical text form: `"p/q"`, or `"p"` for integers.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn check_unit_interval(q: &Rational) -> Result<()> {
    if q.is_positive() && q < &Rational::one() {
        Ok(())
    } else {
        Err(Error::RatioOutOfRange(format_rational(q)))
    }
}

fn factorize_into(n: &BigInt, sign: i64, out: &mut BTreeMap<u64, i64>) -> Result<()> {
    let mut n = n.abs();
    let mut p: u64 = 2;
    while p <= TRIAL_LIMIT {
        let bp = BigInt::from(p);
        if &bp * &bp > n {
            break;
        }
        loop {
            let (q, r) = n.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            n = q;
            *out.entry(p).or_insert(0) += sign;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if !n.is_one() {
        // Cofactor has no divisor below TRIAL_LIMIT; it is prime only when
        // it is below TRIAL_LIMIT squared.
        let lim = BigInt::from(TRIAL_LIMIT) * BigInt::from(TRIAL_LIMIT);
        match n.to_u64() {
            Some(v) if n < lim => *out.entry(v).or_insert(0) += sign,
            _ => {
                return Err(Error::ResourceLimit(format!(
                    "cannot factor {n} by trial division"
                )))
            }
        }
    }
    out.retain(|_, e| *e != 0);
    Ok(())
}

/// Prime exponent vector of a positive rational: `q = prod p^v_p`.
pub fn exponent_vector(q: &Rational) -> Result<BTreeMap<u64, i64>> {
    if !q.is_positive() {
        return Err(Error::PreconditionFailed(format!(
            "exponent vector of non-positive {}",
            format_rational(q)
        )));
    }
    let mut out = BTreeMap::new();
    factorize_into(q.numer(), 1, &mut out)?;
    factorize_into(q.denom(), -1, &mut out)?;
    Ok(out)
}

fn from_exponent_vector(v: &BTreeMap<u64, i64>) -> Rational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for (&p, &e) in v {
        let pe = num::pow(BigInt::from(p), e.unsigned_abs() as usize);
        if e > 0 {
            num *= pe;
        } else {
            den *= pe;
        }
    }
    Rational::new(num, den)
}

/// If `v == t * w` for a rational `t`, returns `t`.
fn proportionality(v: &BTreeMap<u64, i64>, w: &BTreeMap<u64, i64>) -> Option<Rational> {
    if v.len() != w.len() || v.keys().ne(w.keys()) {
        return None;
    }
    let mut t: Option<Rational> = None;
    for (p, &we) in w {
        let cand = rat(v[p], we);
        match &t {
            None => t = Some(cand),
            Some(t0) if *t0 == cand => {}
            Some(_) => return None,
        }
    }
    t
}

/// The ratio root of a commensurable list: the unique `root` in (0,1) whose
/// integer powers generate the same multiplicative group as the ratios,
/// together with the exponents `ratio_i = root^{a_i}` (gcd of the `a_i` is 1).
pub fn ratio_root(ratios: &[Rational]) -> Result<(Rational, Vec<u32>)> {
    let first = ratios
        .first()
        .ok_or_else(|| Error::PreconditionFailed("empty ratio list".into()))?;
    for r in ratios {
        check_unit_interval(r)?;
    }
    let v0 = exponent_vector(first)?;
    let g = v0.values().fold(0i64, |acc, &e| acc.gcd(&e));
    let prim: BTreeMap<u64, i64> = v0.iter().map(|(&p, &e)| (p, e / g)).collect();

    let mut exps = Vec::with_capacity(ratios.len());
    for r in ratios {
        let v = exponent_vector(r)?;
        let t = proportionality(&v, &prim).ok_or(Error::NotCommensurable)?;
        // prim is primitive, so any proportional integer vector is an integer
        // multiple of it; the sign is positive because every ratio is < 1.
        debug_assert!(t.is_integer() && t.is_positive());
        exps.push(t.to_integer().to_u32().ok_or(Error::NotCommensurable)?);
    }
    let g = exps.iter().fold(0u32, |acc, &e| acc.gcd(&e));
    let root_vec: BTreeMap<u64, i64> = prim.iter().map(|(&p, &e)| (p, e * g as i64)).collect();
    let exps = exps.into_iter().map(|e| e / g).collect();
    Ok((from_exponent_vector(&root_vec), exps))
}

/// Returns `p/q` with `a^q = b^p` when `log a / log b` is rational.
pub fn is_log_rational(a: &Rational, b: &Rational) -> Option<Rational> {
    let va = exponent_vector(a).ok()?;
    let vb = exponent_vector(b).ok()?;
    if vb.is_empty() {
        return None;
    }
    proportionality(&va, &vb)
}

/// Exact integer power of a rational (negative exponents allowed).
pub fn rational_pow(q: &Rational, e: i64) -> Rational {
    let base = if e < 0 { q.recip() } else { q.clone() };
    num::pow(base, e.unsigned_abs() as usize)
}

fn integer_root(m: u64, k: u32) -> Option<u64> {
    let guess = (m as f64).powf(1.0 / k as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1).find(|&c| c >= 2 && c.checked_pow(k) == Some(m))
}

/// `(p, l)` with `p^l = m`, `l >= 2` maximal, or `None` when `m` is not a
/// perfect power.
pub fn is_perfect_power(m: u64) -> Option<(u64, u32)> {
    if m < 4 {
        return None;
    }
    let max_k = 63 - m.leading_zeros();
    (2..=max_k).rev().find_map(|k| integer_root(m, k).map(|p| (p, k)))
}

//! Dense univariate polynomials over Z and Q (coefficients in ascending
//! degree order) and extraction of the irreducible factor carrying a given
//! real root.

use num::complex::Complex64;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type IntPoly = Vec<BigInt>;
pub type RatPoly = Vec<BigRational>;

/// Units of the numeric root set are searched exhaustively; above this many
/// the search is refused.
const MAX_ROOT_UNITS: usize = 22;

pub fn trim_int(mut p: IntPoly) -> IntPoly {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

pub fn trim_rat(mut p: RatPoly) -> RatPoly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

pub fn degree<T: Zero>(p: &[T]) -> usize {
    p.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
}

pub fn to_rat(p: &[BigInt]) -> RatPoly {
    trim_rat(p.iter().cloned().map(BigRational::from_integer).collect())
}

/// Scales a nonzero rational polynomial to the primitive integer polynomial
/// with positive leading coefficient.
pub fn primitive(p: &RatPoly) -> IntPoly {
    let p = trim_rat(p.clone());
    let lcm = p
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * &lcm).to_integer()).collect();
    let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let sign = if ints.last().is_some_and(Signed::is_negative) {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    trim_int(ints.into_iter().map(|c| c / &content * &sign).collect())
}

pub fn rat_div_rem(a: &RatPoly, b: &RatPoly) -> (RatPoly, RatPoly) {
    let b = trim_rat(b.clone());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r = trim_rat(a.clone());
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    let lc = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let c = r.last().unwrap() / &lc;
        for (j, bj) in b.iter().enumerate() {
            r[shift + j] -= &c * bj;
        }
        q[shift] = c;
        r.pop();
        r = trim_rat(r);
    }
    (trim_rat(q), r)
}

pub fn rat_gcd(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let mut a = trim_rat(a.clone());
    let mut b = trim_rat(b.clone());
    while !b.is_empty() {
        let (_, r) = rat_div_rem(&a, &b);
        a = b;
        b = r;
    }
    if let Some(lc) = a.last().cloned() {
        a.iter_mut().for_each(|c| *c /= &lc);
    }
    a
}

pub fn derivative(p: &RatPoly) -> RatPoly {
    trim_rat(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
            .collect(),
    )
}

pub fn divides(d: &IntPoly, p: &IntPoly) -> bool {
    rat_div_rem(&to_rat(p), &to_rat(d)).1.is_empty()
}

pub fn eval_f64(p: &[BigInt], x: f64) -> f64 {
    p.iter()
        .rev()
        .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
}

fn eval_c(p: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &c in p.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

/// All complex roots by Aberth–Ehrlich simultaneous iteration.
pub fn complex_roots(p: &[f64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = p[n];
    let cauchy = 1.0 + p[..n].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(0.5 * cauchy, theta)
        })
        .collect();
    for _ in 0..2000 {
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let (v, d) = eval_c(p, z[k]);
            if v.norm() == 0.0 {
                continue;
            }
            let w = v / d;
            let s: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = w / (Complex64::new(1.0, 0.0) - w * s);
            z[k] -= step;
            worst = worst.max(step.norm() / (1.0 + z[k].norm()));
        }
        if worst < 1e-16 {
            break;
        }
    }
    z
}

/// Real root of `p` inside (0,1), assuming `p(0) < 0 < p(1)`, by bisection.
pub fn bisect_unit_root(p: &[BigInt], tol: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let up = eval_f64(p, 1.0) > 0.0;
    while hi - lo > tol.clamp(f64::EPSILON, 1e-15) {
        let mid = 0.5 * (lo + hi);
        if (eval_f64(p, mid) > 0.0) == up {
            hi = mid;
        } else {
            lo = mid;
        }
        if mid == lo && mid == hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn positive_divisors(n: &BigInt) -> Vec<i64> {
    let n = n.abs().to_i64().unwrap_or(1);
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Factor of the square-free part of `p` generated by a set of root units,
/// if one exists with integer coefficients and divides `p` exactly.
fn try_factor(
    roots: &[Complex64],
    leads: &[i64],
    constant: &BigInt,
    target: &IntPoly,
) -> Option<IntPoly> {
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * r;
        }
        poly = next;
    }
    let c0 = constant.abs().to_f64().unwrap_or(f64::INFINITY);
    for &l in leads {
        let lf = l as f64;
        let mag = lf * poly[0].norm();
        if (mag - mag.round()).abs() > 1e-6 * mag.max(1.0) || mag.round() < 1.0 {
            continue;
        }
        if c0.is_finite() && (c0 / mag.round()).fract().abs() > 1e-9 {
            continue;
        }
        let mut cand = Vec::with_capacity(poly.len());
        let mut ok = true;
        for c in &poly {
            let v = c.re * lf;
            if (v - v.round()).abs() > 1e-6 * v.abs().max(1.0) || c.im.abs() * lf > 1e-6 * v.abs().max(1.0) {
                ok = false;
                break;
            }
            cand.push(BigInt::from(v.round() as i64));
        }
        if !ok {
            continue;
        }
        let cand = trim_int(cand);
        if degree(&cand) + 1 == cand.len() && divides(&cand, target) {
            return Some(primitive(&to_rat(&cand)));
        }
    }
    None
}

/// The irreducible factor of `p` over Q that vanishes at the real number
/// `x0`.
///
/// Works on the square-free part: numeric roots are grouped into real roots
/// and conjugate pairs, subsets containing `x0` are tried by increasing
/// degree, and each candidate is accepted only if it divides `p` exactly.
/// The first (lowest-degree) exact factor is irreducible, because any proper
/// factor through `x0` would have been met earlier.
pub fn minimal_factor(p: &IntPoly, x0: f64) -> Result<IntPoly> {
    let rp = to_rat(p);
    let g = rat_gcd(&rp, &derivative(&rp));
    let sqfree = primitive(&rat_div_rem(&rp, &g).0);
    let n = degree(&sqfree);
    if n <= 1 {
        return Ok(sqfree);
    }
    let coeffs: Vec<f64> = sqfree.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let roots = complex_roots(&coeffs);

    // Group into units: real roots alone, complex roots with their conjugate.
    let mut used = vec![false; roots.len()];
    let mut units: Vec<Vec<Complex64>> = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = roots[i];
        if z.im.abs() <= 1e-7 * (1.0 + z.norm()) {
            units.push(vec![Complex64::new(z.re, 0.0)]);
            continue;
        }
        let partner = (0..roots.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                (roots[a] - z.conj())
                    .norm()
                    .total_cmp(&(roots[b] - z.conj()).norm())
            });
        if let Some(j) = partner {
            used[j] = true;
            let zz = Complex64::new(z.re, z.im.abs());
            units.push(vec![zz, zz.conj()]);
        } else {
            units.push(vec![z]);
        }
    }
    let anchor = units
        .iter()
        .enumerate()
        .filter(|(_, u)| u.len() == 1)
        .min_by(|a, b| (a.1[0].re - x0).abs().total_cmp(&(b.1[0].re - x0).abs()))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::PreconditionFailed("no real root near x".into()))?;
    let others: Vec<&Vec<Complex64>> = units
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != anchor)
        .map(|(_, u)| u)
        .collect();
    if others.len() > MAX_ROOT_UNITS {
        return Err(Error::ResourceLimit(format!(
            "Moran polynomial of degree {n} is too large to factor"
        )));
    }
    let leads = positive_divisors(&sqfree[n]);
    let constant = sqfree[0].clone();

    // Try subsets of the other units by increasing total degree.
    let m = others.len();
    let unit_deg = |mask: u64| -> usize {
        1 + (0..m)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| others[b].len())
            .sum::<usize>()
    };
    for deg in 1..=n {
        for mask in 0u64..(1u64 << m) {
            if unit_deg(mask) != deg {
                continue;
            }
            let mut rs = units[anchor].clone();
            for (b, o) in others.iter().enumerate().take(m) {
                if mask >> b & 1 == 1 {
                    rs.extend(o.iter().copied());
                }
            }
            if let Some(f) = try_factor(&rs, &leads, &constant, &sqfree) {
                return Ok(f);
            }
        }
    }
    Err(Error::PreconditionFailed(
        "numeric root grouping found no exact factor".into(),
    ))
}

/// Human-readable form in descending powers, e.g. `2x^2+2x-1`.
pub fn format_poly(p: &[BigInt]) -> String {
    let mut out = String::new();
    for (i, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push(if neg { '-' } else { '+' });
        }
        let coef = if a.is_one() && i > 0 { String::new() } else { a.to_string() };
        match i {
            0 => out.push_str(&a.to_string()),
            1 => out.push_str(&format!("{coef}x")),
            _ => out.push_str(&format!("{coef}x^{i}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, One, Signed, ToPrimitive, Zero};

use super::context::{poly_mul, MoranContext};
use super::poly::{self, RatPoly};
use super::rational::{format_rational, Rational};
use crate::error::{Error, Result};

/// An element of `Q[x]/(m)`, the ring in which cell masses `r_w^s = x^{e_w}`
/// live. Equality is exact comparison of reduced coefficient vectors.
#[derive(Clone)]
pub struct AlgebraicMass {
    coeffs: RatPoly,
    ctx: Arc<MoranContext>,
}

impl AlgebraicMass {
    pub(crate) fn from_reduced(coeffs: RatPoly, ctx: Arc<MoranContext>) -> Self {
        debug_assert_eq!(coeffs.len(), ctx.degree());
        AlgebraicMass { coeffs, ctx }
    }

    pub fn from_coeffs(coeffs: RatPoly, ctx: Arc<MoranContext>) -> Self {
        let coeffs = ctx.reduce(coeffs);
        AlgebraicMass { coeffs, ctx }
    }

    /// Reduced coefficients, lowest degree first, exactly `degree()` long.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn context(&self) -> &Arc<MoranContext> {
        &self.ctx
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ctx.same_ring(&other.ctx) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn mass_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_reduced(coeffs, self.ctx.clone()))
    }

    pub fn mass_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::from_reduced(coeffs, self.ctx.clone()))
    }

    pub fn mass_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_coeffs(
            poly_mul(&self.coeffs, &other.coeffs),
            self.ctx.clone(),
        ))
    }

    /// Exact equality; no floating point involved.
    pub fn mass_eq(&self, other: &Self) -> Result<bool> {
        self.check(other)?;
        Ok(self.coeffs == other.coeffs)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::from_reduced(
            self.coeffs.iter().map(|c| c * k).collect(),
            self.ctx.clone(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.first().is_some_and(One::is_one) && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// Multiplicative inverse in the field `Q[x]/(m)` (the minimal polynomial
    /// is irreducible).
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::PreconditionFailed("inverse of zero mass".into()));
        }
        // Extended Euclid: track u with u * a == r (mod m).
        let m: RatPoly = poly::to_rat(self.ctx.min_poly());
        let mut r0 = m;
        let mut r1 = poly::trim_rat(self.coeffs.clone());
        let mut u0: RatPoly = Vec::new();
        let mut u1: RatPoly = vec![Rational::one()];
        while poly::degree(&r1) > 0 {
            let (q, r) = poly::rat_div_rem(&r0, &r1);
            let qu = poly_mul(&q, &u1);
            let mut next = u0.clone();
            next.resize(next.len().max(qu.len()), Rational::zero());
            for (n, v) in next.iter_mut().zip(&qu) {
                *n -= v;
            }
            u0 = std::mem::replace(&mut u1, poly::trim_rat(next));
            r0 = std::mem::replace(&mut r1, r);
        }
        // r1 is a nonzero constant because m is irreducible.
        let c = r1[0].clone();
        let inv: RatPoly = u1.iter().map(|v| v / &c).collect();
        Ok(Self::from_coeffs(inv, self.ctx.clone()))
    }

    pub fn mass_div(&self, other: &Self) -> Result<Self> {
        self.mass_mul(&other.inverse()?)
    }

    /// Numeric value at the real root `x`.
    pub fn to_f64(&self) -> f64 {
        let x = self.ctx.x_value();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }
}

impl PartialEq for AlgebraicMass {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_ring(&other.ctx) && self.coeffs == other.coeffs
    }
}

impl Eq for AlgebraicMass {}

impl fmt::Display for AlgebraicMass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let a = format_rational(&c.abs());
            let body = match i {
                0 => a,
                1 if c.abs().is_one() => "x".to_string(),
                1 => format!("{a}*x"),
                _ if c.abs().is_one() => format!("x^{i}"),
                _ => format!("{a}*x^{i}"),
            };
            write!(f, "{sign}{body}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for AlgebraicMass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraicMass({self})")
    }
}

/// An unreduced sum of monomials `sum_e n_e x^e` with nonnegative integer
/// multiplicities; this is the multiset of cell masses before any use of
/// the Moran relation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonomialSum(pub BTreeMap<u32, BigInt>);

impl MonomialSum {
    pub fn from_pairs(pairs: &[(u32, u64)]) -> Self {
        let mut m = BTreeMap::new();
        for &(e, n) in pairs {
            if n > 0 {
                *m.entry(e).or_insert_with(BigInt::zero) += n;
            }
        }
        MonomialSum(m)
    }

    /// The Moran sum `sum_i x^{a_i}` of an exponent list.
    pub fn from_exponents(exps: &[u32]) -> Self {
        let mut m = BTreeMap::new();
        for &e in exps {
            *m.entry(e).or_insert_with(BigInt::zero) += 1;
        }
        MonomialSum(m)
    }

    pub fn count(&self, e: u32) -> u64 {
        self.0.get(&e).and_then(|n| n.to_u64()).unwrap_or(0)
    }

    pub fn total_terms(&self) -> BigInt {
        self.0.values().sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut m: BTreeMap<u32, BigInt> = BTreeMap::new();
        for (ea, na) in &self.0 {
            for (eb, nb) in &other.0 {
                *m.entry(ea + eb).or_insert_with(BigInt::zero) += na * nb;
            }
        }
        MonomialSum(m)
    }

    pub fn to_mass(&self, ctx: &Arc<MoranContext>) -> AlgebraicMass {
        ctx.from_counts(self.0.iter().map(|(&e, n)| (e, n)))
    }

    /// Flattens to one exponent per unit of multiplicity.
    pub fn to_exponent_list(&self) -> Vec<u32> {
        let mut v = Vec::new();
        for (&e, n) in &self.0 {
            v.extend(std::iter::repeat_n(e, n.to_usize().unwrap_or(0)));
        }
        v
    }
}

/// `base^k` expanded without reduction; for the Moran sum of a system this is
/// the multiset of masses of the cells indexed by words of length `k`.
pub fn expand_power(base: &MonomialSum, k: u32) -> MonomialSum {
    let mut out = MonomialSum::from_pairs(&[(0, 1)]);
    for _ in 0..k {
        out = out.mul(base);
    }
    out
}

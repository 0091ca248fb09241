use std::fmt;
use std::sync::Arc;

use num::{BigInt, One, Zero};

use super::mass::AlgebraicMass;
use super::poly::{self, IntPoly, RatPoly};
use super::rational::{self, Rational};
use crate::error::{Error, Result};

/// Default bisection tolerance for the real root of the Moran polynomial.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Arithmetic home of a commensurable system: the ratio root `r`, the
/// exponents `r_i = r^{a_i}`, and the ring `Q[x]/(m)` where `x = r^s` and `m`
/// is the minimal polynomial of `x`.
pub struct MoranContext {
    ratio_root: Rational,
    exponents: Vec<u32>,
    moran_poly: IntPoly,
    min_poly: IntPoly,
    x_value: f64,
    s_value: f64,
}

impl fmt::Debug for MoranContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MoranContext")
            .field("ratio_root", &rational::format_rational(&self.ratio_root))
            .field("exponents", &self.exponents)
            .field("min_poly", &poly::format_poly(&self.min_poly))
            .field("x_value", &self.x_value)
            .finish()
    }
}

impl MoranContext {
    /// Builds the context of a list of exact ratios.
    pub fn build(ratios: &[Rational]) -> Result<Arc<Self>> {
        Self::build_with_tol(ratios, DEFAULT_ROOT_TOL)
    }

    pub fn build_with_tol(ratios: &[Rational], tol: f64) -> Result<Arc<Self>> {
        if ratios.len() < 2 {
            return Err(Error::TooFewMaps(ratios.len()));
        }
        let (root, exps) = rational::ratio_root(ratios)?;
        Self::with_root(root, exps, tol)
    }

    /// Context for exponents measured against a prescribed root (which may
    /// be finer than the system's own ratio root, e.g. a joint root of two
    /// systems).
    pub fn with_root(root: Rational, exponents: Vec<u32>, tol: f64) -> Result<Arc<Self>> {
        rational::check_unit_interval(&root)?;
        if exponents.len() < 2 {
            return Err(Error::TooFewMaps(exponents.len()));
        }
        if exponents.contains(&0) {
            return Err(Error::PreconditionFailed("zero exponent".into()));
        }
        let moran_poly = moran_polynomial(&exponents);
        let x_value = poly::bisect_unit_root(&moran_poly, tol);
        let min_poly = poly::minimal_factor(&moran_poly, x_value)?;
        let x_value = poly::bisect_unit_root(&min_poly, tol);
        let s_value = x_value.ln() / rational::to_f64(&root).ln();
        Ok(Arc::new(MoranContext {
            ratio_root: root,
            exponents,
            moran_poly,
            min_poly,
            x_value,
            s_value,
        }))
    }

    pub fn ratio_root(&self) -> &Rational {
        &self.ratio_root
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// `sum_i x^{a_i} - 1`, ascending coefficients.
    pub fn moran_poly(&self) -> &IntPoly {
        &self.moran_poly
    }

    pub fn min_poly(&self) -> &IntPoly {
        &self.min_poly
    }

    /// Numeric value of `x = r^s` in (0,1).
    pub fn x_value(&self) -> f64 {
        self.x_value
    }

    /// Numeric Hausdorff dimension `s`.
    pub fn s_value(&self) -> f64 {
        self.s_value
    }

    /// Degree of the minimal polynomial, i.e. the dimension of the ring over Q.
    pub fn degree(&self) -> usize {
        poly::degree(&self.min_poly)
    }

    pub(crate) fn same_ring(&self, other: &MoranContext) -> bool {
        std::ptr::eq(self, other)
            || (self.min_poly == other.min_poly && self.ratio_root == other.ratio_root)
    }

    /// Reduces a coefficient vector modulo the minimal polynomial and pads
    /// it to exactly `degree()` entries.
    pub(crate) fn reduce(&self, mut c: RatPoly) -> RatPoly {
        let m = &self.min_poly;
        let d = poly::degree(m);
        let lc = Rational::from_integer(m[d].clone());
        let mq: Vec<Rational> = m.iter().cloned().map(Rational::from_integer).collect();
        while c.len() > d {
            let top = c.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let f = top / &lc;
            let shift = c.len() - d;
            for j in 0..d {
                c[shift + j] -= &f * &mq[j];
            }
        }
        c.resize(d, Rational::zero());
        c
    }

    pub fn zero(self: &Arc<Self>) -> AlgebraicMass {
        AlgebraicMass::from_reduced(vec![Rational::zero(); self.degree()], self.clone())
    }

    pub fn one(self: &Arc<Self>) -> AlgebraicMass {
        self.constant(Rational::one())
    }

    pub fn constant(self: &Arc<Self>, q: Rational) -> AlgebraicMass {
        AlgebraicMass::from_coeffs(vec![q], self.clone())
    }

    /// `x^e`.
    pub fn monomial(self: &Arc<Self>, e: u32) -> AlgebraicMass {
        let mut result = vec![Rational::one()];
        let mut base = self.reduce(vec![Rational::zero(), Rational::one()]);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.reduce(poly_mul(&result, &base));
            }
            e >>= 1;
            if e > 0 {
                base = self.reduce(poly_mul(&base, &base));
            }
        }
        AlgebraicMass::from_coeffs(result, self.clone())
    }

    /// `sum_e count_e * x^e`.
    pub fn from_counts<'a, I>(self: &Arc<Self>, counts: I) -> AlgebraicMass
    where
        I: IntoIterator<Item = (u32, &'a BigInt)>,
    {
        let mut acc = vec![Rational::zero(); self.degree()];
        for (e, n) in counts {
            let m = self.monomial(e);
            let n = Rational::from_integer(n.clone());
            for (a, c) in acc.iter_mut().zip(m.coeffs()) {
                *a += &n * c;
            }
        }
        AlgebraicMass::from_reduced(acc, self.clone())
    }

    /// Exact check that another system's exponent list satisfies this
    /// context's Moran relation, i.e. `sum x^{b_j} = 1` in the ring.
    pub fn satisfies_moran(self: &Arc<Self>, exponents: &[u32]) -> bool {
        let p = moran_polynomial(exponents);
        poly::divides(&self.min_poly, &p)
    }
}

pub(crate) fn poly_mul(a: &[Rational], b: &[Rational]) -> RatPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `sum_i x^{a_i} - 1` with integer coefficients.
pub fn moran_polynomial(exponents: &[u32]) -> IntPoly {
    let top = exponents.iter().copied().max().unwrap_or(0) as usize;
    let mut p = vec![BigInt::zero(); top + 1];
    p[0] = -BigInt::one();
    for &a in exponents {
        p[a as usize] += 1;
    }
    poly::trim_int(p)
}

/// Convenience: builds the context straight from ratios and reports the
/// numeric dimension.
pub fn build_context(ratios: &[Rational]) -> Result<Arc<MoranContext>> {
    MoranContext::build(ratios)
}

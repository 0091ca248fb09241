//! Lipschitz-equivalence decisions for the cases settled by a homogeneous
//! side, with replayable certificates.

use std::fmt;

use num::{BigInt, One};
use serde::Serialize;

use crate::algebra::{
    format_rational, is_log_rational, is_perfect_power, solve_dimension, verify_integer_exponents,
    Rational, DEFAULT_ROOT_TOL,
};
use crate::error::{Error, Result};
use crate::ifs::IfsSpec;
use crate::massdecomp::PairContext;

/// Tolerance for comparing dimensions of incommensurable systems.
pub const NUMERIC_DIMENSION_TOL: f64 = 1e-10;

/// Marker recorded for the inhomogeneous commensurable pair whose
/// non-equivalence is a known external result.
pub const EXTERNAL_COUNTEREXAMPLE: &str = "external-counterexample:inhomogeneous-commensurable-pair";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DimensionCheck {
    Exact,
    Numeric,
}

impl fmt::Display for DimensionCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DimensionCheck::Exact => "exact",
            DimensionCheck::Numeric => "numeric",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DimensionComparison {
    Equal(DimensionCheck),
    Different { domain: f64, target: f64 },
}

impl DimensionComparison {
    pub fn is_equal(&self) -> bool {
        matches!(self, DimensionComparison::Equal(_))
    }
}

/// Equal dimensions are decided exactly when both Moran relations hold in
/// one ring, and numerically otherwise.
pub fn compare_dimensions(domain: &IfsSpec, target: &IfsSpec) -> Result<DimensionComparison> {
    match PairContext::new(domain, target) {
        Ok(_) => Ok(DimensionComparison::Equal(DimensionCheck::Exact)),
        Err(Error::DimensionMismatch(_)) => Ok(DimensionComparison::Different {
            domain: solve_dimension(&domain.ratios(), DEFAULT_ROOT_TOL)?,
            target: solve_dimension(&target.ratios(), DEFAULT_ROOT_TOL)?,
        }),
        Err(Error::NotCommensurable) => {
            let a = solve_dimension(&domain.ratios(), DEFAULT_ROOT_TOL)?;
            let b = solve_dimension(&target.ratios(), DEFAULT_ROOT_TOL)?;
            Ok(if (a - b).abs() <= NUMERIC_DIMENSION_TOL {
                DimensionComparison::Equal(DimensionCheck::Numeric)
            } else {
                DimensionComparison::Different { domain: a, target: b }
            })
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Equivalent,
    NotEquivalentExternal,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Hypothesis {
    HomogeneousDomain,
    HomogeneousTarget,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `#maps = base^power` on the homogeneous side, and every ratio of the
    /// other side is `r^{exponent / power}` with `sum base^{-exponent} = 1`.
    IntegerExponents {
        base: u64,
        power: u32,
        ratio: String,
        exponents: Vec<u64>,
        moran_sum: String,
    },
    /// Rational exponents found, but they are not all integers.
    RationalExponents { exponents: Vec<String> },
    External { marker: String },
    None,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceVerdict {
    pub status: Status,
    pub hypothesis_used: Option<Hypothesis>,
    pub certificate: Certificate,
    pub dimension_check: Option<DimensionCheck>,
    /// Set when a user-supplied hypothesis contradicts what it forces.
    pub inconsistent_hypothesis: bool,
    pub notes: Vec<String>,
}

impl EquivalenceVerdict {
    fn unknown(check: Option<DimensionCheck>, note: impl Into<String>) -> Self {
        EquivalenceVerdict {
            status: Status::Unknown,
            hypothesis_used: None,
            certificate: Certificate::None,
            dimension_check: check,
            inconsistent_hypothesis: false,
            notes: vec![note.into()],
        }
    }

    /// Replays the certificate's Moran sum exactly.
    pub fn replay(&self) -> bool {
        match &self.certificate {
            Certificate::IntegerExponents { base, exponents, .. } => {
                moran_sum(*base, exponents).is_one()
            }
            _ => false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }
}

fn moran_sum(base: u64, exponents: &[u64]) -> Rational {
    let b = BigInt::from(base);
    exponents
        .iter()
        .map(|&a| Rational::new(BigInt::one(), num::pow(b.clone(), a as usize)))
        .sum()
}

fn require_equal_dimensions(domain: &IfsSpec, target: &IfsSpec) -> Result<DimensionCheck> {
    match compare_dimensions(domain, target)? {
        DimensionComparison::Equal(c) => Ok(c),
        DimensionComparison::Different { domain: a, target: b } => Err(Error::DimensionMismatch(
            format!("dimensions {a:.12} and {b:.12} differ"),
        )),
    }
}

/// Decides equivalence when `homogeneous` has a single ratio `r`: every
/// ratio of `other` must be a rational power of `r`. After writing the map
/// count as `base^power` with `base` not a perfect power, the exponents
/// scaled by `power` are integers whose Moran sum replays exactly.
pub fn decide_homogeneous_domain(homogeneous: &IfsSpec, other: &IfsSpec) -> Result<EquivalenceVerdict> {
    if !homogeneous.is_homogeneous() {
        return Err(Error::PreconditionFailed(
            "the first system is not homogeneous".into(),
        ));
    }
    let check = require_equal_dimensions(homogeneous, other)?;
    let r = homogeneous.maps[0].ratio.clone();
    let mut alphas = Vec::with_capacity(other.len());
    for (j, lam) in other.ratios().iter().enumerate() {
        match is_log_rational(lam, &r) {
            Some(a) => alphas.push(a),
            None => {
                return Ok(EquivalenceVerdict::unknown(
                    Some(check),
                    format!(
                        "log of ratio {} (map {}) is not a rational multiple of log {}",
                        format_rational(lam),
                        j + 1,
                        format_rational(&r)
                    ),
                ))
            }
        }
    }
    let n = homogeneous.len() as u64;
    let (base, power) = is_perfect_power(n).unwrap_or((n, 1));
    let scaled: Vec<Rational> = alphas
        .iter()
        .map(|a| a * Rational::from_integer(BigInt::from(power)))
        .collect();
    let out = verify_integer_exponents(base, &scaled)?;
    match out.integers {
        Some(exponents) if out.all_integers => {
            let sum = moran_sum(base, &exponents);
            Ok(EquivalenceVerdict {
                status: Status::Equivalent,
                hypothesis_used: None,
                certificate: Certificate::IntegerExponents {
                    base,
                    power,
                    ratio: format_rational(&r),
                    exponents,
                    moran_sum: format_rational(&sum),
                },
                dimension_check: Some(check),
                inconsistent_hypothesis: false,
                notes: Vec::new(),
            })
        }
        _ => Ok(EquivalenceVerdict {
            status: Status::Unknown,
            hypothesis_used: None,
            certificate: Certificate::RationalExponents {
                exponents: scaled.iter().map(format_rational).collect(),
            },
            dimension_check: Some(check),
            inconsistent_hypothesis: false,
            notes: vec!["exponents are rational but not all integers".into()],
        }),
    }
}

/// Decision under the user's assumption that a Lipschitz map with image of
/// positive measure exists between the systems, one of which is homogeneous.
/// Under that assumption equivalence forces the rationality certificate, so
/// a failed certificate is flagged as an inconsistent hypothesis.
pub fn decide_with_embedding_hypothesis(
    domain: &IfsSpec,
    target: &IfsSpec,
    hypothesis: Hypothesis,
) -> Result<EquivalenceVerdict> {
    let (hom, other) = match hypothesis {
        Hypothesis::HomogeneousDomain => (domain, target),
        Hypothesis::HomogeneousTarget => (target, domain),
    };
    if !hom.is_homogeneous() {
        let why = if !domain.is_homogeneous() && !target.is_homogeneous() {
            "neither system is homogeneous".to_string()
        } else {
            format!("{hypothesis:?} does not hold")
        };
        return Err(Error::HypothesisNotApplicable(why));
    }
    let mut v = decide_homogeneous_domain(hom, other)?;
    v.hypothesis_used = Some(hypothesis);
    v.notes.push(
        "assumed: a Lipschitz map from the domain with image of positive measure exists".into(),
    );
    if v.status != Status::Equivalent {
        v.inconsistent_hypothesis = true;
        v.notes
            .push("the assumption forces rational exponents, which fail here".into());
    }
    Ok(v)
}

fn sorted_ratios(s: &IfsSpec) -> Vec<Rational> {
    let mut r = s.ratios();
    r.sort();
    r
}

/// Whether the pair is, up to map order and translations, the
/// inhomogeneous commensurable pair known not to be equivalent.
pub fn is_known_counterexample(domain: &IfsSpec, target: &IfsSpec) -> bool {
    let third = Rational::new(1.into(), 3.into());
    let ninth = Rational::new(1.into(), 9.into());
    let k = {
        let mut v = vec![ninth.clone(), ninth, third.clone(), third];
        v.sort();
        v
    };
    let f = {
        let mut v = vec![Rational::new(1.into(), 729.into()); 8];
        v.extend(vec![Rational::new(1.into(), 27.into()); 20]);
        v.sort();
        v
    };
    let (a, b) = (sorted_ratios(domain), sorted_ratios(target));
    (a == k && b == f) || (a == f && b == k)
}

/// Tries every applicable decision path without assumptions: a homogeneous
/// side on either end, then the external counterexample record.
pub fn decide(domain: &IfsSpec, target: &IfsSpec) -> Result<EquivalenceVerdict> {
    let check = match compare_dimensions(domain, target)? {
        DimensionComparison::Equal(c) => c,
        DimensionComparison::Different { domain: a, target: b } => {
            return Ok(EquivalenceVerdict::unknown(
                None,
                format!("dimensions {a:.12} and {b:.12} differ, so the sets are not equivalent"),
            ))
        }
    };
    if domain.is_homogeneous() {
        return decide_homogeneous_domain(domain, target);
    }
    if target.is_homogeneous() {
        return decide_homogeneous_domain(target, domain);
    }
    if is_known_counterexample(domain, target) {
        return Ok(EquivalenceVerdict {
            status: Status::NotEquivalentExternal,
            hypothesis_used: None,
            certificate: Certificate::External {
                marker: EXTERNAL_COUNTEREXAMPLE.into(),
            },
            dimension_check: Some(check),
            inconsistent_hypothesis: false,
            notes: vec!["non-equivalence is an external result, not derived here".into()],
        });
    }
    Ok(EquivalenceVerdict::unknown(
        Some(check),
        "neither system is homogeneous",
    ))
}

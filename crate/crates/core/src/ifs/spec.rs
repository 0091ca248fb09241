use std::path::Path;

use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{check_unit_interval, format_rational, parse_rational, to_f64, Rational};
use crate::error::{Error, Result};

mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// `x -> ratio * rotation * x + translation`. A missing rotation is the
/// identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Similitude {
    #[serde(with = "rational_str")]
    pub ratio: Rational,
    #[serde(with = "rational_vec")]
    pub translation: Vec<Rational>,
    pub rotation: Option<Vec<Vec<f64>>>,
}

impl Similitude {
    pub fn new(ratio: Rational, translation: Vec<Rational>) -> Self {
        Similitude {
            ratio,
            translation,
            rotation: None,
        }
    }

    /// The rotation as an exact matrix when every entry is `-1`, `0` or `1`
    /// (identity and signed permutations).
    pub fn exact_rotation(&self, d: usize) -> Option<Vec<Vec<Rational>>> {
        match &self.rotation {
            None => Some(
                (0..d)
                    .map(|i| {
                        (0..d)
                            .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                            .collect()
                    })
                    .collect(),
            ),
            Some(m) => m
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&v| {
                            if v == 0.0 {
                                Some(Rational::zero())
                            } else if v == 1.0 {
                                Some(Rational::one())
                            } else if v == -1.0 {
                                Some(-Rational::one())
                            } else {
                                None
                            }
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn apply_exact(&self, rot: &[Vec<Rational>], p: &[Rational]) -> Vec<Rational> {
        rot.iter()
            .zip(&self.translation)
            .map(|(row, t)| {
                let dot: Rational = row.iter().zip(p).map(|(a, b)| a * b).sum();
                &self.ratio * dot + t
            })
            .collect()
    }

    pub fn apply_f64(&self, p: &[f64]) -> Vec<f64> {
        let r = to_f64(&self.ratio);
        let d = self.translation.len();
        (0..d)
            .map(|i| {
                let dot: f64 = match &self.rotation {
                    None => p[i],
                    Some(m) => m[i].iter().zip(p).map(|(a, b)| a * b).sum(),
                };
                r * dot + to_f64(&self.translation[i])
            })
            .collect()
    }
}

/// A dust-like self-similar system: at least two contracting similitudes of
/// `R^dimension`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IfsSpec {
    pub dimension: usize,
    #[serde(default)]
    pub label: String,
    pub maps: Vec<Similitude>,
}

impl IfsSpec {
    pub fn new(label: impl Into<String>, dimension: usize, maps: Vec<Similitude>) -> Result<Self> {
        let spec = IfsSpec {
            dimension,
            label: label.into(),
            maps,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Points on the line: `x -> r_i x + t_i`.
    pub fn on_line(label: impl Into<String>, maps: &[(Rational, Rational)]) -> Result<Self> {
        let maps = maps
            .iter()
            .map(|(r, t)| Similitude::new(r.clone(), vec![t.clone()]))
            .collect();
        Self::new(label, 1, maps)
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn ratios(&self) -> Vec<Rational> {
        self.maps.iter().map(|m| m.ratio.clone()).collect()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.maps.windows(2).all(|w| w[0].ratio == w[1].ratio)
    }

    /// Whether every rotation is a signed permutation, so that cell geometry
    /// can be computed in exact rationals.
    pub fn has_exact_rotations(&self) -> bool {
        self.maps
            .iter()
            .all(|m| m.exact_rotation(self.dimension).is_some())
    }

    pub fn validate(&self) -> Result<()> {
        if self.maps.len() < 2 {
            return Err(Error::TooFewMaps(self.maps.len()));
        }
        if self.maps.len() > 256 {
            return Err(Error::PreconditionFailed(format!(
                "{} maps exceed the 256-letter alphabet",
                self.maps.len()
            )));
        }
        if self.dimension == 0 {
            return Err(Error::PreconditionFailed("dimension 0".into()));
        }
        let d = self.dimension;
        for (i, m) in self.maps.iter().enumerate() {
            check_unit_interval(&m.ratio)?;
            if m.translation.len() != d {
                return Err(Error::PreconditionFailed(format!(
                    "map {}: translation has {} entries, expected {d}",
                    i + 1,
                    m.translation.len()
                )));
            }
            if let Some(rot) = &m.rotation {
                if rot.len() != d || rot.iter().any(|row| row.len() != d) {
                    return Err(Error::PreconditionFailed(format!(
                        "map {}: rotation is not {d}x{d}",
                        i + 1
                    )));
                }
                for a in 0..d {
                    for b in 0..d {
                        let dot: f64 = (0..d).map(|k| rot[k][a] * rot[k][b]).sum();
                        let want = if a == b { 1.0 } else { 0.0 };
                        if (dot - want).abs() > 1e-12 {
                            return Err(Error::PreconditionFailed(format!(
                                "map {}: rotation is not orthogonal",
                                i + 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: IfsSpec =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("IFS spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fixed point of map `i`, exactly when the rotation is a signed
    /// permutation.
    pub fn fixed_point_exact(&self, i: usize) -> Option<Vec<Rational>> {
        let m = &self.maps[i];
        let d = self.dimension;
        let rot = m.exact_rotation(d)?;
        // (I - r O) p = t
        let mut a: Vec<Vec<Rational>> = (0..d)
            .map(|row| {
                let mut v: Vec<Rational> = (0..d)
                    .map(|col| {
                        let id = if row == col { Rational::one() } else { Rational::zero() };
                        id - &m.ratio * &rot[row][col]
                    })
                    .collect();
                v.push(m.translation[row].clone());
                v
            })
            .collect();
        solve_exact(&mut a)
    }

    pub fn fixed_point_f64(&self, i: usize) -> Vec<f64> {
        if let Some(p) = self.fixed_point_exact(i) {
            return p.iter().map(to_f64).collect();
        }
        // Contraction: iterate to convergence.
        let mut p = vec![0.0; self.dimension];
        for _ in 0..2000 {
            p = self.maps[i].apply_f64(&p);
        }
        p
    }
}

/// Gauss-Jordan on an augmented `d x (d+1)` rational matrix.
fn solve_exact(a: &mut [Vec<Rational>]) -> Option<Vec<Rational>> {
    let d = a.len();
    for col in 0..d {
        let piv = (col..d).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v /= &p;
        }
        for r in 0..d {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot).skip(col) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(a.iter().map(|row| row[d].clone()).collect())
}

pub(crate) fn dist_exact_sq(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Exact distance when it is rational (always in dimension 1), else `None`.
pub(crate) fn dist_exact(a: &[Rational], b: &[Rational]) -> Option<Rational> {
    if a.len() == 1 {
        return Some((&a[0] - &b[0]).abs());
    }
    let sq = dist_exact_sq(a, b);
    let n = sq.numer().sqrt();
    let d = sq.denom().sqrt();
    if &n * &n == *sq.numer() && &d * &d == *sq.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    #[test]
    fn json_round_trip_is_exact() {
        let text = r#"{"dimension":1,"label":"c","maps":[{"ratio":"1/3","translation":["0"],"rotation":null},{"ratio":"2/6","translation":["2/3"],"rotation":[[-1.0]]}]}"#;
        let spec = IfsSpec::from_json(text).unwrap();
        assert_eq!(spec.maps[1].ratio, rat(1, 3));
        let again = IfsSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, again);
        assert_eq!(spec.to_json(), again.to_json());
        assert!(spec.to_json().contains("\"1/3\""));
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(
            IfsSpec::on_line("one", &[(rat(1, 2), rat(0, 1))]),
            Err(Error::TooFewMaps(1))
        ));
        assert!(IfsSpec::on_line("big", &[(rat(1, 1), rat(0, 1)), (rat(1, 2), rat(1, 2))]).is_err());
        assert!(IfsSpec::from_json("{\"dimension\":1}").is_err());
        let skew = r#"{"dimension":2,"label":"s","maps":[{"ratio":"1/3","translation":["0","0"],"rotation":[[1.0,0.5],[0.0,1.0]]},{"ratio":"1/3","translation":["1","0"],"rotation":null}]}"#;
        assert!(IfsSpec::from_json(skew).is_err());
    }

    #[test]
    fn fixed_points() {
        let spec = IfsSpec::on_line("cantor", &[(rat(1, 3), rat(0, 1)), (rat(1, 3), rat(2, 3))]).unwrap();
        assert_eq!(spec.fixed_point_exact(1).unwrap(), vec![rat(1, 1)]);
        let flip = r#"{"dimension":1,"label":"f","maps":[{"ratio":"1/3","translation":["1/3"],"rotation":[[-1.0]]},{"ratio":"1/3","translation":["2/3"],"rotation":null}]}"#;
        let spec = IfsSpec::from_json(flip).unwrap();
        // p = 1/3 - p/3
        assert_eq!(spec.fixed_point_exact(0).unwrap(), vec![rat(1, 4)]);
    }
}

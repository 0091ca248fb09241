use num::{One, Signed, Zero};

use super::cut::word_ratio;
use super::spec::{dist_exact, dist_f64, IfsSpec, Similitude};
use super::word::{wedge, Word};
use crate::algebra::{to_f64, Rational};
use crate::error::{Error, Result};

/// Safety margin subtracted from floating-point separation estimates.
const FLOAT_MARGIN: f64 = 1e-12;

/// Certificate of the strong separation condition: a ball `B(center, R)`
/// mapped into itself by every map, whose images are pairwise at distance at
/// least `delta_k`.
#[derive(Clone, Debug)]
pub struct SeparationCert {
    pub center: Vec<f64>,
    pub center_exact: Option<Vec<Rational>>,
    pub hull_radius: f64,
    pub hull_radius_exact: Option<Rational>,
    pub delta_k: f64,
    /// Present when the whole computation ran in exact rationals.
    pub delta_k_exact: Option<Rational>,
}

/// A system together with its separation certificate and exact data used by
/// cell geometry.
#[derive(Clone, Debug)]
pub struct Realization {
    spec: IfsSpec,
    cert: SeparationCert,
    rotations: Option<Vec<Vec<Vec<Rational>>>>,
    hull_1d: Option<(Rational, Rational)>,
    anchors: Vec<Vec<f64>>,
    anchors_exact: Option<Vec<Vec<Rational>>>,
}

#[derive(Clone, Debug)]
pub struct CellGeometry {
    /// `phi_w(0)`.
    pub representative: Vec<f64>,
    pub representative_exact: Option<Vec<Rational>>,
    /// `r_w`, the cell diameter for a normalized system.
    pub diameter: Rational,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct DistanceBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_exact: Option<Rational>,
    pub upper_exact: Option<Rational>,
}

fn center_candidates(spec: &IfsSpec) -> Vec<(Vec<f64>, Option<Vec<Rational>>)> {
    let d = spec.dimension;
    let n = spec.len();
    let exact: Option<Vec<Vec<Rational>>> = (0..n).map(|i| spec.fixed_point_exact(i)).collect();
    let mut out = Vec::new();
    if let Some(fps) = exact {
        let mid: Vec<Rational> = (0..d)
            .map(|k| {
                let lo = fps.iter().map(|p| &p[k]).min().unwrap().clone();
                let hi = fps.iter().map(|p| &p[k]).max().unwrap().clone();
                (lo + hi) / Rational::from_integer(2.into())
            })
            .collect();
        let cnt = Rational::from_integer((n as i64).into());
        let centroid: Vec<Rational> = (0..d)
            .map(|k| fps.iter().map(|p| p[k].clone()).sum::<Rational>() / &cnt)
            .collect();
        for c in [mid, centroid] {
            out.push((c.iter().map(to_f64).collect(), Some(c)));
        }
    } else {
        let fps: Vec<Vec<f64>> = (0..n).map(|i| spec.fixed_point_f64(i)).collect();
        let mid: Vec<f64> = (0..d)
            .map(|k| {
                let lo = fps.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
                let hi = fps.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
                0.5 * (lo + hi)
            })
            .collect();
        let centroid: Vec<f64> = (0..d)
            .map(|k| fps.iter().map(|p| p[k]).sum::<f64>() / n as f64)
            .collect();
        out.push((mid, None));
        out.push((centroid, None));
    }
    out
}

fn try_center(spec: &IfsSpec, c: &[f64], c_exact: Option<&Vec<Rational>>) -> SeparationCert {
    let d = spec.dimension;
    let rots: Option<Vec<_>> = spec.maps.iter().map(|m| m.exact_rotation(d)).collect();
    if let (Some(ce), Some(rots), 1) = (c_exact, rots.as_ref(), d) {
        let imgs: Vec<Vec<Rational>> = spec
            .maps
            .iter()
            .zip(rots)
            .map(|(m, rot)| m.apply_exact(rot, ce))
            .collect();
        let radius = spec
            .maps
            .iter()
            .zip(&imgs)
            .map(|(m, p)| (&p[0] - &ce[0]).abs() / (Rational::one() - &m.ratio))
            .max()
            .unwrap();
        let mut delta: Option<Rational> = None;
        for i in 0..imgs.len() {
            for j in i + 1..imgs.len() {
                let gap = (&imgs[i][0] - &imgs[j][0]).abs()
                    - (&spec.maps[i].ratio + &spec.maps[j].ratio) * &radius;
                if delta.as_ref().is_none_or(|d0| &gap < d0) {
                    delta = Some(gap);
                }
            }
        }
        let delta = delta.unwrap();
        return SeparationCert {
            center: c.to_vec(),
            center_exact: Some(ce.clone()),
            hull_radius: to_f64(&radius),
            hull_radius_exact: Some(radius),
            delta_k: to_f64(&delta),
            delta_k_exact: Some(delta),
        };
    }
    let imgs: Vec<Vec<f64>> = spec.maps.iter().map(|m| m.apply_f64(c)).collect();
    let radius = spec
        .maps
        .iter()
        .zip(&imgs)
        .map(|(m, p)| dist_f64(p, c) / (1.0 - to_f64(&m.ratio)))
        .fold(0.0, f64::max)
        * (1.0 + FLOAT_MARGIN);
    let mut delta = f64::INFINITY;
    for i in 0..imgs.len() {
        for j in i + 1..imgs.len() {
            let gap = dist_f64(&imgs[i], &imgs[j])
                - (to_f64(&spec.maps[i].ratio) + to_f64(&spec.maps[j].ratio)) * radius;
            delta = delta.min(gap);
        }
    }
    SeparationCert {
        center: c.to_vec(),
        center_exact: None,
        hull_radius: radius,
        hull_radius_exact: None,
        delta_k: delta - FLOAT_MARGIN,
        delta_k_exact: None,
    }
}

/// Certifies the strong separation condition with an invariant ball.
pub fn validate_ssc(spec: &IfsSpec) -> Result<SeparationCert> {
    spec.validate()?;
    let mut best: Option<SeparationCert> = None;
    for (c, ce) in center_candidates(spec) {
        let cert = try_center(spec, &c, ce.as_ref());
        if best.as_ref().is_none_or(|b| cert.delta_k > b.delta_k) {
            best = Some(cert);
        }
    }
    let best = best.expect("at least one candidate");
    let positive = match &best.delta_k_exact {
        Some(q) => q.is_positive(),
        None => best.delta_k > 0.0,
    };
    if positive {
        Ok(best)
    } else {
        Err(Error::SscUnverifiable(format!(
            "invariant ball images of {:?} overlap or touch (gap {:e})",
            spec.label, best.delta_k
        )))
    }
}

/// Exact convex hull of a line attractor: the extreme points are fixed
/// points of words of length at most 2.
pub fn attractor_hull_1d(spec: &IfsSpec) -> Option<(Rational, Rational)> {
    if spec.dimension != 1 {
        return None;
    }
    let coeffs: Vec<(Rational, Rational)> = spec
        .maps
        .iter()
        .map(|m| {
            let o = m.exact_rotation(1)?[0][0].clone();
            Some((&m.ratio * o, m.translation[0].clone()))
        })
        .collect::<Option<_>>()?;
    let mut cands = Vec::new();
    for (a, t) in &coeffs {
        cands.push(t / (Rational::one() - a));
        for (b, u) in &coeffs {
            // x = a (b x + u) + t
            cands.push((a * u + t) / (Rational::one() - a * b));
        }
    }
    let lo = cands.iter().min()?.clone();
    let hi = cands.iter().max()?.clone();
    let invariant = coeffs.iter().all(|(a, t)| {
        let p = a * &lo + t;
        let q = a * &hi + t;
        p >= lo && p <= hi && q >= lo && q <= hi
    });
    invariant.then_some((lo, hi))
}

/// Lower estimate of the attractor diameter from images of the fixed points
/// under words of length `depth` (capped to a few thousand points). The true
/// diameter exceeds it by at most `2 r_max^depth` times the diameter.
pub fn diameter_estimate(spec: &IfsSpec, depth: u32) -> f64 {
    let n = spec.len();
    let mut depth = depth;
    while depth > 0 && (n as f64).powi(depth as i32) > 3000.0 {
        depth -= 1;
    }
    let mut pts: Vec<Vec<f64>> = (0..n).map(|i| spec.fixed_point_f64(i)).collect();
    for _ in 0..depth {
        pts = spec
            .maps
            .iter()
            .flat_map(|m| pts.iter().map(move |p| m.apply_f64(p)))
            .collect();
    }
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.max(dist_f64(&pts[i], &pts[j]));
        }
    }
    best
}

/// Translates and rescales so the attractor contains the origin and has
/// diameter 1. Exact for line systems; otherwise the diameter is estimated
/// at `depth`.
pub fn normalize(spec: &IfsSpec, depth: u32) -> Result<IfsSpec> {
    validate_ssc(spec)?;
    let d = spec.dimension;
    let (anchor, scale): (Vec<Rational>, Rational) = match attractor_hull_1d(spec) {
        Some((lo, hi)) => {
            let w = &hi - &lo;
            (vec![lo], w)
        }
        None => {
            let a = match spec.fixed_point_exact(0) {
                Some(p) => p,
                None => spec.fixed_point_f64(0).iter().map(|&v| from_f64(v)).collect(),
            };
            (a, from_f64(diameter_estimate(spec, depth)))
        }
    };
    let anchor_f: Vec<f64> = anchor.iter().map(to_f64).collect();
    let maps = spec
        .maps
        .iter()
        .map(|m| {
            // phi'(x) = (phi(a + D x) - a) / D = r O x + (phi(a) - a) / D
            let img: Vec<Rational> = match m.exact_rotation(d) {
                Some(rot) => m.apply_exact(&rot, &anchor),
                None => m.apply_f64(&anchor_f).iter().map(|&v| from_f64(v)).collect(),
            };
            let translation = img
                .iter()
                .zip(&anchor)
                .map(|(p, a)| (p - a) / &scale)
                .collect();
            Similitude {
                ratio: m.ratio.clone(),
                translation,
                rotation: m.rotation.clone(),
            }
        })
        .collect();
    IfsSpec::new(spec.label.clone(), d, maps)
}

fn from_f64(v: f64) -> Rational {
    Rational::from_float(v).unwrap_or_else(Rational::zero)
}

impl Realization {
    pub fn new(spec: IfsSpec) -> Result<Self> {
        let cert = validate_ssc(&spec)?;
        let d = spec.dimension;
        let rotations: Option<Vec<_>> = spec.maps.iter().map(|m| m.exact_rotation(d)).collect();
        let hull_1d = attractor_hull_1d(&spec);
        let anchors_exact: Option<Vec<Vec<Rational>>> =
            (0..spec.len()).map(|i| spec.fixed_point_exact(i)).collect();
        let anchors = (0..spec.len()).map(|i| spec.fixed_point_f64(i)).collect();
        Ok(Realization {
            spec,
            cert,
            rotations,
            hull_1d,
            anchors,
            anchors_exact,
        })
    }

    pub fn spec(&self) -> &IfsSpec {
        &self.spec
    }

    pub fn cert(&self) -> &SeparationCert {
        &self.cert
    }

    pub fn alphabet(&self) -> usize {
        self.spec.len()
    }

    pub fn is_exact(&self) -> bool {
        self.rotations.is_some()
    }

    /// `phi_w(p)` in exact arithmetic, when rotations are signed permutations.
    pub fn image_exact(&self, w: &Word, p: &[Rational]) -> Option<Vec<Rational>> {
        let rots = self.rotations.as_ref()?;
        let mut q = p.to_vec();
        for &l in w.letters().iter().rev() {
            q = self.spec.maps[l as usize].apply_exact(&rots[l as usize], &q);
        }
        Some(q)
    }

    pub fn image_f64(&self, w: &Word, p: &[f64]) -> Vec<f64> {
        let mut q = p.to_vec();
        for &l in w.letters().iter().rev() {
            q = self.spec.maps[l as usize].apply_f64(&q);
        }
        q
    }

    pub fn representative_exact(&self, w: &Word) -> Option<Vec<Rational>> {
        self.image_exact(w, &vec![Rational::zero(); self.spec.dimension])
    }

    pub fn representative(&self, w: &Word) -> Vec<f64> {
        match self.representative_exact(w) {
            Some(p) => p.iter().map(to_f64).collect(),
            None => self.image_f64(w, &vec![0.0; self.spec.dimension]),
        }
    }

    pub fn cell_geometry(&self, w: &Word) -> CellGeometry {
        let representative_exact = self.representative_exact(w);
        let representative = match &representative_exact {
            Some(p) => p.iter().map(to_f64).collect(),
            None => self.image_f64(w, &vec![0.0; self.spec.dimension]),
        };
        let diameter = word_ratio(&self.spec, w);
        let (box_lo, box_hi) = match &self.hull_1d {
            Some((lo, hi)) => {
                let a = self.image_exact(w, std::slice::from_ref(lo)).expect("exact line system");
                let b = self.image_exact(w, std::slice::from_ref(hi)).expect("exact line system");
                let (a, b) = if a[0] <= b[0] { (a, b) } else { (b, a) };
                (vec![to_f64(&a[0])], vec![to_f64(&b[0])])
            }
            None => {
                let c = self.image_f64(w, &self.cert.center);
                let rad = to_f64(&diameter) * self.cert.hull_radius;
                (
                    c.iter().map(|v| v - rad).collect(),
                    c.iter().map(|v| v + rad).collect(),
                )
            }
        };
        CellGeometry {
            representative,
            representative_exact,
            diameter,
            box_lo,
            box_hi,
        }
    }

    /// Bounds on `dist(K_w1, K_w2)`. The lower bound is `r_{w1 ^ w2} * Delta`;
    /// the upper bound is the least distance between images of points known
    /// to lie in the attractor (the maps' fixed points).
    pub fn cell_distance_bounds(&self, w1: &Word, w2: &Word) -> Result<DistanceBounds> {
        if w1.comparable(w2) {
            return Err(Error::PrefixOverlap);
        }
        let common = word_ratio(&self.spec, &wedge(w1, w2));
        let lower_exact = self.cert.delta_k_exact.as_ref().map(|d| &common * d);
        let lower = to_f64(&common) * self.cert.delta_k;
        let mut upper_exact: Option<Rational> = None;
        let mut exact_ok = false;
        if let Some(anchors) = &self.anchors_exact {
            let a: Vec<_> = anchors.iter().filter_map(|p| self.image_exact(w1, p)).collect();
            let b: Vec<_> = anchors.iter().filter_map(|p| self.image_exact(w2, p)).collect();
            let mut all_rational = !a.is_empty();
            for p in &a {
                for q in &b {
                    match dist_exact(p, q) {
                        Some(dq) => {
                            if upper_exact.as_ref().is_none_or(|u| &dq < u) {
                                upper_exact = Some(dq);
                            }
                        }
                        None => all_rational = false,
                    }
                }
            }
            exact_ok = all_rational;
        }
        if !exact_ok {
            upper_exact = None;
        }
        let upper = match &upper_exact {
            Some(u) => to_f64(u),
            None => {
                let a: Vec<_> = self.anchors.iter().map(|p| self.image_f64(w1, p)).collect();
                let b: Vec<_> = self.anchors.iter().map(|p| self.image_f64(w2, p)).collect();
                a.iter()
                    .flat_map(|p| b.iter().map(move |q| dist_f64(p, q)))
                    .fold(f64::INFINITY, f64::min)
            }
        };
        Ok(DistanceBounds {
            lower: lower.min(upper),
            upper,
            lower_exact,
            upper_exact,
        })
    }
}

pub fn cell_geometry(real: &Realization, w: &Word) -> CellGeometry {
    real.cell_geometry(w)
}

pub fn cell_distance_bounds(real: &Realization, w1: &Word, w2: &Word) -> Result<DistanceBounds> {
    real.cell_distance_bounds(w1, w2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::ifs::presets;

    #[test]
    fn cantor_certificate() {
        let cert = validate_ssc(&presets::cantor()).unwrap();
        assert_eq!(cert.delta_k_exact, Some(rat(1, 3)));
        assert_eq!(cert.hull_radius_exact, Some(rat(1, 2)));
    }

    #[test]
    fn domain_certificate_sees_equal_gaps() {
        let cert = validate_ssc(&presets::mixed_domain()).unwrap();
        assert_eq!(cert.delta_k_exact, Some(rat(1, 27)));
        let cert = validate_ssc(&presets::mixed_target()).unwrap();
        assert_eq!(cert.delta_k_exact, Some(rat(181, 19683)));
    }

    #[test]
    fn touching_pieces_are_refused() {
        let spec = IfsSpec::on_line("touch", &[(rat(1, 2), rat(0, 1)), (rat(1, 2), rat(1, 2))]).unwrap();
        assert!(matches!(validate_ssc(&spec), Err(Error::SscUnverifiable(_))));
    }

    #[test]
    fn normalization() {
        let cantor = presets::cantor();
        assert_eq!(normalize(&cantor, 8).unwrap(), cantor);
        let doubled = IfsSpec::on_line("c2", &[(rat(1, 3), rat(0, 1)), (rat(1, 3), rat(4, 3))]).unwrap();
        let n = normalize(&doubled, 8).unwrap();
        assert_eq!(n.maps[1].translation, vec![rat(2, 3)]);
        let shifted = IfsSpec::on_line("c3", &[(rat(1, 3), rat(5, 1)), (rat(1, 3), rat(17, 3))]).unwrap();
        assert_eq!(normalize(&shifted, 8).unwrap().maps[1].translation, vec![rat(2, 3)]);
        let k = presets::mixed_domain();
        assert_eq!(attractor_hull_1d(&k), Some((rat(0, 1), rat(1, 1))));
        for depth in 1..5 {
            let est = diameter_estimate(&k, depth);
            assert!(est <= 1.0 + 1e-15 && est >= 1.0 - 2.0 * 3f64.powi(-(depth as i32)));
        }
    }

    #[test]
    fn cell_geometry_values() {
        let cantor = Realization::new(presets::cantor()).unwrap();
        let g = cantor.cell_geometry(&Word::empty());
        assert_eq!(g.representative, vec![0.0]);
        assert_eq!(g.diameter, rat(1, 1));
        let g = cantor.cell_geometry(&Word::parse("22", 2).unwrap());
        assert_eq!(g.representative_exact, Some(vec![rat(8, 9)]));
        assert_eq!((g.box_lo[0], g.box_hi[0]), (8.0 / 9.0, 1.0));

        let k = Realization::new(presets::mixed_domain()).unwrap();
        let g = k.cell_geometry(&Word::parse("3", 4).unwrap());
        assert_eq!(g.representative_exact, Some(vec![rat(20, 27)]));
        assert_eq!(g.diameter, rat(1, 9));
    }

    #[test]
    fn distance_bounds() {
        let cantor = Realization::new(presets::cantor()).unwrap();
        let w = |s| Word::parse(s, 2).unwrap();
        let b = cantor.cell_distance_bounds(&w("1"), &w("2")).unwrap();
        assert_eq!(b.lower_exact, Some(rat(1, 3)));
        assert_eq!(b.upper_exact, Some(rat(1, 3)));
        let b = cantor.cell_distance_bounds(&w("11"), &w("12")).unwrap();
        assert_eq!(b.lower_exact, Some(rat(1, 9)));
        assert!(b.lower <= b.upper);
        assert!(matches!(
            cantor.cell_distance_bounds(&w("1"), &w("1")),
            Err(Error::PrefixOverlap)
        ));
        assert!(matches!(
            cantor.cell_distance_bounds(&w("1"), &w("12")),
            Err(Error::PrefixOverlap)
        ));
    }
}

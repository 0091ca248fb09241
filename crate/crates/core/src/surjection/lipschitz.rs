use std::fmt::Write as _;

use num::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::tree::PartitionTree;
use crate::algebra::{rational_pow, to_f64, Rational};
use crate::error::Result;
use crate::ifs::{attractor_hull_1d, wedge, word_exponent, Realization, Word};

/// Letters drawn past the deepest cut level an address must reach.
const EXTRA_LETTERS: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct PairSample {
    /// Largest `k` such that both points share a domain cell of cut level
    /// `1 + k c`; `-1` when they lie in distinct first-level cells.
    pub k_star: i64,
    pub x: Vec<f64>,
    pub x2: Vec<f64>,
    pub gx: Vec<f64>,
    pub gx2: Vec<f64>,
    pub ratio: f64,
    /// `|g(x) - g(x')|` is within the largest target-cell diameter at the
    /// pair's separation scale.
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleProfile {
    pub k_star: i64,
    pub pairs: usize,
    pub max_ratio: f64,
    pub analytic_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzEstimate {
    pub depth: u32,
    pub samples: usize,
    pub seed: u64,
    pub sampled_max: f64,
    pub analytic_bound: f64,
    /// Every sampled pair satisfied the separation bound.
    pub separation_ok: bool,
    pub profile: Vec<ScaleProfile>,
    #[serde(skip)]
    pub pairs: Vec<PairSample>,
}

impl LipschitzEstimate {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,x',gx,gx',ratio\n");
        let fmt = |p: &[f64]| {
            p.iter()
                .map(|v| format!("{v:.17e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for p in &self.pairs {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.17e}",
                fmt(&p.x),
                fmt(&p.x2),
                fmt(&p.gx),
                fmt(&p.gx2),
                p.ratio
            );
        }
        out
    }
}

/// A point of the attractor in exact form when the maps allow it.
#[derive(Clone, Debug)]
enum Point {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

impl Point {
    fn to_f64(&self) -> Vec<f64> {
        match self {
            Point::Exact(p) => p.iter().map(to_f64).collect(),
            Point::Float(p) => p.clone(),
        }
    }
}

fn point(real: &Realization, w: &Word) -> Point {
    match real.spec().fixed_point_exact(0).and_then(|p| real.image_exact(w, &p)) {
        Some(p) => Point::Exact(p),
        None => Point::Float(real.image_f64(w, &real.spec().fixed_point_f64(0))),
    }
}

fn dist_sq(a: &Point, b: &Point) -> (Option<Rational>, f64) {
    match (a, b) {
        (Point::Exact(p), Point::Exact(q)) => {
            let d: Rational = p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum();
            let f = to_f64(&d);
            (Some(d), f)
        }
        _ => {
            let (p, q) = (a.to_f64(), b.to_f64());
            (None, p.iter().zip(&q).map(|(x, y)| (x - y) * (x - y)).sum())
        }
    }
}

/// Uniform letters until the exponent reaches `threshold`, then a few more.
fn draw_tail(rng: &mut ChaCha8Rng, exps: &[u32], mut w: Word, threshold: u32) -> Word {
    let n = exps.len();
    while word_exponent(exps, &w) < threshold {
        w.push(rng.gen_range(0..n) as u8);
    }
    for _ in 0..EXTRA_LETTERS {
        w.push(rng.gen_range(0..n) as u8);
    }
    w
}

/// Repeats `letter` until the exponent reaches `threshold`, then a few more.
fn fill(exps: &[u32], mut w: Word, letter: u8, threshold: u32) -> Word {
    while word_exponent(exps, &w) < threshold {
        w.push(letter);
    }
    for _ in 0..EXTRA_LETTERS {
        w.push(letter);
    }
    w
}

/// Endpoints of a line attractor with orientation-preserving maps, with the
/// letters whose fixed points they are. Cell `w` then spans
/// `[psi_w(lo), psi_w(hi)]`, and its endpoints have addresses `w lo_letter^inf`
/// and `w hi_letter^inf`.
struct Edges {
    lo: (Rational, u8),
    hi: (Rational, u8),
}

fn edges(real: &Realization) -> Option<Edges> {
    let spec = real.spec();
    let preserving = spec
        .maps
        .iter()
        .all(|m| m.exact_rotation(1).is_some_and(|r| r[0][0].is_positive()));
    if spec.dimension != 1 || !preserving {
        return None;
    }
    let (lo, hi) = attractor_hull_1d(spec)?;
    let letter = |x: &Rational| {
        (0..spec.len()).find(|&i| spec.fixed_point_exact(i).is_some_and(|p| &p[0] == x))
    };
    let (l, h) = (letter(&lo)?, letter(&hi)?);
    Some(Edges {
        lo: (lo, l as u8),
        hi: (hi, h as u8),
    })
}

fn stream(seed: u64, idx: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx);
    rng
}

/// Smallest exponent among the target-cut words at `level`: the largest cell
/// of that cut has ratio `root^min`.
fn min_cut_exponent(exps: &[u32], level: u32) -> u32 {
    if level == 0 {
        return 0;
    }
    let mut reach = vec![false; level as usize];
    reach[0] = true;
    let mut best = u32::MAX;
    for e in 0..level as usize {
        if !reach[e] {
            continue;
        }
        for &a in exps {
            let ne = e + a as usize;
            if ne >= level as usize {
                best = best.min(ne as u32);
            } else {
                reach[ne] = true;
            }
        }
    }
    best
}

struct Bounds {
    root: Rational,
    c: u32,
    target_exps: Vec<u32>,
    /// Diameter of the target attractor.
    diam_f: Option<Rational>,
    diam_f64: f64,
    /// Separation constant of the domain.
    sep_k: f64,
}

impl Bounds {
    /// Largest target-cell diameter at cut level `1 + (k* - 1) c`, the whole
    /// attractor for `k* <= 0`.
    fn image_diameter(&self, k_star: i64) -> (Option<Rational>, f64) {
        let scale = if k_star <= 0 {
            Rational::from_integer(1.into())
        } else {
            let level = 1 + (k_star as u32 - 1) * self.c;
            rational_pow(&self.root, min_cut_exponent(&self.target_exps, level) as i64)
        };
        (
            self.diam_f.as_ref().map(|d| d * &scale),
            self.diam_f64 * to_f64(&scale),
        )
    }

    /// Points not sharing a cell at level `1 + (k* + 1) c` are at distance at
    /// least `Delta * root^{(k* + 1) c}`.
    fn analytic(&self, k_star: i64) -> f64 {
        let sep = self.sep_k * to_f64(&rational_pow(&self.root, (k_star + 1) * self.c as i64));
        self.image_diameter(k_star).1 / sep
    }
}

/// Samples `samples` pairs of domain points and reports the largest
/// observed ratio `|g(x) - g(x')| / |x - x'|` for the level-`k` map, where
/// `g(x)` is represented by a point of the assigned target cell. The second
/// point of each pair shares a random prefix with the first, so every
/// separation scale is exercised. On a line with orientation-preserving maps,
/// half of the pairs instead take the facing endpoints of the two cells just
/// past the split, where the ratio of a cell-constant map is largest. Draws are deterministic in `seed` and do
/// not depend on `k`.
pub fn estimate_lipschitz(tree: &PartitionTree, k: u32, samples: usize, seed: u64) -> Result<LipschitzEstimate> {
    let lvl = tree.level(k)?;
    let pair = tree.pair();
    let c = tree.step_c();
    let dom = tree.domain();
    let tgt = tree.target();
    let identity = tree.identity_cells(k)?;
    let diam_f = attractor_hull_1d(tgt.spec()).map(|(lo, hi)| (hi - lo).abs());
    let bounds = Bounds {
        root: pair.root.clone(),
        c,
        target_exps: pair.target_exps.clone(),
        diam_f64: diam_f
            .as_ref()
            .map(to_f64)
            .unwrap_or(2.0 * tgt.cert().hull_radius),
        diam_f,
        sep_k: dom.cert().delta_k,
    };
    let threshold = lvl.source_level;
    // Addresses reach past the deepest built level, so every depth of one
    // tree is evaluated on the same pairs.
    let draw_level = tree.levels().last().map_or(threshold, |l| l.source_level);
    let image = |addr: &Word, x: &Point| -> Result<Point> {
        let i = crate::ifs::locate_in(&lvl.sources, addr).ok_or(crate::Error::AddressTooShort {
            len: addr.len(),
            level: threshold,
        })?;
        let t = lvl.assignment[i] as usize;
        Ok(if identity[t] { x.clone() } else { point(tgt, &lvl.targets[t]) })
    };

    let edges = edges(dom);
    let mut pairs = Vec::with_capacity(samples);
    for s in 0..samples as u64 {
        let mut r1 = stream(seed, 2 * s);
        let a = draw_tail(&mut r1, &pair.domain_exps, Word::empty(), draw_level);
        let mut r2 = stream(seed, 2 * s + 1);
        let split = r2.gen_range(0..a.len());
        let mut b = a.truncate(split);
        let n = dom.alphabet() as u8;
        let other = (a.letters()[split] + r2.gen_range(1..n)) % n;
        b.push(other);
        let facing = edges.as_ref().filter(|_| r2.gen_bool(0.5));
        let (a, b, x, x2) = match facing {
            Some(e) => {
                let pa = a.truncate(split + 1);
                let lo_of = |w: &Word| dom.image_exact(w, std::slice::from_ref(&e.lo.0)).map(|p| p[0].clone());
                let (left, right) = match (lo_of(&pa), lo_of(&b)) {
                    (Some(u), Some(v)) if u > v => (b, pa),
                    _ => (pa, b),
                };
                let end = |w: &Word, p: &Rational| Point::Exact(dom.image_exact(w, std::slice::from_ref(p)).unwrap_or_default());
                let (x, x2) = (end(&left, &e.hi.0), end(&right, &e.lo.0));
                let l = fill(&pair.domain_exps, left, e.hi.1, draw_level);
                let r = fill(&pair.domain_exps, right, e.lo.1, draw_level);
                (l, r, x, x2)
            }
            None => {
                let b = draw_tail(&mut r2, &pair.domain_exps, b, draw_level);
                let (x, x2) = (point(dom, &a), point(dom, &b));
                (a, b, x, x2)
            }
        };

        let e_common = word_exponent(&pair.domain_exps, &wedge(&a, &b));
        let k_star = if e_common == 0 { -1 } else { ((e_common - 1) / c) as i64 };
        let (gx, gx2) = (image(&a, &x)?, image(&b, &x2)?);
        let (_, dx) = dist_sq(&x, &x2);
        let (g_exact, g_f) = dist_sq(&gx, &gx2);
        let (cap_exact, cap_f) = bounds.image_diameter(k_star);
        let within_bound = match (g_exact, cap_exact) {
            (Some(g), Some(cap)) => g <= &cap * &cap,
            _ => g_f.sqrt() <= cap_f * (1.0 + 1e-12),
        };
        let ratio = if g_f.is_zero() { 0.0 } else { g_f.sqrt() / dx.sqrt() };
        pairs.push(PairSample {
            k_star,
            x: x.to_f64(),
            x2: x2.to_f64(),
            gx: gx.to_f64(),
            gx2: gx2.to_f64(),
            ratio,
            within_bound,
        });
    }

    let top = pairs.iter().map(|p| p.k_star).max().unwrap_or(-1).max(k as i64);
    let mut profile = Vec::new();
    for ks in -1..=top {
        let here: Vec<&PairSample> = pairs.iter().filter(|p| p.k_star == ks).collect();
        profile.push(ScaleProfile {
            k_star: ks,
            pairs: here.len(),
            max_ratio: here.iter().map(|p| p.ratio).fold(0.0, f64::max),
            analytic_bound: bounds.analytic(ks),
        });
    }
    Ok(LipschitzEstimate {
        depth: k,
        samples,
        seed,
        sampled_max: pairs.iter().map(|p| p.ratio).fold(0.0, f64::max),
        analytic_bound: profile.iter().map(|p| p.analytic_bound).fold(0.0, f64::max),
        separation_ok: pairs.iter().all(|p| p.within_bound),
        profile,
        pairs,
    })
}

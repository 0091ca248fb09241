//! Exact multiset partition over exponent-count vectors.
//!
//! Atoms are cells of mass `x^e`, grouped by exponent class. Each target
//! receives a count vector over the classes whose exact mass equals the
//! target. Classes are tried largest mass first with counts descending;
//! a float estimate prunes, the ring decides.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use num::{BigInt, Zero};

use crate::algebra::{AlgebraicMass, MoranContext, Rational};
use crate::error::{Error, Result};

/// Relative tolerance for the float pruning pass.
const REL_TOL: f64 = 1e-9;

/// Hard cap on explored candidate vectors per solve.
const NODE_LIMIT: u64 = 200_000_000;

/// A target mass: either a single monomial `x^e`, or a general ring element.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetMass {
    Monomial(u32),
    Mass(AlgebraicMass),
}

impl TargetMass {
    pub fn to_mass(&self, ctx: &Arc<MoranContext>) -> AlgebraicMass {
        match self {
            TargetMass::Monomial(e) => ctx.monomial(*e),
            TargetMass::Mass(m) => m.clone(),
        }
    }
}

struct Scaled {
    /// Reference exponent `s`; atoms of class `e` weigh `x^{e-s}`.
    shift: i64,
    value: f64,
    exact: Vec<Rational>,
}

pub(crate) struct Solver<'a> {
    ctx: &'a Arc<MoranContext>,
    classes: Vec<u32>,
    targets: Vec<Scaled>,
    /// Atom coefficient vectors keyed by `e - s`.
    atom_cache: HashMap<i64, Vec<Rational>>,
    order: Vec<usize>,
    failed: HashSet<(usize, Vec<u64>, Option<Vec<u64>>)>,
    nodes: u64,
}

fn signed_monomial(ctx: &Arc<MoranContext>, e: i64) -> AlgebraicMass {
    if e >= 0 {
        ctx.monomial(e as u32)
    } else {
        ctx.monomial((-e) as u32)
            .inverse()
            .expect("x is a unit")
    }
}

impl<'a> Solver<'a> {
    pub(crate) fn new(
        ctx: &'a Arc<MoranContext>,
        classes: Vec<u32>,
        targets: &[TargetMass],
    ) -> Self {
        let x = ctx.x_value();
        let scaled: Vec<Scaled> = targets
            .iter()
            .map(|t| match t {
                TargetMass::Monomial(e) => Scaled {
                    shift: *e as i64,
                    value: 1.0,
                    exact: ctx.one().coeffs().to_vec(),
                },
                TargetMass::Mass(m) => Scaled {
                    shift: 0,
                    value: m.to_f64(),
                    exact: m.coeffs().to_vec(),
                },
            })
            .collect();
        // Descending by true mass; ties keep input order so identical
        // targets stay adjacent after the stable sort below.
        let mut order: Vec<usize> = (0..targets.len()).collect();
        let true_value = |i: usize| -> f64 { scaled[i].value.ln() + scaled[i].shift as f64 * x.ln() };
        order.sort_by(|&a, &b| {
            true_value(b)
                .partial_cmp(&true_value(a))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| targets[a].key().cmp(&targets[b].key()))
                .then(a.cmp(&b))
        });
        Solver {
            ctx,
            classes,
            targets: scaled,
            atom_cache: HashMap::new(),
            order,
            failed: HashSet::new(),
            nodes: 0,
        }
    }

    fn atom(&mut self, d: i64) -> &Vec<Rational> {
        let ctx = self.ctx;
        self.atom_cache
            .entry(d)
            .or_insert_with(|| signed_monomial(ctx, d).coeffs().to_vec())
    }

    fn same_target(&self, a: usize, b: usize) -> bool {
        let (ta, tb) = (&self.targets[a], &self.targets[b]);
        ta.shift == tb.shift && ta.exact == tb.exact
    }

    /// Solves for one count vector per target (indexed like the input), or
    /// `None` when no exact assignment exists.
    pub(crate) fn solve(&mut self, avail: Vec<u64>) -> Result<Option<Vec<Vec<u64>>>> {
        let mut out = vec![Vec::new(); self.targets.len()];
        let ok = self.assign(0, avail, None, &mut out)?;
        Ok(ok.then_some(out))
    }

    fn assign(
        &mut self,
        pos: usize,
        avail: Vec<u64>,
        prev: Option<Vec<u64>>,
        out: &mut Vec<Vec<u64>>,
    ) -> Result<bool> {
        if pos == self.order.len() {
            return Ok(avail.iter().all(|&a| a == 0));
        }
        let key = (pos, avail.clone(), prev.clone());
        if self.failed.contains(&key) {
            return Ok(false);
        }
        let t = self.order[pos];
        let x = self.ctx.x_value();
        let shift = self.targets[t].shift;
        let weights: Vec<f64> = self
            .classes
            .iter()
            .map(|&e| x.powi((e as i64 - shift) as i32))
            .collect();
        // Mass still available in classes i.. (for the upper-bound prune).
        let mut tail = vec![0.0; self.classes.len() + 1];
        for i in (0..self.classes.len()).rev() {
            tail[i] = tail[i + 1] + weights[i] * avail[i] as f64;
        }
        let value = self.targets[t].value;
        let tol = REL_TOL * value.abs().max(1e-300);
        let mut choice = vec![0u64; self.classes.len()];
        let found = self.enum_class(
            0, t, pos, value, tol, &weights, &tail, &avail, &mut choice, prev.as_deref(), true, out,
        )?;
        if !found {
            self.failed.insert(key);
        }
        Ok(found)
    }

    #[allow(clippy::too_many_arguments)]
    fn enum_class(
        &mut self,
        i: usize,
        t: usize,
        pos: usize,
        rem: f64,
        tol: f64,
        weights: &[f64],
        tail: &[f64],
        avail: &[u64],
        choice: &mut Vec<u64>,
        prev: Option<&[u64]>,
        tight: bool,
        out: &mut Vec<Vec<u64>>,
    ) -> Result<bool> {
        if rem < -tol || rem > tail[i] + tol {
            return Ok(false);
        }
        if i == self.classes.len() {
            if rem.abs() > tol {
                return Ok(false);
            }
            self.nodes += 1;
            if self.nodes > NODE_LIMIT {
                return Err(Error::ResourceLimit(format!(
                    "decomposition search exceeded {NODE_LIMIT} candidates"
                )));
            }
            if !self.exact_match(t, choice) || choice.iter().all(|&c| c == 0) {
                return Ok(false);
            }
            let rest: Vec<u64> = avail.iter().zip(choice.iter()).map(|(a, c)| a - c).collect();
            out[t] = choice.clone();
            let next_prev = (pos + 1 < self.order.len() && self.same_target(t, self.order[pos + 1]))
                .then(|| choice.clone());
            return self.assign(pos + 1, rest, next_prev, out);
        }
        let w = weights[i];
        let mut hi = ((rem + tol) / w).floor().max(0.0) as u64;
        hi = hi.min(avail[i]);
        if tight {
            if let Some(p) = prev {
                hi = hi.min(p[i]);
            }
        }
        // The smallest count that can still leave the remainder coverable.
        let need = rem - tail[i + 1] - tol;
        let lo = if need > 0.0 { (need / w).ceil() as u64 } else { 0 };
        let mut c = hi as i64;
        while c >= lo as i64 {
            let cu = c as u64;
            choice[i] = cu;
            let still_tight = tight && prev.is_some_and(|p| p[i] == cu);
            if self.enum_class(
                i + 1,
                t,
                pos,
                rem - cu as f64 * w,
                tol,
                weights,
                tail,
                avail,
                choice,
                prev,
                still_tight,
                out,
            )? {
                return Ok(true);
            }
            c -= 1;
        }
        choice[i] = 0;
        Ok(false)
    }

    fn exact_match(&mut self, t: usize, choice: &[u64]) -> bool {
        let shift = self.targets[t].shift;
        let deg = self.ctx.degree();
        let mut acc = vec![Rational::zero(); deg];
        let classes = self.classes.clone();
        for (k, &n) in choice.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let nq = Rational::from_integer(BigInt::from(n));
            let a = self.atom(classes[k] as i64 - shift).clone();
            for (s, v) in acc.iter_mut().zip(&a) {
                *s += &nq * v;
            }
        }
        acc == self.targets[t].exact
    }
}

impl TargetMass {
    fn key(&self) -> (u8, u32) {
        match self {
            TargetMass::Monomial(e) => (0, *e),
            TargetMass::Mass(_) => (1, 0),
        }
    }
}

/// Multiset of exponents obtained by refining one cell of exponent `e` to
/// the threshold: `{e}` if `e >= threshold`, else the union over letters.
pub(crate) fn refine_counts(
    letter_exps: &[u32],
    e: u32,
    threshold: u32,
    memo: &mut HashMap<u32, BTreeMap<u32, u64>>,
) -> BTreeMap<u32, u64> {
    if e >= threshold {
        return BTreeMap::from([(e, 1)]);
    }
    // Depends only on the gap to the threshold.
    let gap = threshold - e;
    if let Some(m) = memo.get(&gap) {
        return m.iter().map(|(&k, &v)| (k + e, v)).collect();
    }
    let mut rel: BTreeMap<u32, u64> = BTreeMap::new();
    for &a in letter_exps {
        for (k, v) in refine_counts(letter_exps, a, gap, memo) {
            *rel.entry(k).or_default() += v;
        }
    }
    memo.insert(gap, rel.clone());
    rel.into_iter().map(|(k, v)| (k + e, v)).collect()
}

/// Refines a multiset of exponents.
pub(crate) fn refine_multiset(
    letter_exps: &[u32],
    counts: &BTreeMap<u32, u64>,
    threshold: u32,
    memo: &mut HashMap<u32, BTreeMap<u32, u64>>,
) -> BTreeMap<u32, u64> {
    let mut out: BTreeMap<u32, u64> = BTreeMap::new();
    for (&e, &n) in counts {
        for (k, v) in refine_counts(letter_exps, e, threshold, memo) {
            *out.entry(k).or_default() += v * n;
        }
    }
    out
}

/// Count-level solve: splits the atom multiset among the targets.
pub(crate) fn solve_multiset(
    ctx: &Arc<MoranContext>,
    atoms: &BTreeMap<u32, u64>,
    targets: &[TargetMass],
) -> Result<Option<Vec<BTreeMap<u32, u64>>>> {
    let classes: Vec<u32> = atoms.keys().copied().collect();
    let avail: Vec<u64> = atoms.values().copied().collect();
    let mut solver = Solver::new(ctx, classes.clone(), targets);
    Ok(solver.solve(avail)?.map(|vs| {
        vs.into_iter()
            .map(|v| {
                classes
                    .iter()
                    .zip(v)
                    .filter(|(_, n)| *n > 0)
                    .map(|(&e, n)| (e, n))
                    .collect()
            })
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    fn k_ctx() -> Arc<MoranContext> {
        MoranContext::build(&[rat(1, 3), rat(1, 3), rat(1, 9), rat(1, 9)]).unwrap()
    }

    #[test]
    fn refinement_counts() {
        let mut memo = HashMap::new();
        let r = refine_counts(&[1, 1, 2, 2], 0, 2, &mut memo);
        assert_eq!(r, BTreeMap::from([(2, 6), (3, 4)]));
        let r = refine_counts(&[1, 1, 2, 2], 3, 2, &mut memo);
        assert_eq!(r, BTreeMap::from([(3, 1)]));
    }

    #[test]
    fn change_making_with_the_relation() {
        let ctx = k_ctx();
        let atoms = BTreeMap::from([(5, 6), (6, 4)]);
        let sol = solve_multiset(&ctx, &atoms, &[TargetMass::Monomial(3)]).unwrap().unwrap();
        assert_eq!(sol[0], atoms);
        // 6x^5 + 4x^6 cannot make x^2.
        assert!(solve_multiset(&ctx, &atoms, &[TargetMass::Monomial(2)]).unwrap().is_none());
    }

    #[test]
    fn general_mass_target() {
        let ctx = k_ctx();
        let atoms = BTreeMap::from([(1, 2), (2, 2)]);
        let sol = solve_multiset(&ctx, &atoms, &[TargetMass::Mass(ctx.one())]).unwrap().unwrap();
        assert_eq!(sol[0], atoms);
    }
}

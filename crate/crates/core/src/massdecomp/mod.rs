//! Partitioning unions of cells into pieces of prescribed exact mass, and
//! the search for the step constant of the hierarchical construction.

mod solver;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use num::ToPrimitive;

pub use solver::TargetMass;
pub(crate) use solver::{refine_counts, refine_multiset, solve_multiset};

use crate::algebra::{
    expand_power, ratio_root, AlgebraicMass, MonomialSum, MoranContext, Rational,
    DEFAULT_ROOT_TOL,
};
use crate::error::{Error, Result};
use crate::ifs::{cut_by_exponents, word_exponent, IfsSpec, Word, DEFAULT_WORD_BUDGET};

/// Default upper end of the step-constant search.
pub const DEFAULT_C_MAX: u32 = 12;

/// The arithmetic shared by a source and a target system: their joint ratio
/// root, each system's letter exponents against it, and the ring in which
/// both Moran relations hold.
#[derive(Clone, Debug)]
pub struct PairContext {
    pub root: Rational,
    pub ctx: Arc<MoranContext>,
    pub domain_exps: Vec<u32>,
    pub target_exps: Vec<u32>,
}

impl PairContext {
    pub fn new(domain: &IfsSpec, target: &IfsSpec) -> Result<Self> {
        let mut all = domain.ratios();
        all.extend(target.ratios());
        let (root, exps) = ratio_root(&all)?;
        let (domain_exps, target_exps) = exps.split_at(domain.len());
        let ctx = MoranContext::with_root(root.clone(), domain_exps.to_vec(), DEFAULT_ROOT_TOL)?;
        if !ctx.satisfies_moran(target_exps) {
            return Err(Error::DimensionMismatch(format!(
                "the target's Moran sum is not 1 in Q[x]/({})",
                crate::algebra::poly::format_poly(ctx.min_poly())
            )));
        }
        Ok(PairContext {
            root,
            ctx,
            domain_exps: domain_exps.to_vec(),
            target_exps: target_exps.to_vec(),
        })
    }

    pub fn domain_max_exp(&self) -> u32 {
        self.domain_exps.iter().copied().max().unwrap_or(1)
    }

    pub fn target_max_exp(&self) -> u32 {
        self.target_exps.iter().copied().max().unwrap_or(1)
    }
}

/// A finite set of admissible relative masses: targets at level `k` must
/// lie in `x^k * Omega`.
#[derive(Clone, Debug)]
pub struct Omega(pub Vec<AlgebraicMass>);

impl Omega {
    /// `{1, x, ..., x^{a-1}}` with `a` the target's largest letter exponent:
    /// every cell of a level-`k` target cut has mass in `x^k * Omega`.
    pub fn default_for(pair: &PairContext) -> Self {
        Omega((0..pair.target_max_exp()).map(|e| pair.ctx.monomial(e)).collect())
    }

    pub fn contains_scaled(&self, ctx: &Arc<MoranContext>, level: u32, t: &TargetMass) -> Result<bool> {
        let rel = match t {
            TargetMass::Monomial(e) if *e >= level => ctx.monomial(e - level),
            other => other.to_mass(ctx).mass_div(&ctx.monomial(level))?,
        };
        Ok(self.0.iter().any(|w| w == &rel))
    }
}

/// A prefix-free family of words with its cached exact mass.
#[derive(Clone, Debug, PartialEq)]
pub struct CellUnion {
    pub words: Vec<Word>,
    pub mass: AlgebraicMass,
}

/// Split `source` (a union of cells at cut level `source_level`) into pieces
/// of masses `targets`, each a union of cells of cut level
/// `source_level + step`.
#[derive(Clone, Debug)]
pub struct DecompositionProblem {
    pub ctx: Arc<MoranContext>,
    /// The source system's letter exponents against the ring's root.
    pub letter_exps: Vec<u32>,
    pub source: Vec<Word>,
    pub targets: Vec<TargetMass>,
    pub source_level: u32,
    pub step: u32,
    pub omega: Option<Omega>,
    pub word_budget: usize,
}

impl DecompositionProblem {
    pub fn new(
        ctx: Arc<MoranContext>,
        letter_exps: Vec<u32>,
        source: Vec<Word>,
        targets: Vec<TargetMass>,
        source_level: u32,
        step: u32,
    ) -> Self {
        DecompositionProblem {
            ctx,
            letter_exps,
            source,
            targets,
            source_level,
            step,
            omega: None,
            word_budget: DEFAULT_WORD_BUDGET,
        }
    }
}

/// One group of a [`group_partition`]: the target exponent and the
/// sub-multiset of source monomials assigned to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub target: u32,
    pub parts: MonomialSum,
}

fn to_counts(m: &MonomialSum) -> BTreeMap<u32, u64> {
    m.0.iter()
        .filter_map(|(&e, n)| n.to_u64().filter(|&v| v > 0).map(|v| (e, v)))
        .collect()
}

fn monomial_targets(m: &MonomialSum) -> Vec<TargetMass> {
    to_counts(m)
        .into_iter()
        .flat_map(|(e, n)| std::iter::repeat_n(TargetMass::Monomial(e), n as usize))
        .collect()
}

/// Groups a multiset of monomial masses, without refinement, into pieces
/// matching the target monomials exactly. Groups are listed by target
/// exponent.
pub fn group_partition(
    ctx: &Arc<MoranContext>,
    source: &MonomialSum,
    targets: &MonomialSum,
) -> Result<Vec<Group>> {
    if source.to_mass(ctx) != targets.to_mass(ctx) {
        return Err(Error::PreconditionFailed(
            "source and target masses differ".into(),
        ));
    }
    let tlist = monomial_targets(targets);
    let sol = solve_multiset(ctx, &to_counts(source), &tlist)?
        .ok_or_else(|| Error::Infeasible("no grouping at this granularity".into()))?;
    Ok(tlist
        .iter()
        .zip(sol)
        .map(|(t, parts)| {
            let TargetMass::Monomial(e) = t else { unreachable!() };
            Group {
                target: *e,
                parts: MonomialSum(parts.into_iter().map(|(k, v)| (k, v.into())).collect()),
            }
        })
        .collect())
}

/// Refines prefix-free words to the exponent threshold, returning the atoms
/// in lexicographic order with their exponents.
pub(crate) fn refine_words(
    letter_exps: &[u32],
    words: &[Word],
    threshold: u32,
    budget: usize,
) -> Result<Vec<(Word, u32)>> {
    let mut sorted: Vec<&Word> = words.iter().collect();
    sorted.sort();
    let mut out = Vec::new();
    for w in sorted {
        let e = word_exponent(letter_exps, w);
        if e >= threshold {
            out.push((w.clone(), e));
        } else {
            let (tails, exps) =
                cut_by_exponents(letter_exps, (threshold - e) as u64, budget.saturating_sub(out.len()))?;
            out.extend(tails.iter().zip(exps).map(|(t, x)| (w.concat(t), x + e)));
        }
        if out.len() > budget {
            return Err(Error::ResourceLimit(format!(
                "refinement exceeds the word budget of {budget}"
            )));
        }
    }
    Ok(out)
}

/// Splits lexicographically sorted atoms among targets whose count vectors
/// are known: each target, in order, takes the smallest remaining atoms of
/// every exponent class.
pub(crate) fn realize(atoms: &[(Word, u32)], counts: &[BTreeMap<u32, u64>]) -> Vec<Vec<Word>> {
    let mut buckets: BTreeMap<u32, VecDeque<&Word>> = BTreeMap::new();
    for (w, e) in atoms {
        buckets.entry(*e).or_default().push_back(w);
    }
    counts
        .iter()
        .map(|cv| {
            let mut g: Vec<Word> = Vec::new();
            for (e, &n) in cv {
                let b = buckets.get_mut(e).expect("class present");
                g.extend(b.drain(..n as usize).cloned());
            }
            g.sort();
            g
        })
        .collect()
}

/// Exact decomposition of a union of cells into pieces of prescribed masses.
pub fn decompose(problem: &DecompositionProblem) -> Result<Vec<CellUnion>> {
    let ctx = &problem.ctx;
    let mut sorted = problem.source.clone();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0].is_prefix_of(&w[1])) {
        return Err(Error::PrefixOverlap);
    }
    let atoms_counts: BTreeMap<u32, u64> =
        sorted.iter().fold(BTreeMap::new(), |mut m, w| {
            *m.entry(word_exponent(&problem.letter_exps, w)).or_default() += 1;
            m
        });
    let source_mass = ctx.from_counts(
        atoms_counts
            .iter()
            .map(|(&e, &n)| (e, n.into()))
            .collect::<Vec<(u32, num::BigInt)>>()
            .iter()
            .map(|(e, n)| (*e, n)),
    );
    let mut total = ctx.zero();
    for t in &problem.targets {
        total = total.mass_add(&t.to_mass(ctx))?;
    }
    if total != source_mass {
        return Err(Error::PreconditionFailed(
            "target masses do not sum to the source mass".into(),
        ));
    }
    if let Some(omega) = &problem.omega {
        for t in &problem.targets {
            if !omega.contains_scaled(ctx, problem.source_level, t)? {
                return Err(Error::PreconditionFailed(format!(
                    "target {t:?} is outside x^{} * Omega",
                    problem.source_level
                )));
            }
        }
    }
    let threshold = problem.source_level + problem.step;
    let atoms = refine_words(&problem.letter_exps, &sorted, threshold, problem.word_budget)?;
    let counts: BTreeMap<u32, u64> = atoms.iter().fold(BTreeMap::new(), |mut m, (_, e)| {
        *m.entry(*e).or_default() += 1;
        m
    });
    let sol = solve_multiset(ctx, &counts, &problem.targets)?.ok_or_else(|| {
        Error::Infeasible(format!(
            "no exact partition at step {} from level {}",
            problem.step, problem.source_level
        ))
    })?;
    let groups = realize(&atoms, &sol);
    Ok(groups
        .into_iter()
        .zip(&problem.targets)
        .map(|(words, t)| CellUnion {
            words,
            mass: t.to_mass(ctx),
        })
        .collect())
}

/// Multiplicity of each exponent in a multiset of monomials.
pub(crate) type ExponentCounts = BTreeMap<u32, u64>;

/// Base case of the construction at step `c`: the smallest word length `m`
/// whose full level `I^m` lies inside the cut at `1 + c` and admits an
/// exact grouping onto the target letters. Returns `m` and the per-letter
/// groups as exponent multisets.
pub(crate) fn base_grouping(pair: &PairContext, c: u32) -> Result<Option<(u32, Vec<ExponentCounts>)>> {
    let amax = pair.domain_max_exp();
    let base = MonomialSum::from_exponents(&pair.domain_exps);
    let targets: Vec<TargetMass> = pair
        .target_exps
        .iter()
        .map(|&e| TargetMass::Monomial(e))
        .collect();
    let mut m = 1u32;
    while (m - 1) * amax < 1 + c {
        let level = expand_power(&base, m);
        if level.total_terms() > num::BigInt::from(DEFAULT_WORD_BUDGET) {
            break;
        }
        if let Some(sol) = solve_multiset(&pair.ctx, &to_counts(&level), &targets)? {
            return Ok(Some((m, sol)));
        }
        m += 1;
    }
    Ok(None)
}

/// Outcome of the step-constant search.
#[derive(Clone, Debug)]
pub struct MinCReport {
    pub c: u32,
    /// Why each smaller `c` failed.
    pub rejected: Vec<(u32, String)>,
}

/// Checks, on exponent multisets alone, that every decomposition arising in
/// the construction up to `horizon` levels succeeds at step `c`.
pub fn construction_feasible(
    pair: &PairContext,
    c: u32,
    horizon: u32,
    omega: Option<&Omega>,
) -> Result<std::result::Result<(), String>> {
    let mut dmemo = HashMap::new();
    let mut tmemo = HashMap::new();
    let first = 1 + c;
    // Level 1: groups indexed by target letters.
    let groups: Vec<BTreeMap<u32, u64>> = match base_grouping(pair, c)? {
        Some((_, sol)) => sol
            .iter()
            .map(|g| refine_multiset(&pair.domain_exps, g, first, &mut dmemo))
            .collect(),
        None => {
            let atoms = refine_counts(&pair.domain_exps, 0, first, &mut dmemo);
            let targets: Vec<TargetMass> =
                pair.target_exps.iter().map(|&e| TargetMass::Monomial(e)).collect();
            match solve_multiset(&pair.ctx, &atoms, &targets)? {
                Some(sol) => sol,
                None => return Ok(Err(format!("level 1: no partition of I_{first} onto J_1"))),
            }
        }
    };
    let mut states: BTreeSet<(u32, BTreeMap<u32, u64>)> = pair
        .target_exps
        .iter()
        .copied()
        .zip(groups)
        .collect();
    for k in 1..horizon {
        let target_level = 1 + k * c;
        let atom_level = 1 + (k + 1) * c;
        let mut next = BTreeSet::new();
        for (f, grp) in &states {
            let atoms = refine_multiset(&pair.domain_exps, grp, atom_level, &mut dmemo);
            let tcounts = refine_counts(&pair.target_exps, *f, target_level, &mut tmemo);
            let targets: Vec<TargetMass> = tcounts
                .iter()
                .flat_map(|(&e, &n)| std::iter::repeat_n(TargetMass::Monomial(e), n as usize))
                .collect();
            if let Some(om) = omega {
                for t in &targets {
                    if !om.contains_scaled(&pair.ctx, target_level, t)? {
                        return Ok(Err(format!(
                            "level {}: target {t:?} outside x^{target_level} * Omega",
                            k + 1
                        )));
                    }
                }
            }
            match solve_multiset(&pair.ctx, &atoms, &targets)? {
                Some(sol) => {
                    for (t, g) in targets.iter().zip(sol) {
                        let TargetMass::Monomial(e) = t else { unreachable!() };
                        next.insert((*e, g));
                    }
                }
                None => {
                    return Ok(Err(format!(
                        "level {}: group {grp:?} under a target cell of exponent {f} cannot be split at atoms I_{atom_level}",
                        k + 1
                    )))
                }
            }
        }
        states = next;
    }
    Ok(Ok(()))
}

/// Smallest `c <= c_max` for which the construction succeeds through
/// `horizon` levels.
pub fn find_min_c(
    domain: &IfsSpec,
    target: &IfsSpec,
    omega: Option<&Omega>,
    horizon: u32,
    c_max: u32,
) -> Result<MinCReport> {
    let pair = PairContext::new(domain, target)?;
    find_min_c_for(&pair, omega, horizon, c_max)
}

pub fn find_min_c_for(
    pair: &PairContext,
    omega: Option<&Omega>,
    horizon: u32,
    c_max: u32,
) -> Result<MinCReport> {
    let mut rejected = Vec::new();
    let mut last = String::new();
    for c in 1..=c_max {
        match construction_feasible(pair, c, horizon.max(1), omega)? {
            Ok(()) => return Ok(MinCReport { c, rejected }),
            Err(why) => {
                last = why.clone();
                rejected.push((c, why));
            }
        }
    }
    Err(Error::NoFeasibleC {
        c_max,
        instance: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::ifs::presets;

    fn k_ctx() -> Arc<MoranContext> {
        MoranContext::build(&presets::mixed_domain().ratios()).unwrap()
    }

    #[test]
    fn cube_grouping_matches_target_letters() {
        let ctx = k_ctx();
        let src = MonomialSum::from_pairs(&[(6, 8), (3, 8), (5, 24), (4, 24)]);
        let tgt = MonomialSum::from_pairs(&[(3, 20), (6, 8)]);
        let groups = group_partition(&ctx, &src, &tgt).unwrap();
        assert_eq!(groups.len(), 28);
        let single6 = MonomialSum::from_pairs(&[(6, 1)]);
        let single3 = MonomialSum::from_pairs(&[(3, 1)]);
        let mixed = MonomialSum::from_pairs(&[(5, 2), (4, 2)]);
        assert_eq!(groups.iter().filter(|g| g.parts == single6).count(), 8);
        assert_eq!(groups.iter().filter(|g| g.parts == single3).count(), 8);
        assert_eq!(groups.iter().filter(|g| g.parts == mixed).count(), 12);
        for g in &groups {
            assert_eq!(g.parts.to_mass(&ctx), ctx.monomial(g.target));
        }
    }

    #[test]
    fn grouping_edge_cases() {
        let ctx = k_ctx();
        let groups = group_partition(
            &ctx,
            &MonomialSum::from_pairs(&[(1, 2), (2, 2)]),
            &MonomialSum::from_pairs(&[(0, 1)]),
        )
        .unwrap();
        assert_eq!(groups.len(), 1);
        // x^2 = 2x^3 + 2x^4 but a single cell cannot split.
        assert!(matches!(
            group_partition(
                &ctx,
                &MonomialSum::from_pairs(&[(2, 1)]),
                &MonomialSum::from_pairs(&[(3, 2), (4, 2)])
            ),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn decompose_small_cases() {
        let ctx = k_ctx();
        let w = |s| Word::parse(s, 4).unwrap();
        let p = DecompositionProblem::new(
            ctx.clone(),
            vec![1, 1, 2, 2],
            vec![w("1")],
            vec![TargetMass::Monomial(1)],
            1,
            0,
        );
        let out = decompose(&p).unwrap();
        assert_eq!(out[0].words, vec![w("1")]);

        let p = DecompositionProblem::new(
            ctx.clone(),
            vec![1, 1, 2, 2],
            vec![w("1")],
            [2, 2, 3, 3].iter().map(|&e| TargetMass::Monomial(e)).collect(),
            1,
            1,
        );
        let out = decompose(&p).unwrap();
        let got: Vec<Vec<Word>> = out.iter().map(|u| u.words.clone()).collect();
        assert_eq!(got, vec![vec![w("11")], vec![w("12")], vec![w("13")], vec![w("14")]]);
    }

    #[test]
    fn decompose_rejects_bad_input() {
        let ctx = k_ctx();
        let w = |s| Word::parse(s, 4).unwrap();
        let p = DecompositionProblem::new(
            ctx.clone(),
            vec![1, 1, 2, 2],
            vec![w("1"), w("12")],
            vec![TargetMass::Monomial(1)],
            1,
            1,
        );
        assert!(matches!(decompose(&p), Err(Error::PrefixOverlap)));
        let p = DecompositionProblem::new(
            ctx,
            vec![1, 1, 2, 2],
            vec![w("1")],
            vec![TargetMass::Monomial(2)],
            1,
            1,
        );
        assert!(matches!(decompose(&p), Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn whole_domain_onto_target_letters() {
        let pair = PairContext::new(&presets::mixed_domain(), &presets::mixed_target()).unwrap();
        let mut p = DecompositionProblem::new(
            pair.ctx.clone(),
            pair.domain_exps.clone(),
            vec![Word::empty()],
            pair.target_exps.iter().map(|&e| TargetMass::Monomial(e)).collect(),
            1,
            4,
        );
        p.omega = Some(Omega::default_for(&pair));
        let out = decompose(&p).unwrap();
        assert_eq!(out.len(), 28);
        for u in &out {
            let m = crate::ifs::words_mass(&pair.ctx, &u.words);
            assert_eq!(m, u.mass);
        }
    }

    #[test]
    fn step_constant_search() {
        let half = presets::homogeneous_line(2, rat(1, 2));
        assert_eq!(find_min_c(&half, &half, None, 2, 12).unwrap().c, 1);
        let k = presets::mixed_domain();
        let f = presets::mixed_target();
        let rep = find_min_c(&k, &f, None, 2, 12).unwrap();
        assert_eq!(rep.c, 4);
        assert_eq!(rep.rejected.len(), 3);
        let other = presets::homogeneous_line(2, rat(1, 2));
        assert!(matches!(
            find_min_c(&presets::cantor(), &other, None, 2, 12),
            Err(Error::NotCommensurable)
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let three = presets::homogeneous_line(3, rat(1, 9));
        assert!(matches!(
            PairContext::new(&presets::mixed_domain(), &presets::homogeneous_line(3, rat(1, 3))),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(PairContext::new(&three, &three).is_ok());
    }
}

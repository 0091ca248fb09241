use std::collections::{BTreeMap, HashMap, HashSet};

use num::BigInt;

use super::tree::PartitionTree;
use crate::algebra::AlgebraicMass;
use crate::error::Result;
use crate::ifs::{cut_by_exponents, locate_in, Word};

/// Every target word of the level's target cut has a nonempty group. The cut
/// is recomputed from the target's letter exponents.
pub fn verify_surjective(tree: &PartitionTree, k: u32) -> bool {
    let Ok(lvl) = tree.level(k) else { return false };
    let Ok((cut, _)) =
        cut_by_exponents(&tree.pair().target_exps, lvl.target_level as u64, usize::MAX)
    else {
        return false;
    };
    if cut != lvl.targets {
        return false;
    }
    let mut hit = vec![false; cut.len()];
    for &t in &lvl.assignment {
        match hit.get_mut(t as usize) {
            Some(h) => *h = true,
            None => return false,
        }
    }
    hit.into_iter().all(|h| h)
}

/// Every source word of the recomputed domain cut belongs to exactly one
/// group.
pub fn check_partition_total(tree: &PartitionTree, k: u32) -> Result<bool> {
    let lvl = tree.level(k)?;
    let (cut, _) = cut_by_exponents(&tree.pair().domain_exps, lvl.source_level as u64, usize::MAX)?;
    Ok(cut == lvl.sources
        && lvl.assignment.len() == lvl.sources.len()
        && lvl.assignment.iter().all(|&t| (t as usize) < lvl.targets.len()))
}

#[derive(Clone, Debug)]
pub struct MassCheck {
    pub exact: bool,
    /// Target words whose group mass differs from the cell's mass.
    pub failures: Vec<Word>,
}

fn counts_mass(tree: &PartitionTree, counts: &BTreeMap<u32, BigInt>) -> AlgebraicMass {
    tree.pair().ctx.from_counts(counts.iter().map(|(&e, n)| (e, n)))
}

fn group_masses(tree: &PartitionTree, k: u32) -> Result<Vec<AlgebraicMass>> {
    let lvl = tree.level(k)?;
    let mut per: Vec<BTreeMap<u32, BigInt>> = vec![BTreeMap::new(); lvl.targets.len()];
    for (i, &t) in lvl.assignment.iter().enumerate() {
        if let Some(m) = per.get_mut(t as usize) {
            // Exponents are recomputed from the words.
            let e = crate::ifs::word_exponent(&tree.pair().domain_exps, &lvl.sources[i]);
            *m.entry(e).or_default() += 1;
        }
    }
    Ok(per.iter().map(|c| counts_mass(tree, c)).collect())
}

/// Exact mass equality of every group with its target cell.
pub fn check_mass_exact(tree: &PartitionTree, k: u32) -> Result<MassCheck> {
    let lvl = tree.level(k)?;
    let masses = group_masses(tree, k)?;
    let ctx = &tree.pair().ctx;
    let failures: Vec<Word> = lvl
        .targets
        .iter()
        .zip(&masses)
        .filter(|(t, m)| {
            let e = crate::ifs::word_exponent(&tree.pair().target_exps, t);
            **m != ctx.monomial(e)
        })
        .map(|(t, _)| t.clone())
        .collect();
    Ok(MassCheck {
        exact: failures.is_empty(),
        failures,
    })
}

/// Level `k + 1` refines level `k`: each source cell's level-`k` ancestor is
/// assigned to a prefix of its own target.
pub fn check_nesting(tree: &PartitionTree, k: u32) -> Result<bool> {
    let upper = tree.level(k)?;
    let lower = tree.level(k + 1)?;
    for (i, w) in lower.sources.iter().enumerate() {
        let Some(a) = locate_in(&upper.sources, w) else { return Ok(false) };
        let coarse = &upper.targets[upper.assignment[a] as usize];
        let fine = &lower.targets[lower.assignment[i] as usize];
        if !coarse.is_prefix_of(fine) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct LinearityReport {
    /// Preimage mass over cell mass, per target word.
    pub ratios: Vec<(Word, AlgebraicMass)>,
    /// The common ratio, when there is one.
    pub c_tilde: Option<AlgebraicMass>,
}

impl LinearityReport {
    pub fn is_linear(&self) -> bool {
        self.c_tilde.is_some()
    }

    pub(crate) fn from_ratios(ratios: Vec<(Word, AlgebraicMass)>) -> Self {
        let c_tilde = match ratios.first() {
            Some((_, r)) if ratios.iter().all(|(_, q)| q == r) => Some(r.clone()),
            _ => None,
        };
        LinearityReport { ratios, c_tilde }
    }
}

/// Preimage-to-cell mass ratios over the level's target cut.
pub fn check_tree_linearity(tree: &PartitionTree, k: u32) -> Result<LinearityReport> {
    let lvl = tree.level(k)?;
    let masses = group_masses(tree, k)?;
    let ctx = &tree.pair().ctx;
    let mut ratios = Vec::with_capacity(masses.len());
    for (t, m) in lvl.targets.iter().zip(masses) {
        let cell = ctx.monomial(crate::ifs::word_exponent(&tree.pair().target_exps, t));
        ratios.push((t.clone(), m.mass_div(&cell)?));
    }
    Ok(LinearityReport::from_ratios(ratios))
}

#[derive(Clone, Debug)]
pub struct InjectivityReport {
    pub injective: bool,
    /// Pairs of target words of distinct nonempty groups whose cells overlap.
    pub witnesses: Vec<(Word, Word)>,
}

/// Distinct groups of a level map onto cells that are pairwise disjoint as
/// word sets (no word is a prefix of another).
pub fn check_almost_injectivity(tree: &PartitionTree, k: u32) -> Result<InjectivityReport> {
    let lvl = tree.level(k)?;
    let mut used: Vec<&Word> = {
        let mut seen = HashSet::new();
        lvl.assignment
            .iter()
            .filter(|t| seen.insert(**t))
            .filter_map(|&t| lvl.targets.get(t as usize))
            .collect()
    };
    used.sort();
    let mut witnesses = Vec::new();
    for (a, w) in used.iter().enumerate() {
        for v in &used[a + 1..] {
            if w.is_prefix_of(v) {
                witnesses.push(((*w).clone(), (*v).clone()));
            } else {
                break;
            }
        }
    }
    Ok(InjectivityReport {
        injective: witnesses.is_empty(),
        witnesses,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fragmentation {
    Alpha(u32),
    /// The built depth cannot certify any offset for the given level.
    Unbounded(u32),
}

/// Smallest offset `alpha` such that the image of every domain cell of tree
/// level `n` contains a whole target cell of cut level `1 + n c + alpha`.
/// A target cell is certified inside the image of a domain cell when its
/// group at some built level lies inside that cell, or when all its
/// children are certified.
pub fn fragmentation_index(tree: &PartitionTree, n: u32) -> Result<Fragmentation> {
    let base = tree.level(n)?;
    let alphabet = tree.target().alphabet();
    let texps = &tree.pair().target_exps;
    let mut covered: Vec<HashSet<Word>> = vec![HashSet::new(); base.sources.len()];
    for m in n..=tree.depth() {
        let lvl = tree.level(m)?;
        let mut owner: Vec<Option<Option<usize>>> = vec![None; lvl.targets.len()];
        for (i, w) in lvl.sources.iter().enumerate() {
            let a = locate_in(&base.sources, w);
            let slot = &mut owner[lvl.assignment[i] as usize];
            *slot = match *slot {
                None => Some(a),
                Some(prev) if prev == a => Some(a),
                Some(_) => Some(None),
            };
        }
        for (t, o) in owner.into_iter().enumerate() {
            if let Some(Some(a)) = o {
                covered[a].insert(lvl.targets[t].clone());
            }
        }
    }
    let level = base.source_level;
    let mut alpha = 0u32;
    for set in covered.iter_mut() {
        close_upward(set, alphabet);
        if set.contains(&Word::empty()) {
            continue;
        }
        let best = set
            .iter()
            .map(|w| crate::ifs::word_exponent(texps, &w.parent()) + 1)
            .min();
        match best {
            Some(l) => alpha = alpha.max(l.saturating_sub(level)),
            None => return Ok(Fragmentation::Unbounded(n)),
        }
    }
    Ok(Fragmentation::Alpha(alpha))
}

fn close_upward(set: &mut HashSet<Word>, alphabet: usize) {
    let Some(maxlen) = set.iter().map(Word::len).max() else { return };
    for len in (1..=maxlen).rev() {
        let mut kids: HashMap<Word, HashSet<u8>> = HashMap::new();
        for w in set.iter().filter(|w| w.len() == len) {
            kids.entry(w.parent())
                .or_default()
                .insert(*w.letters().last().expect("nonempty"));
        }
        for (p, ls) in kids {
            if ls.len() == alphabet {
                set.insert(p);
            }
        }
    }
}

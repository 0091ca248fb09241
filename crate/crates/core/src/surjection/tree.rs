use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{format_rational, Rational};
use crate::error::{Error, Result};
use crate::ifs::{
    cut_by_exponents, descendant_range, locate_in, word_exponent, IfsSpec, Realization, Word,
    DEFAULT_WORD_BUDGET,
};
use crate::massdecomp::{
    base_grouping, decompose, find_min_c_for, realize, refine_words, solve_multiset,
    DecompositionProblem, Omega, PairContext, TargetMass, DEFAULT_C_MAX,
};

/// One level of the construction: every source word of the domain cut at
/// `source_level` is assigned to one target word of the target cut at
/// `target_level`. Both cuts are measured against the joint ratio root.
#[derive(Clone, Debug)]
pub struct TreeLevel {
    pub source_level: u32,
    pub target_level: u32,
    pub sources: Vec<Word>,
    pub source_exps: Vec<u32>,
    pub targets: Vec<Word>,
    pub target_exps: Vec<u32>,
    /// `assignment[i]` indexes `targets`.
    pub assignment: Vec<u32>,
}

impl TreeLevel {
    /// Source indices of every target's group, in source order.
    pub fn groups(&self) -> Vec<Vec<u32>> {
        let mut g = vec![Vec::new(); self.targets.len()];
        for (i, &t) in self.assignment.iter().enumerate() {
            if let Some(v) = g.get_mut(t as usize) {
                v.push(i as u32);
            }
        }
        g
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    pub word_budget: usize,
    pub c_max: u32,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            word_budget: DEFAULT_WORD_BUDGET,
            c_max: DEFAULT_C_MAX,
        }
    }
}

/// The nested groupings defining a Lipschitz surjection from the domain
/// attractor onto the target attractor.
#[derive(Clone, Debug)]
pub struct PartitionTree {
    domain: Realization,
    target: Realization,
    pair: PairContext,
    step_c: u32,
    base_length: Option<u32>,
    levels: Vec<TreeLevel>,
}

fn full_level(letter_exps: &[u32], m: u32) -> Vec<(Word, u32)> {
    let n = letter_exps.len() as u8;
    let mut out = vec![(Word::empty(), 0u32)];
    for _ in 0..m {
        out = out
            .iter()
            .flat_map(|(w, e)| (0..n).map(move |l| (w.child(l), e + letter_exps[l as usize])))
            .collect();
    }
    out
}

impl PartitionTree {
    pub fn build(domain: &IfsSpec, target: &IfsSpec, depth: u32, c: Option<u32>) -> Result<Self> {
        Self::build_with(domain, target, depth, c, BuildOptions::default())
    }

    pub fn build_with(
        domain: &IfsSpec,
        target: &IfsSpec,
        depth: u32,
        c: Option<u32>,
        opts: BuildOptions,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::PreconditionFailed("depth must be at least 1".into()));
        }
        let pair = PairContext::new(domain, target)?;
        let dreal = Realization::new(domain.clone())?;
        let treal = Realization::new(target.clone())?;
        let omega = Omega::default_for(&pair);
        let c = match c {
            Some(0) => return Err(Error::PreconditionFailed("step c must be positive".into())),
            Some(c) => c,
            None => find_min_c_for(&pair, Some(&omega), depth, opts.c_max)?.c,
        };
        let (first, base_length) = Self::first_level(&pair, c, opts.word_budget)?;
        let mut levels = vec![first];
        for k in 1..depth {
            let prev = levels.last().expect("nonempty");
            levels.push(Self::next_level(&pair, prev, k, c, &omega, opts.word_budget)?);
        }
        Ok(PartitionTree {
            domain: dreal,
            target: treal,
            pair,
            step_c: c,
            base_length,
            levels,
        })
    }

    fn first_level(pair: &PairContext, c: u32, budget: usize) -> Result<(TreeLevel, Option<u32>)> {
        let source_level = 1 + c;
        let (targets, target_exps) = cut_by_exponents(&pair.target_exps, 1, budget)?;
        let (groups, base_length) = match base_grouping(pair, c)? {
            Some((m, counts)) => {
                let atoms = full_level(&pair.domain_exps, m);
                let grouped = realize(&atoms, &counts);
                let refined = grouped
                    .iter()
                    .map(|g| refine_words(&pair.domain_exps, g, source_level, budget))
                    .collect::<Result<Vec<_>>>()?;
                (refined, Some(m))
            }
            None => {
                let atoms = refine_words(&pair.domain_exps, &[Word::empty()], source_level, budget)?;
                let counts: BTreeMap<u32, u64> = atoms.iter().fold(BTreeMap::new(), |mut m, (_, e)| {
                    *m.entry(*e).or_default() += 1;
                    m
                });
                let tm: Vec<TargetMass> = target_exps.iter().map(|&e| TargetMass::Monomial(e)).collect();
                let sol = solve_multiset(&pair.ctx, &counts, &tm)?.ok_or_else(|| {
                    Error::Infeasible(format!("no partition of I_{source_level} onto J_1"))
                })?;
                let groups = realize(&atoms, &sol)
                    .into_iter()
                    .map(|g| {
                        g.into_iter()
                            .map(|w| {
                                let e = word_exponent(&pair.domain_exps, &w);
                                (w, e)
                            })
                            .collect()
                    })
                    .collect();
                (groups, None)
            }
        };
        let mut rows: Vec<(Word, u32, u32)> = Vec::new();
        for (j, g) in groups.into_iter().enumerate() {
            rows.extend(g.into_iter().map(|(w, e)| (w, e, j as u32)));
        }
        Ok((assemble(rows, 1, source_level, targets, target_exps), base_length))
    }

    fn next_level(
        pair: &PairContext,
        prev: &TreeLevel,
        k: u32,
        c: u32,
        omega: &Omega,
        budget: usize,
    ) -> Result<TreeLevel> {
        let target_level = 1 + k * c;
        let source_level = 1 + (k + 1) * c;
        let groups = prev.groups();
        let mut targets = Vec::new();
        let mut target_exps = Vec::new();
        let mut rows: Vec<(Word, u32, u32)> = Vec::with_capacity(prev.sources.len() * 4);
        for (j, members) in groups.iter().enumerate() {
            let jw = &prev.targets[j];
            let je = prev.target_exps[j];
            let (tails, texps) = if je >= target_level {
                (vec![Word::empty()], vec![je])
            } else {
                let (t, e) = cut_by_exponents(&pair.target_exps, (target_level - je) as u64, budget)?;
                (t, e.into_iter().map(|x| x + je).collect())
            };
            let children: Vec<Word> = tails.iter().map(|t| jw.concat(t)).collect();
            let mut problem = DecompositionProblem::new(
                pair.ctx.clone(),
                pair.domain_exps.clone(),
                members.iter().map(|&i| prev.sources[i as usize].clone()).collect(),
                texps.iter().map(|&e| TargetMass::Monomial(e)).collect(),
                target_level,
                c,
            );
            problem.omega = Some(omega.clone());
            problem.word_budget = budget;
            let unions = decompose(&problem)?;
            let base = targets.len() as u32;
            for (t, u) in unions.into_iter().enumerate() {
                for w in u.words {
                    let e = word_exponent(&pair.domain_exps, &w);
                    rows.push((w, e, base + t as u32));
                }
            }
            targets.extend(children);
            target_exps.extend(texps);
            if rows.len() > budget {
                return Err(Error::ResourceLimit(format!(
                    "level {} exceeds the word budget of {budget}",
                    k + 1
                )));
            }
        }
        Ok(assemble(rows, target_level, source_level, targets, target_exps))
    }

    pub fn step_c(&self) -> u32 {
        self.step_c
    }

    pub fn depth(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn delta(&self) -> &Rational {
        &self.pair.root
    }

    pub fn pair(&self) -> &PairContext {
        &self.pair
    }

    pub fn domain(&self) -> &Realization {
        &self.domain
    }

    pub fn target(&self) -> &Realization {
        &self.target
    }

    /// Length `m` of the full domain level grouped in the base case, or
    /// `None` when the base case decomposed the whole domain directly.
    pub fn base_length(&self) -> Option<u32> {
        self.base_length
    }

    pub fn levels(&self) -> &[TreeLevel] {
        &self.levels
    }

    /// Level `k` (1-based).
    pub fn level(&self, k: u32) -> Result<&TreeLevel> {
        k.checked_sub(1)
            .and_then(|i| self.levels.get(i as usize))
            .ok_or_else(|| Error::PreconditionFailed(format!("level {k} not built (depth {})", self.depth())))
    }

    /// Mutable access for negative controls.
    pub fn level_mut(&mut self, k: u32) -> Option<&mut TreeLevel> {
        k.checked_sub(1).and_then(|i| self.levels.get_mut(i as usize))
    }

    /// The target word `j_k` whose group contains the level-`k` source cell of
    /// `address`.
    pub fn evaluate(&self, address: &Word, k: u32) -> Result<Word> {
        let lvl = self.level(k)?;
        let i = locate_in(&lvl.sources, address).ok_or(Error::AddressTooShort {
            len: address.len(),
            level: lvl.source_level,
        })?;
        Ok(lvl.targets[lvl.assignment[i] as usize].clone())
    }

    /// Whether target `j` of level `k` receives exactly the cell `K_w` with
    /// `w` equal to the target word, in a tree whose two systems coincide.
    pub(crate) fn identity_cells(&self, k: u32) -> Result<Vec<bool>> {
        let lvl = self.level(k)?;
        if self.domain.spec().maps != self.target.spec().maps {
            return Ok(vec![false; lvl.targets.len()]);
        }
        let groups = lvl.groups();
        Ok(lvl
            .targets
            .iter()
            .zip(&groups)
            .map(|(t, g)| {
                let r = descendant_range(&lvl.sources, t);
                g.len() == r.len() && g.iter().zip(r).all(|(&a, b)| a as usize == b)
            })
            .collect())
    }

    pub fn to_json_value(&self) -> TreeJson {
        let ka = self.domain.alphabet();
        let fa = self.target.alphabet();
        TreeJson {
            delta: format_rational(&self.pair.root),
            step_c: self.step_c,
            levels: self
                .levels
                .iter()
                .map(|lvl| {
                    lvl.groups()
                        .iter()
                        .enumerate()
                        .map(|(j, g)| NodeJson {
                            target: lvl.targets[j].display(fa).to_string(),
                            group: g
                                .iter()
                                .map(|&i| lvl.sources[i as usize].display(ka).to_string())
                                .collect(),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("tree serializes")
    }
}

fn assemble(
    mut rows: Vec<(Word, u32, u32)>,
    target_level: u32,
    source_level: u32,
    targets: Vec<Word>,
    target_exps: Vec<u32>,
) -> TreeLevel {
    rows.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let mut sources = Vec::with_capacity(rows.len());
    let mut source_exps = Vec::with_capacity(rows.len());
    let mut assignment = Vec::with_capacity(rows.len());
    for (w, e, t) in rows {
        sources.push(w);
        source_exps.push(e);
        assignment.push(t);
    }
    TreeLevel {
        source_level,
        target_level,
        sources,
        source_exps,
        targets,
        target_exps,
        assignment,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub target: String,
    pub group: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub delta: String,
    pub step_c: u32,
    pub levels: Vec<Vec<NodeJson>>,
}

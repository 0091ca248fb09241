use serde::{Deserialize, Serialize};

use super::tree::PartitionTree;
use super::verify::LinearityReport;
use crate::algebra::{format_rational, parse_rational, rational_pow, to_f64, AlgebraicMass, Rational};
use crate::error::{Error, Result};
use crate::ifs::{descendant_range, stopping_cut, word_exponent, word_ratio, IfsSpec, Realization, Word};
use crate::massdecomp::PairContext;

/// A finite-depth map between two attractors: every cell of a domain cut is
/// sent into one cell of a target cut.
#[derive(Clone, Debug)]
pub struct CellMap {
    pub domain: IfsSpec,
    pub target: IfsSpec,
    pub delta: Rational,
    pub source_level: u32,
    pub target_level: u32,
    pub sources: Vec<Word>,
    pub targets: Vec<Word>,
    /// `table[i]` indexes `targets`.
    pub table: Vec<u32>,
    /// Lipschitz constant of the underlying map, when known.
    pub lipschitz: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct CellMapJson {
    domain: IfsSpec,
    target: IfsSpec,
    delta: String,
    source_level: u32,
    target_level: u32,
    #[serde(default)]
    lipschitz: Option<f64>,
    table: Vec<(String, String)>,
}

impl CellMap {
    /// Builds a map from explicit `(source, target)` pairs, which must cover
    /// the domain cut exactly once and use only target-cut words.
    pub fn from_pairs(
        domain: IfsSpec,
        target: IfsSpec,
        delta: Rational,
        source_level: u32,
        target_level: u32,
        pairs: &[(Word, Word)],
    ) -> Result<Self> {
        let sources = stopping_cut(&domain, &delta, source_level)?.into_words();
        let targets = stopping_cut(&target, &delta, target_level)?.into_words();
        let mut table = vec![u32::MAX; sources.len()];
        for (s, t) in pairs {
            let i = sources.binary_search(s).map_err(|_| {
                Error::PreconditionFailed(format!(
                    "{} is not a word of the level-{source_level} domain cut",
                    s.display(domain.len())
                ))
            })?;
            let j = targets.binary_search(t).map_err(|_| {
                Error::PreconditionFailed(format!(
                    "{} is not a word of the level-{target_level} target cut",
                    t.display(target.len())
                ))
            })?;
            if table[i] != u32::MAX {
                return Err(Error::PreconditionFailed(format!(
                    "{} is assigned twice",
                    s.display(domain.len())
                )));
            }
            table[i] = j as u32;
        }
        if let Some(i) = table.iter().position(|&t| t == u32::MAX) {
            return Err(Error::PreconditionFailed(format!(
                "{} has no image",
                sources[i].display(domain.len())
            )));
        }
        Ok(CellMap {
            domain,
            target,
            delta,
            source_level,
            target_level,
            sources,
            targets,
            table,
            lipschitz: None,
        })
    }

    /// The identity on the cut of one system.
    pub fn identity(spec: &IfsSpec, delta: Rational, level: u32) -> Result<Self> {
        let words = stopping_cut(spec, &delta, level)?.into_words();
        let pairs: Vec<(Word, Word)> = words.iter().map(|w| (w.clone(), w.clone())).collect();
        let mut map = Self::from_pairs(spec.clone(), spec.clone(), delta, level, level, &pairs)?;
        map.lipschitz = Some(1.0);
        Ok(map)
    }

    /// Level `k` of a partition tree as a map from the domain cut at
    /// `1 + k c` onto the target cut at `1 + (k - 1) c`.
    pub fn from_tree(tree: &PartitionTree, k: u32) -> Result<Self> {
        let lvl = tree.level(k)?;
        Ok(CellMap {
            domain: tree.domain().spec().clone(),
            target: tree.target().spec().clone(),
            delta: tree.delta().clone(),
            source_level: lvl.source_level,
            target_level: lvl.target_level,
            sources: lvl.sources.clone(),
            targets: lvl.targets.clone(),
            table: lvl.assignment.clone(),
            lipschitz: None,
        })
    }

    pub fn image(&self, i: usize) -> &Word {
        &self.targets[self.table[i] as usize]
    }

    pub fn to_json(&self) -> String {
        let (ka, fa) = (self.domain.len(), self.target.len());
        let j = CellMapJson {
            domain: self.domain.clone(),
            target: self.target.clone(),
            delta: format_rational(&self.delta),
            source_level: self.source_level,
            target_level: self.target_level,
            lipschitz: self.lipschitz,
            table: self
                .sources
                .iter()
                .enumerate()
                .map(|(i, s)| (s.display(ka).to_string(), self.image(i).display(fa).to_string()))
                .collect(),
        };
        serde_json::to_string_pretty(&j).expect("cell map serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: CellMapJson =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("cell map: {e}")))?;
        j.domain.validate()?;
        j.target.validate()?;
        let delta = parse_rational(&j.delta)?;
        let (ka, fa) = (j.domain.len(), j.target.len());
        let pairs = j
            .table
            .iter()
            .map(|(a, b)| Ok((Word::parse(a, ka)?, Word::parse(b, fa)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut map = Self::from_pairs(j.domain, j.target, delta, j.source_level, j.target_level, &pairs)?;
        map.lipschitz = j.lipschitz;
        Ok(map)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn pair(&self) -> Result<PairContext> {
        PairContext::new(&self.domain, &self.target)
    }

    /// Exact preimage mass of every target cell.
    fn preimage_masses(&self, pair: &PairContext) -> Vec<(u64, AlgebraicMass)> {
        let mut counts: Vec<std::collections::BTreeMap<u32, num::BigInt>> =
            vec![Default::default(); self.targets.len()];
        let mut n = vec![0u64; self.targets.len()];
        for (i, &t) in self.table.iter().enumerate() {
            *counts[t as usize]
                .entry(word_exponent(&pair.domain_exps, &self.sources[i]))
                .or_default() += 1;
            n[t as usize] += 1;
        }
        counts
            .iter()
            .zip(n)
            .map(|(c, n)| (n, pair.ctx.from_counts(c.iter().map(|(&e, k)| (e, k)))))
            .collect()
    }
}

/// Preimage-to-cell mass ratios over the map's target cut.
pub fn check_measure_linearity(map: &CellMap) -> Result<LinearityReport> {
    let pair = map.pair()?;
    let mut ratios = Vec::with_capacity(map.targets.len());
    for (t, (_, m)) in map.targets.iter().zip(map.preimage_masses(&pair)) {
        let cell = pair.ctx.monomial(word_exponent(&pair.target_exps, t));
        ratios.push((t.clone(), m.mass_div(&cell)?));
    }
    Ok(LinearityReport::from_ratios(ratios))
}

/// Image-diameter bound of one source cell before and after restriction.
#[derive(Clone, Debug, PartialEq)]
pub struct DiameterWitness {
    pub source: Word,
    pub before: Rational,
    pub after: Rational,
    /// The cell now maps to a single chosen point of the kept region.
    pub collapsed: bool,
}

/// Restricts a map to the target cells selected by `keep`. A source cell
/// whose image is excluded is sent to the least kept target among the
/// images of its nearest ancestor that reaches the kept region.
pub fn restrict_to_intersection<P>(map: &CellMap, keep: P) -> Result<(CellMap, Vec<DiameterWitness>)>
where
    P: Fn(&Word) -> bool,
{
    let kept: Vec<bool> = map.targets.iter().map(&keep).collect();
    if !map.table.iter().any(|&t| kept[t as usize]) {
        return Err(Error::EmptyIntersection);
    }
    let mut out = map.clone();
    let mut witnesses = Vec::with_capacity(map.sources.len());
    for (i, w) in map.sources.iter().enumerate() {
        let t = map.table[i] as usize;
        let before = word_ratio(&map.target, &map.targets[t]);
        if kept[t] {
            witnesses.push(DiameterWitness {
                source: w.clone(),
                after: before.clone(),
                before,
                collapsed: false,
            });
            continue;
        }
        let mut anc = w.clone();
        let choice = loop {
            anc = anc.parent();
            let best = descendant_range(&map.sources, &anc)
                .map(|s| map.table[s] as usize)
                .filter(|&j| kept[j])
                .min();
            if best.is_some() || anc.is_empty() {
                break best;
            }
        };
        out.table[i] = choice.ok_or(Error::EmptyIntersection)? as u32;
        witnesses.push(DiameterWitness {
            source: w.clone(),
            before,
            after: Rational::from_integer(0.into()),
            collapsed: true,
        });
    }
    Ok((out, witnesses))
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizedCell {
    pub target: String,
    pub preimage_count: u64,
    /// `min(1, preimage mass / cell mass)` in exact form.
    pub density: String,
    pub density_value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizationReport {
    pub cells: Vec<LocalizedCell>,
    /// Target level and word of the selected cell.
    pub selected: (u32, String),
    pub q: u64,
    pub epsilon: f64,
    pub epsilon_achieved: f64,
    pub attained: bool,
    pub delta_n: f64,
}

/// Finds a target cell of density above `1 - epsilon` reached by the fewest
/// source cells, or the densest cell when none qualifies.
pub fn localize(map: &CellMap, epsilon: f64) -> Result<LocalizationReport> {
    let pair = map.pair()?;
    let fa = map.target.len();
    let ctx = &pair.ctx;
    let mut cells = Vec::with_capacity(map.targets.len());
    for (t, (n, m)) in map.targets.iter().zip(map.preimage_masses(&pair)) {
        let cell = ctx.monomial(word_exponent(&pair.target_exps, t));
        let ratio = m.mass_div(&cell)?;
        let one = ctx.one();
        let density = if ratio.to_f64() > 1.0 || ratio == one { one } else { ratio };
        cells.push(LocalizedCell {
            target: t.display(fa).to_string(),
            preimage_count: n,
            density: density.to_string(),
            density_value: density.to_f64(),
        });
    }
    let threshold = 1.0 - epsilon;
    let pick = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.density_value > threshold)
        .min_by_key(|(_, c)| c.preimage_count)
        .map(|(i, _)| i);
    let attained = pick.is_some();
    let idx = pick.unwrap_or_else(|| {
        cells
            .iter()
            .enumerate()
            .fold(0, |b, (i, c)| if c.density_value > cells[b].density_value { i } else { b })
    });
    let sel = &cells[idx];
    let sep = Realization::new(map.target.clone())?.cert().delta_k;
    let l = map.lipschitz.unwrap_or(1.0);
    let delta_n = l / sep * to_f64(&rational_pow(&map.delta, map.source_level as i64));
    Ok(LocalizationReport {
        selected: (map.target_level, sel.target.clone()),
        q: sel.preimage_count,
        epsilon,
        epsilon_achieved: 1.0 - sel.density_value,
        attained,
        delta_n,
        cells,
    })
}

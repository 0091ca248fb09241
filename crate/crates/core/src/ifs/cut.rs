use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::Arc;

use num::{BigInt, One};

use super::spec::IfsSpec;
use super::word::Word;
use crate::algebra::{ratio_root, rational_pow, AlgebraicMass, MoranContext, Rational};
use crate::error::{Error, Result};

/// Default cap on the number of words a single cut may hold.
pub const DEFAULT_WORD_BUDGET: usize = 20_000_000;

/// A stopping-time cut `{w : r_w <= delta^n < r_{w-}}`, stored in
/// lexicographic order.
#[derive(Clone, Debug)]
pub struct Cut {
    delta: Rational,
    level: u32,
    alphabet: usize,
    words: Vec<Word>,
    /// Per-word exponents against the joint root of the ratios and `delta`,
    /// when these are commensurable.
    exps: Option<Vec<u32>>,
}

/// Exponents of the letters and of `delta` against their joint ratio root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutScale {
    pub root: Rational,
    pub letter_exps: Vec<u32>,
    pub delta_exp: u32,
}

impl CutScale {
    pub fn new(ratios: &[Rational], delta: &Rational) -> Result<Self> {
        let mut all = ratios.to_vec();
        all.push(delta.clone());
        let (root, mut exps) = ratio_root(&all)?;
        let delta_exp = exps.pop().expect("delta present");
        Ok(CutScale {
            root,
            letter_exps: exps,
            delta_exp,
        })
    }
}

impl Cut {
    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn exponents(&self) -> Option<&[u32]> {
        self.exps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn into_words(self) -> Vec<Word> {
        self.words
    }

    pub fn position(&self, w: &Word) -> Option<usize> {
        self.words.binary_search(w).ok()
    }

    /// Index range of the cut words having `w` as a prefix.
    pub fn descendants(&self, w: &Word) -> Range<usize> {
        descendant_range(&self.words, w)
    }

    /// Index of the cut word that is a prefix of `address`.
    pub fn locate(&self, address: &Word) -> Result<usize> {
        locate_in(&self.words, address).ok_or(Error::AddressTooShort {
            len: address.len(),
            level: self.level,
        })
    }
}

/// Index range of the words of a sorted antichain having `w` as a prefix.
pub fn descendant_range(words: &[Word], w: &Word) -> Range<usize> {
    let start = words.partition_point(|x| x < w);
    let len = words[start..].partition_point(|x| w.is_prefix_of(x));
    start..start + len
}

/// Index of the word of a sorted antichain that prefixes `address`: it is
/// the greatest word not exceeding the address.
pub fn locate_in(words: &[Word], address: &Word) -> Option<usize> {
    let idx = words.partition_point(|x| x <= address).checked_sub(1)?;
    words[idx].is_prefix_of(address).then_some(idx)
}

/// Enumerates `{w : e_w >= threshold > e_{w-}}` for additive letter
/// exponents, in lexicographic order, returning words and their exponents.
pub fn cut_by_exponents(
    letter_exps: &[u32],
    threshold: u64,
    budget: usize,
) -> Result<(Vec<Word>, Vec<u32>)> {
    let mut words = Vec::new();
    let mut exps = Vec::new();
    if threshold == 0 {
        return Ok((vec![Word::empty()], vec![0]));
    }
    let mut cur = Word::empty();
    walk_exps(letter_exps, threshold, budget, &mut cur, 0, &mut words, &mut exps)?;
    Ok((words, exps))
}

fn walk_exps(
    letter_exps: &[u32],
    threshold: u64,
    budget: usize,
    cur: &mut Word,
    e: u64,
    words: &mut Vec<Word>,
    exps: &mut Vec<u32>,
) -> Result<()> {
    for (i, &a) in letter_exps.iter().enumerate() {
        let ne = e + a as u64;
        cur.push(i as u8);
        if ne >= threshold {
            if words.len() >= budget {
                return Err(Error::ResourceLimit(format!(
                    "cut exceeds the word budget of {budget}"
                )));
            }
            words.push(cur.clone());
            exps.push(ne as u32);
        } else {
            walk_exps(letter_exps, threshold, budget, cur, ne, words, exps)?;
        }
        cur.pop();
    }
    Ok(())
}

fn walk_rational(
    ratios: &[Rational],
    bound: &Rational,
    budget: usize,
    cur: &mut Word,
    r: &Rational,
    words: &mut Vec<Word>,
) -> Result<()> {
    for (i, ri) in ratios.iter().enumerate() {
        let nr = r * ri;
        cur.push(i as u8);
        if &nr <= bound {
            if words.len() >= budget {
                return Err(Error::ResourceLimit(format!(
                    "cut exceeds the word budget of {budget}"
                )));
            }
            words.push(cur.clone());
        } else {
            walk_rational(ratios, bound, budget, cur, &nr, words)?;
        }
        cur.pop();
    }
    Ok(())
}

pub fn stopping_cut(spec: &IfsSpec, delta: &Rational, n: u32) -> Result<Cut> {
    stopping_cut_with_budget(spec, delta, n, DEFAULT_WORD_BUDGET)
}

pub fn stopping_cut_with_budget(
    spec: &IfsSpec,
    delta: &Rational,
    n: u32,
    budget: usize,
) -> Result<Cut> {
    crate::algebra::check_unit_interval(delta)?;
    let ratios = spec.ratios();
    match CutScale::new(&ratios, delta) {
        Ok(scale) => {
            let threshold = scale.delta_exp as u64 * n as u64;
            let (words, exps) = cut_by_exponents(&scale.letter_exps, threshold, budget)?;
            Ok(Cut {
                delta: delta.clone(),
                level: n,
                alphabet: spec.len(),
                words,
                exps: Some(exps),
            })
        }
        Err(Error::NotCommensurable) => {
            let bound = rational_pow(delta, n as i64);
            let mut words = Vec::new();
            if bound >= Rational::one() {
                words.push(Word::empty());
            } else {
                let mut cur = Word::empty();
                walk_rational(&ratios, &bound, budget, &mut cur, &Rational::one(), &mut words)?;
            }
            Ok(Cut {
                delta: delta.clone(),
                level: n,
                alphabet: spec.len(),
                words,
                exps: None,
            })
        }
        Err(e) => Err(e),
    }
}

/// The cut words having `word` as a prefix. A word lying strictly below a
/// cut word has no refinement in the cut.
pub fn refine_cell<'a>(word: &Word, cut: &'a Cut) -> Result<&'a [Word]> {
    let range = cut.descendants(word);
    if range.is_empty() {
        return Err(Error::PreconditionFailed(format!(
            "word {} is finer than the level-{} cut",
            word.display(cut.alphabet()),
            cut.level()
        )));
    }
    Ok(&cut.words()[range])
}

/// Exact ratio of a word.
pub fn word_ratio(spec: &IfsSpec, w: &Word) -> Rational {
    w.letters()
        .iter()
        .fold(Rational::one(), |acc, &l| acc * &spec.maps[l as usize].ratio)
}

/// Exponent of a word's ratio against the context's ratio root.
pub fn word_exponent(letter_exps: &[u32], w: &Word) -> u32 {
    w.letters().iter().map(|&l| letter_exps[l as usize]).sum()
}

/// Mass `sum_w r_w^s` of a family of words, exactly in the system's ring.
pub fn words_mass<'a, I>(ctx: &Arc<MoranContext>, words: I) -> AlgebraicMass
where
    I: IntoIterator<Item = &'a Word>,
{
    let mut counts: BTreeMap<u32, BigInt> = BTreeMap::new();
    for w in words {
        *counts.entry(word_exponent(ctx.exponents(), w)).or_default() += 1;
    }
    ctx.from_counts(counts.iter().map(|(&e, n)| (e, n)))
}

pub fn cut_mass(ctx: &Arc<MoranContext>, cut: &Cut) -> AlgebraicMass {
    words_mass(ctx, cut.words())
}

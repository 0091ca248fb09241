//! Independent oracles shared by the integration and acceptance tests.

#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selfsim::algebra::{AlgebraicMass, MoranContext};
use selfsim::ifs::Word;
use selfsim::massdecomp::TargetMass;

pub fn exponent(exps: &[u32], w: &Word) -> u32 {
    w.letters().iter().map(|&l| exps[l as usize]).sum()
}

/// Refines each word until its exponent reaches `threshold`, by plain
/// recursion over letters.
pub fn refine(exps: &[u32], words: &[Word], threshold: u32) -> Vec<Word> {
    fn go(exps: &[u32], w: Word, threshold: u32, out: &mut Vec<Word>) {
        if exponent(exps, &w) >= threshold {
            out.push(w);
            return;
        }
        for l in 0..exps.len() as u8 {
            go(exps, w.child(l), threshold, out);
        }
    }
    let mut out = Vec::new();
    for w in words {
        go(exps, w.clone(), threshold, &mut out);
    }
    out
}

/// Exhaustive search for an assignment of atoms to targets with exactly
/// matching masses. Floats only prune; every leaf is checked exactly.
pub fn brute_force_feasible(ctx: &Arc<MoranContext>, atoms: &[u32], targets: &[AlgebraicMass]) -> bool {
    let atom_f: Vec<f64> = atoms.iter().map(|&e| ctx.x_value().powi(e as i32)).collect();
    let mut remaining: Vec<f64> = targets.iter().map(|t| t.to_f64()).collect();
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); targets.len()];
    let tol = 1e-9;

    fn leaf(ctx: &Arc<MoranContext>, groups: &[Vec<u32>], targets: &[AlgebraicMass]) -> bool {
        groups.iter().zip(targets).all(|(g, t)| {
            let mut m = ctx.zero();
            for &e in g {
                m = m.mass_add(&ctx.monomial(e)).unwrap();
            }
            &m == t
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        ctx: &Arc<MoranContext>,
        atoms: &[u32],
        atom_f: &[f64],
        targets: &[AlgebraicMass],
        remaining: &mut [f64],
        groups: &mut [Vec<u32>],
        tol: f64,
    ) -> bool {
        if i == atoms.len() {
            return remaining.iter().all(|r| r.abs() < tol) && leaf(ctx, groups, targets);
        }
        for j in 0..targets.len() {
            // Identical empty targets are interchangeable.
            if groups[j].is_empty() && (0..j).any(|p| groups[p].is_empty() && targets[p] == targets[j]) {
                continue;
            }
            if remaining[j] + tol < atom_f[i] {
                continue;
            }
            remaining[j] -= atom_f[i];
            groups[j].push(atoms[i]);
            if go(i + 1, ctx, atoms, atom_f, targets, remaining, groups, tol) {
                return true;
            }
            groups[j].pop();
            remaining[j] += atom_f[i];
        }
        false
    }
    go(0, ctx, atoms, &atom_f, targets, &mut remaining, &mut groups, tol)
}

/// A random decomposition instance: letter exponents, source words, the
/// refinement threshold and target masses. About half of the instances are
/// built from a grouping of the atoms and so are feasible; the rest split
/// the source mass with the Moran relation and may or may not be.
pub struct Instance {
    pub ctx: Arc<MoranContext>,
    pub exps: Vec<u32>,
    pub source: Vec<Word>,
    pub threshold: u32,
    pub atoms: Vec<Word>,
    pub targets: Vec<TargetMass>,
}

pub fn random_instance(rng: &mut ChaCha8Rng, max_atoms: usize) -> Instance {
    loop {
        let m = rng.gen_range(2..=4usize);
        let exps: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=3)).collect();
        let ctx = MoranContext::with_root(selfsim::algebra::rat(1, 5), exps.clone(), 1e-13).unwrap();
        let source: Vec<Word> = if rng.gen_bool(0.5) {
            vec![Word::from_letters(&[rng.gen_range(0..m as u8)])]
        } else {
            vec![Word::empty()]
        };
        let threshold = rng.gen_range(1..=5);
        let atoms = refine(&exps, &source, threshold);
        if atoms.len() < 2 || atoms.len() > max_atoms {
            continue;
        }
        let targets = if rng.gen_bool(0.5) {
            let t = rng.gen_range(1..=atoms.len().min(4));
            let mut sums: Vec<Vec<u32>> = vec![Vec::new(); t];
            for (i, a) in atoms.iter().enumerate() {
                let j = if i < t { i } else { rng.gen_range(0..t) };
                sums[j].push(exponent(&exps, a));
            }
            sums.into_iter()
                .map(|g| {
                    if g.len() == 1 {
                        TargetMass::Monomial(g[0])
                    } else {
                        let mut s = ctx.zero();
                        for e in g {
                            s = s.mass_add(&ctx.monomial(e)).unwrap();
                        }
                        TargetMass::Mass(s)
                    }
                })
                .collect()
        } else {
            let mut mono: Vec<u32> = source.iter().map(|w| exponent(&exps, w)).collect();
            for _ in 0..rng.gen_range(1..=3) {
                let i = rng.gen_range(0..mono.len());
                let a = mono.swap_remove(i);
                mono.extend(exps.iter().map(|e| a + e));
                if mono.len() > 10 {
                    break;
                }
            }
            mono.into_iter().map(TargetMass::Monomial).collect()
        };
        return Instance { ctx, exps, source, threshold, atoms, targets };
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

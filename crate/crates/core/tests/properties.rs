//! Randomized invariants checked against independent oracles.

mod common;

use proptest::prelude::*;
use selfsim::algebra::{build_context, rat, solve_dimension, DEFAULT_ROOT_TOL};
use selfsim::error::Error;
use selfsim::ifs::{cut_mass, presets, stopping_cut, Word};
use selfsim::massdecomp::{decompose, DecompositionProblem};

fn line(p: i64, exps: &[u32]) -> Option<selfsim::ifs::IfsSpec> {
    let ratios: Vec<_> = exps.iter().map(|&a| rat(1, p.pow(a))).collect();
    let total: f64 = ratios.iter().map(selfsim::algebra::to_f64).sum();
    (total < 1.0).then(|| presets::packed_line("random", &ratios))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cuts_partition_mass_and_agree_with_recursion(
        p in 2i64..=5,
        exps in prop::collection::vec(1u32..=3, 2..=4),
        n in 1u32..=5,
    ) {
        let Some(spec) = line(p, &exps) else { return Ok(()) };
        let delta = rat(1, p);
        let cut = stopping_cut(&spec, &delta, n).unwrap();
        let ctx = build_context(&spec.ratios()).unwrap();
        prop_assert!(cut_mass(&ctx, &cut).is_one());
        // The cut is exactly the recursive refinement of the empty word to
        // exponent n against the common root 1/p.
        let want = common::refine(&exps, &[Word::empty()], n);
        let mut want = want;
        want.sort();
        prop_assert_eq!(cut.words(), &want[..]);
        // Cut words are prefix-free and in order.
        for w in cut.words().windows(2) {
            prop_assert!(w[0] < w[1] && !w[0].is_prefix_of(&w[1]));
        }
    }

    #[test]
    fn dimension_solves_moran(p in 2i64..=5, exps in prop::collection::vec(1u32..=3, 2..=5)) {
        let Some(spec) = line(p, &exps) else { return Ok(()) };
        let ratios = spec.ratios();
        let s = solve_dimension(&ratios, DEFAULT_ROOT_TOL).unwrap();
        let sum: f64 = ratios.iter().map(|r| selfsim::algebra::to_f64(r).powf(s)).sum();
        prop_assert!((sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn decompose_matches_brute_force(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::random_instance(&mut rng, 10);
        let atom_exps: Vec<u32> = inst.atoms.iter().map(|w| common::exponent(&inst.exps, w)).collect();
        let masses: Vec<_> = inst.targets.iter().map(|t| t.to_mass(&inst.ctx)).collect();
        let oracle = common::brute_force_feasible(&inst.ctx, &atom_exps, &masses);
        let problem = DecompositionProblem::new(
            inst.ctx.clone(), inst.exps.clone(), inst.source.clone(), inst.targets.clone(), 0, inst.threshold,
        );
        match decompose(&problem) {
            Ok(groups) => {
                prop_assert!(oracle);
                for (g, m) in groups.iter().zip(&masses) {
                    prop_assert_eq!(&g.mass, m);
                }
            }
            Err(Error::Infeasible(_)) => prop_assert!(!oracle),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

#[test]
fn overlapping_sources_are_rejected() {
    let mut rng = common::rng(1);
    let inst = common::random_instance(&mut rng, 12);
    let mut src = vec![Word::empty()];
    src.push(Word::from_letters(&[0]));
    let problem = DecompositionProblem::new(inst.ctx, inst.exps, src, inst.targets, 0, inst.threshold);
    assert!(matches!(decompose(&problem), Err(Error::PrefixOverlap)));
}

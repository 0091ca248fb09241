//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
//! criterion fails.

mod common;

use std::time::{Duration, Instant};

use selfsim::algebra::{expand_power, rat, solve_dimension, MonomialSum, DEFAULT_ROOT_TOL};
use selfsim::equivalence::{
    decide, decide_homogeneous_domain, decide_with_embedding_hypothesis, Certificate, Hypothesis, Status,
};
use selfsim::error::Error;
use selfsim::ifs::{cut_mass, presets, stopping_cut_with_budget};
use selfsim::massdecomp::{decompose, find_min_c, group_partition, DecompositionProblem, Omega, PairContext, TargetMass};
use selfsim::surjection::{build_partition_tree, estimate_lipschitz, verify_level};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

type Check = fn() -> Result<Verdict, Box<dyn std::error::Error>>;

fn dimension_equality() -> Result<Verdict, Box<dyn std::error::Error>> {
    let k = presets::mixed_domain();
    let f = presets::mixed_target();
    let pair = PairContext::new(&k, &f)?;
    let ctx = &pair.ctx;
    let exact = ctx.satisfies_moran(&pair.domain_exps) && ctx.satisfies_moran(&pair.target_exps);
    let s = solve_dimension(&k.ratios(), DEFAULT_ROOT_TOL)?;
    let sum = 20.0 * 3f64.powf(-3.0 * s) + 8.0 * 3f64.powf(-6.0 * s);
    let resid = (sum - 1.0).abs();
    Ok(verdict(
        exact && resid <= 1e-10,
        format!("ring relations exact: {exact}; s = {s:.12}; |20*3^-3s + 8*3^-6s - 1| = {resid:.1e}"),
    ))
}

fn expansion_identity() -> Result<Verdict, Box<dyn std::error::Error>> {
    let base = MonomialSum::from_pairs(&[(2, 2), (1, 2)]);
    let cube = expand_power(&base, 3);
    let want = MonomialSum::from_pairs(&[(6, 8), (5, 24), (4, 24), (3, 8)]);
    Ok(verdict(cube == want, format!("(2x^2+2x)^3 = {:?}", cube.0)))
}

fn group_partition_check() -> Result<Verdict, Box<dyn std::error::Error>> {
    let pair = PairContext::new(&presets::mixed_domain(), &presets::mixed_target())?;
    let letters = MonomialSum::from_exponents(&pair.domain_exps);
    let cube = expand_power(&letters, 3);
    let targets = MonomialSum::from_exponents(&pair.target_exps);
    let groups = group_partition(&pair.ctx, &cube, &targets)?;
    let n6 = groups.iter().filter(|g| g.target == 6).count();
    let n3 = groups.iter().filter(|g| g.target == 3).count();
    let exact = groups
        .iter()
        .all(|g| g.parts.to_mass(&pair.ctx) == pair.ctx.monomial(g.target));
    let mut uses = MonomialSum::from_pairs(&[]);
    for g in &groups {
        for (e, n) in &g.parts.0 {
            *uses.0.entry(*e).or_default() += n;
        }
    }
    Ok(verdict(
        n6 == 8 && n3 == 20 && exact && uses == cube,
        format!("{n6} groups of mass x^6, {n3} of mass x^3; exact per group: {exact}; uses the whole level: {}", uses == cube),
    ))
}

fn step_constant() -> Result<Verdict, Box<dyn std::error::Error>> {
    let k = presets::mixed_domain();
    let f = presets::mixed_target();
    let pair = PairContext::new(&k, &f)?;
    let omega = Omega::default_for(&pair);
    let rep = find_min_c(&k, &f, Some(&omega), 2, 12)?;
    // Independent check of the returned value: build the tree at that step
    // and verify both levels.
    let tree = build_partition_tree(&k, &f, 2, Some(rep.c))?;
    let ok = (1..=2).map(|l| verify_level(&tree, l, None)).collect::<Result<Vec<_>, _>>()?;
    let built = ok.iter().all(|r| r.passed());
    let rejected: Vec<u32> = rep.rejected.iter().map(|(c, _)| *c).collect();
    Ok(verdict(
        rep.c >= 5,
        format!(
            "smallest feasible c = {} (rejected {rejected:?}); depth-2 tree at c = {} verifies: {built}; expected c >= 5",
            rep.c, rep.c
        ),
    ))
}

fn partition_tree_depth_two() -> Result<Verdict, Box<dyn std::error::Error>> {
    let k = presets::mixed_domain();
    let f = presets::mixed_target();
    let mut notes = Vec::new();
    let mut pass = true;
    for c in [Some(5), None] {
        let tree = build_partition_tree(&k, &f, 2, c)?;
        for l in 1..=2 {
            let r = verify_level(&tree, l, None)?;
            let ok = r.surjective
                && r.mass_exact
                && r.partition_total
                && r.almost_injective
                && r.c_tilde.as_deref() == Some("1");
            pass &= ok;
            if !ok {
                notes.push(format!("c = {} level {l}: {r:?}", tree.step_c()));
            }
        }
        let lvl = tree.level(2)?;
        notes.push(format!(
            "c = {}: level 2 cut {} with {} domain words",
            tree.step_c(),
            lvl.source_level,
            lvl.sources.len()
        ));
    }
    Ok(verdict(pass, notes.join("; ")))
}

fn lipschitz_stability() -> Result<Verdict, Box<dyn std::error::Error>> {
    let tree = build_partition_tree(&presets::mixed_domain(), &presets::mixed_target(), 2, None)?;
    let seed = 0;
    let one = estimate_lipschitz(&tree, 1, 10_000, seed)?;
    let two = estimate_lipschitz(&tree, 2, 10_000, seed)?;
    let finite = one.sampled_max.is_finite() && two.sampled_max.is_finite() && one.sampled_max > 0.0;
    let ratio = two.sampled_max / one.sampled_max;
    let sep = one.separation_ok && two.separation_ok;
    Ok(verdict(
        finite && (2.0 / 3.0..=1.5).contains(&ratio) && sep,
        format!(
            "c = {}, seed {seed}: max {:.3} at depth 1, {:.3} at depth 2, ratio {ratio:.4}; separation bound holds: {sep}",
            tree.step_c(),
            one.sampled_max,
            two.sampled_max
        ),
    ))
}

fn equivalence_certificates() -> Result<Verdict, Box<dyn std::error::Error>> {
    let ninths = presets::homogeneous_line(3, rat(1, 9));
    let mixed = presets::packed_line("mixed_ninths", &[rat(1, 9), rat(1, 9), rat(1, 81), rat(1, 81), rat(1, 81)]);
    let v = decide_homogeneous_domain(&ninths, &mixed)?;
    let exps_ok = matches!(&v.certificate, Certificate::IntegerExponents { exponents, .. } if exponents == &[1, 1, 2, 2, 2]);
    let positive = v.status == Status::Equivalent && exps_ok && v.replay();

    let k = presets::mixed_domain();
    let f = presets::mixed_target();
    let paths: Vec<(&str, Result<selfsim::equivalence::EquivalenceVerdict, Error>)> = vec![
        ("decide", decide(&k, &f)),
        ("decide reversed", decide(&f, &k)),
        ("homogeneous domain", decide_homogeneous_domain(&k, &f)),
        ("homogeneous domain reversed", decide_homogeneous_domain(&f, &k)),
        ("hypothesis domain", decide_with_embedding_hypothesis(&k, &f, Hypothesis::HomogeneousDomain)),
        ("hypothesis target", decide_with_embedding_hypothesis(&k, &f, Hypothesis::HomogeneousTarget)),
    ];
    let mut negative = true;
    let mut seen = Vec::new();
    for (name, r) in &paths {
        let status = match r {
            Ok(v) => format!("{:?}", v.status),
            Err(e) => format!("error ({e})"),
        };
        if matches!(r, Ok(v) if v.status == Status::Equivalent) {
            negative = false;
        }
        seen.push(format!("{name}: {status}"));
    }
    Ok(verdict(
        positive && negative,
        format!(
            "ninths pair: {:?} with exponents ok {exps_ok}, replay {}; mixed pair [{}]",
            v.status,
            v.replay(),
            seen.join(", ")
        ),
    ))
}

fn decomposition_oracle() -> Result<Verdict, Box<dyn std::error::Error>> {
    let mut rng = common::rng(8);
    let (mut agree, mut feasible) = (0, 0);
    let mut mismatches = Vec::new();
    for i in 0..200 {
        let inst = common::random_instance(&mut rng, 12);
        let atom_exps: Vec<u32> = inst.atoms.iter().map(|w| common::exponent(&inst.exps, w)).collect();
        let masses: Vec<_> = inst.targets.iter().map(|t| t.to_mass(&inst.ctx)).collect();
        let oracle = common::brute_force_feasible(&inst.ctx, &atom_exps, &masses);
        let problem = DecompositionProblem::new(
            inst.ctx.clone(),
            inst.exps.clone(),
            inst.source.clone(),
            inst.targets.clone(),
            0,
            inst.threshold,
        );
        let got = match decompose(&problem) {
            Ok(groups) => {
                let exact = groups.iter().zip(&masses).all(|(g, m)| {
                    let mut s = inst.ctx.zero();
                    for w in &g.words {
                        s = s.mass_add(&inst.ctx.monomial(common::exponent(&inst.exps, w))).unwrap();
                    }
                    &s == m
                });
                let mut used: Vec<_> = groups.iter().flat_map(|g| g.words.clone()).collect();
                used.sort();
                let mut atoms = inst.atoms.clone();
                atoms.sort();
                if !exact || used != atoms {
                    mismatches.push(format!("instance {i}: returned groups are not an exact partition"));
                }
                true
            }
            Err(Error::Infeasible(_)) => false,
            Err(e) => return Err(e.into()),
        };
        if got == oracle {
            agree += 1;
        } else {
            mismatches.push(format!("instance {i}: decompose {got}, brute force {oracle}"));
        }
        feasible += oracle as usize;
    }
    let _ = TargetMass::Monomial(0);
    Ok(verdict(
        mismatches.is_empty(),
        format!("{agree}/200 verdicts agree ({feasible} feasible, {} infeasible) {}", 200 - feasible, mismatches.join("; ")),
    ))
}

fn cut_invariants() -> Result<Verdict, Box<dyn std::error::Error>> {
    use rand::Rng;
    let mut rng = common::rng(9);
    let mut cuts = 0;
    let mut bad = Vec::new();
    for sys in 0..50 {
        let p = rng.gen_range(2..=5i64);
        let m = rng.gen_range(2..=5usize);
        let exps: Vec<i64> = loop {
            let e: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=3)).collect();
            let total: f64 = e.iter().map(|&a| (p as f64).powi(-(a as i32))).sum();
            if total < 1.0 {
                break e;
            }
        };
        let ratios: Vec<_> = exps.iter().map(|&a| rat(1, p.pow(a as u32))).collect();
        let spec = presets::packed_line(&format!("random_{sys}"), &ratios);
        let ctx = selfsim::algebra::build_context(&ratios)?;
        let s = solve_dimension(&ratios, DEFAULT_ROOT_TOL)?;
        let r_min = ratios.iter().map(selfsim::algebra::to_f64).fold(1.0, f64::min);
        let delta_pow = rng.gen_range(1..=2u32);
        let delta = rat(1, p.pow(delta_pow));
        let df = selfsim::algebra::to_f64(&delta);
        for n in 1..=12u32 {
            let upper = df.powf(-(n as f64) * s) * r_min.powf(-s);
            if upper > 2e5 {
                break;
            }
            let cut = stopping_cut_with_budget(&spec, &delta, n, 1_000_000)?;
            let lower = r_min.powf(s) * df.powf(-(n as f64) * s);
            let count = cut.len() as f64;
            let mass_one = cut_mass(&ctx, &cut).is_one();
            if !mass_one || count < lower * (1.0 - 1e-9) || count > upper * (1.0 + 1e-9) {
                bad.push(format!("system {sys} level {n}: {count} words, bounds [{lower:.2}, {upper:.2}], mass one {mass_one}"));
            }
            cuts += 1;
        }
    }
    Ok(verdict(bad.is_empty(), format!("{cuts} cuts over 50 systems {}", bad.join("; "))))
}

fn main() {
    let criteria: [(u32, &str, Check, Duration); 9] = [
        (1, "dimension equality", dimension_equality, Duration::from_secs(1)),
        (2, "expansion identity", expansion_identity, Duration::from_secs(1)),
        (3, "group partition", group_partition_check, Duration::from_secs(10)),
        (4, "step constant", step_constant, Duration::from_secs(60)),
        (5, "partition tree depth 2", partition_tree_depth_two, Duration::from_secs(120)),
        (6, "lipschitz stability", lipschitz_stability, Duration::from_secs(120)),
        (7, "equivalence certificates", equivalence_certificates, Duration::from_secs(1)),
        (8, "decomposition oracle", decomposition_oracle, Duration::from_secs(120)),
        (9, "cut invariants", cut_invariants, Duration::from_secs(60)),
    ];
    let mut failed = Vec::new();
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let v = check().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        let took = start.elapsed();
        let in_time = took <= limit;
        let pass = v.pass && in_time;
        println!(
            "criterion {id} {name}: {} ({:.2} s, limit {} s) {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            v.detail
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}

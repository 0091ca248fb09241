// Builds the two-level partition tree for the inhomogeneous pair, checks
// every structural invariant, and samples the Lipschitz ratio of the
// induced surjection at both depths.

use selfsim::ifs::{presets, Word};
use selfsim::surjection::{build_partition_tree, estimate_lipschitz, verify_level};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let domain = presets::mixed_domain();
    let target = presets::mixed_target();
    let tree = build_partition_tree(&domain, &target, 2, None)?;
    println!("step c = {}, ratio root = {}", tree.step_c(), tree.delta());

    for k in 1..=tree.depth() {
        let lvl = tree.level(k)?;
        let rep = verify_level(&tree, k, None)?;
        println!(
            "level {k}: {} domain words -> {} target words; surjective={} mass_exact={} c~={:?} alpha={}",
            lvl.sources.len(),
            lvl.targets.len(),
            rep.surjective,
            rep.mass_exact,
            rep.c_tilde,
            rep.alpha
        );
        if !rep.passed() {
            return Err(format!("level {k} failed verification").into());
        }
    }

    let addr = Word::parse("2413312424131", 4)?;
    let j1 = tree.evaluate(&addr, 1)?;
    let j2 = tree.evaluate(&addr, 2)?;
    println!("g(2413312424131...) lies in F_{} and F_{}", j1.display(28), j2.display(28));

    let shallow = estimate_lipschitz(&tree, 1, 10_000, 2024)?;
    let deep = estimate_lipschitz(&tree, 2, 10_000, 2024)?;
    for est in [&shallow, &deep] {
        println!(
            "depth {}: sampled max {:.4}, analytic bound {:.1}, separation ok: {}",
            est.depth, est.sampled_max, est.analytic_bound, est.separation_ok
        );
        for p in &est.profile {
            println!("  k* = {:>2}: {:>5} pairs, max {:.4}", p.k_star, p.pairs, p.max_ratio);
        }
    }
    let ratio = deep.sampled_max / shallow.sampled_max;
    println!("depth-2 / depth-1 maximum: {ratio:.4}");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

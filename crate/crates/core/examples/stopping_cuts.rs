// Stopping-time cuts of the mixed four-map system: each one is a finite
// partition of the attractor, so its cells carry total mass exactly one.

use selfsim::algebra::{build_context, rat};
use selfsim::ifs::{cut_mass, presets, stopping_cut};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = presets::mixed_domain();
    let ctx = build_context(&spec.ratios())?;
    let delta = rat(1, 3);
    for n in 1..=8 {
        let cut = stopping_cut(&spec, &delta, n)?;
        let mass = cut_mass(&ctx, &cut);
        let exps = cut.exponents().unwrap_or_default();
        let lo = exps.iter().min().copied().unwrap_or(0);
        let hi = exps.iter().max().copied().unwrap_or(0);
        println!("level {n}: {:>6} words, exponents {lo}..={hi}, mass {mass}", cut.len());
        if !mass.is_one() {
            return Err(format!("cut {n} has mass {mass}").into());
        }
    }

    // Refinement: every level-3 cell is a union of level-5 cells.
    let coarse = stopping_cut(&spec, &delta, 3)?;
    let fine = stopping_cut(&spec, &delta, 5)?;
    let first = &coarse.words()[0];
    let kids = fine.descendants(first);
    println!(
        "cell {} splits into {} cells of the level-5 cut",
        first.display(spec.len()),
        kids.len()
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

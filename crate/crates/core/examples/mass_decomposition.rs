// Exact mass arithmetic: splitting a union of domain cells into pieces
// whose masses match target cells, and the search for the smallest step
// constant that keeps every split feasible.

use selfsim::ifs::{presets, stopping_cut, Word};
use selfsim::massdecomp::{decompose, find_min_c_for, DecompositionProblem, Omega, PairContext, TargetMass};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let domain = presets::mixed_domain();
    let target = presets::mixed_target();
    let pair = PairContext::new(&domain, &target)?;
    println!("joint root {} ; domain exponents {:?}", pair.root, pair.domain_exps);

    let omega = Omega::default_for(&pair);
    let rep = find_min_c_for(&pair, Some(&omega), 2, 8)?;
    for (c, why) in &rep.rejected {
        println!("c = {c} rejected: {why}");
    }
    println!("smallest feasible c = {}", rep.c);

    // Split the domain cell "1" (mass x) into one target letter of mass
    // x^3 and the remainder, using atoms two exponent steps deeper.
    let source = vec![Word::parse("1", domain.len())?];
    let rest = pair.ctx.monomial(1).mass_sub(&pair.ctx.monomial(3))?;
    let problem = DecompositionProblem::new(
        pair.ctx.clone(),
        pair.domain_exps.clone(),
        source,
        vec![TargetMass::Monomial(3), TargetMass::Mass(rest)],
        1,
        3,
    );
    let pieces = decompose(&problem)?;
    for (i, p) in pieces.iter().enumerate() {
        let words: Vec<String> = p.words.iter().map(|w| w.display(domain.len()).to_string()).collect();
        println!("piece {i}: mass {} from {} cells [{}]", p.mass, words.len(), words.join(" "));
    }

    // The first level of the tree: a full cut of the domain onto the
    // 28 target letters.
    let cut = stopping_cut(&domain, &pair.root, 1 + rep.c)?;
    let letters: Vec<TargetMass> = pair.target_exps.iter().map(|&e| TargetMass::Monomial(e)).collect();
    let first = decompose(&DecompositionProblem::new(
        pair.ctx.clone(),
        pair.domain_exps.clone(),
        cut.into_words(),
        letters,
        1 + rep.c,
        0,
    ))?;
    let sizes: Vec<usize> = first.iter().map(|g| g.words.len()).collect();
    println!("first level group sizes {sizes:?}");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

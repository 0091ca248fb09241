// Lipschitz-equivalence verdicts for a handful of pairs, each with a
// certificate that can be checked again independently.

use selfsim::algebra::rat;
use selfsim::equivalence::{decide, decide_with_embedding_hypothesis, Hypothesis, Status};
use selfsim::ifs::{presets, IfsSpec};

fn show(name: &str, v: &selfsim::equivalence::EquivalenceVerdict) {
    println!("{name}: {:?} (replays: {})", v.status, v.replay());
    for n in &v.notes {
        println!("    {n}");
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let ninths = presets::homogeneous_line(3, rat(1, 9));
    let mixed: IfsSpec = presets::packed_line(
        "mixed_ninths",
        &[rat(1, 9), rat(1, 9), rat(1, 81), rat(1, 81), rat(1, 81)],
    );
    let quarters = presets::homogeneous_line(2, rat(1, 4));

    let v = decide(&ninths, &mixed)?;
    show("three ninths vs mixed ninths", &v);
    if v.status != Status::Equivalent {
        return Err("expected an equivalence".into());
    }

    let v = decide(&presets::mixed_domain(), &presets::mixed_target())?;
    show("mixed domain vs mixed target", &v);

    let v = decide(&presets::cantor(), &quarters)?;
    show("cantor vs two quarters", &v);

    let v = decide_with_embedding_hypothesis(&ninths, &mixed, Hypothesis::HomogeneousDomain)?;
    show("with the homogeneous-domain hypothesis", &v);
    println!("{}", v.to_json());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

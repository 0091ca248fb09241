// Cell maps read off a partition tree: measure linearity, restriction to
// a subfamily of target cells, and the density report.

use selfsim::ifs::presets;
use selfsim::surjection::{
    build_partition_tree, check_measure_linearity, localize, restrict_to_intersection, CellMap,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tree = build_partition_tree(&presets::mixed_domain(), &presets::mixed_target(), 1, None)?;
    let map = CellMap::from_tree(&tree, 1)?;
    let lin = check_measure_linearity(&map)?;
    println!(
        "{} source cells onto {} targets, linear with constant {:?}",
        map.sources.len(),
        map.targets.len(),
        lin.c_tilde.map(|c| c.to_string())
    );

    let rep = localize(&map, 0.05)?;
    println!(
        "epsilon {}: q = {}, selected cell {} at level {}, attained {}",
        rep.epsilon, rep.q, rep.selected.1, rep.selected.0, rep.attained
    );

    // Keep the even-numbered target letters only; the rest of the domain is
    // pushed onto the nearest kept cell.
    let keep = |t: &selfsim::ifs::Word| t.letters().first().is_some_and(|l| l % 2 == 1);
    let (narrow, moved) = restrict_to_intersection(&map, keep)?;
    let collapsed = moved.iter().filter(|d| d.collapsed).count();
    println!("restricted map: {collapsed} source cells moved");
    let rep = localize(&narrow, 0.05)?;
    for c in rep.cells.iter().take(4) {
        println!("  target {}: {} preimages, density {}", c.target, c.preimage_count, c.density);
    }
    let text = narrow.to_json();
    let back = CellMap::from_json(&text)?;
    println!("json round trip: {} bytes, tables agree: {}", text.len(), back.table == narrow.table);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

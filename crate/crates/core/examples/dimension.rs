// Similarity dimension and the exact Moran ring of a few line systems.

use selfsim::algebra::{build_context, format_rational, poly::format_poly, solve_dimension, DEFAULT_ROOT_TOL};
use selfsim::ifs::{presets, validate_ssc};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let systems = [presets::cantor(), presets::mixed_domain(), presets::mixed_target()];
    let mut dims = Vec::new();
    for s in &systems {
        let ratios = s.ratios();
        let dim = solve_dimension(&ratios, DEFAULT_ROOT_TOL)?;
        let ctx = build_context(&ratios)?;
        let cert = validate_ssc(s)?;
        println!("{} ({} maps)", s.label, s.len());
        println!("  dimension       {dim:.12}");
        println!("  ratio root      {}", format_rational(ctx.ratio_root()));
        println!("  exponents       {:?}", ctx.exponents());
        println!("  Moran poly      {}", format_poly(ctx.moran_poly()));
        println!("  minimal poly    {}", format_poly(ctx.min_poly()));
        println!("  x = root^dim    {:.12}", ctx.x_value());
        println!("  separation gap  {:.6}", cert.delta_k);
        dims.push(dim);
    }
    // The two mixed systems share a dimension.
    if (dims[1] - dims[2]).abs() > 1e-10 {
        return Err(format!("dimensions differ: {} vs {}", dims[1], dims[2]).into());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

//! Exact arithmetic for cell masses and dimensions.

mod context;
mod dimension;
mod mass;
pub mod poly;
mod rational;

pub use context::{build_context, moran_polynomial, MoranContext, DEFAULT_ROOT_TOL};
pub use dimension::{solve_dimension, verify_integer_exponents, IntegerExponentCheck};
pub use mass::{expand_power, AlgebraicMass, MonomialSum};
pub use rational::{
    check_unit_interval, exponent_vector, format_rational, int, is_log_rational,
    is_perfect_power, parse_rational, rat, ratio_root, rational_pow, to_f64, Rational,
};

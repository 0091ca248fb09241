//! Self-similar systems, address words, stopping-time cuts and cell
//! geometry.

mod cut;
mod geometry;
pub mod presets;
mod spec;
mod word;

pub use cut::{
    cut_by_exponents, cut_mass, descendant_range, locate_in, refine_cell, stopping_cut,
    stopping_cut_with_budget, word_exponent, word_ratio, words_mass, Cut, CutScale,
    DEFAULT_WORD_BUDGET,
};
pub use geometry::{
    attractor_hull_1d, cell_distance_bounds, cell_geometry, diameter_estimate, normalize,
    validate_ssc, CellGeometry, DistanceBounds, Realization, SeparationCert,
};
pub use spec::{IfsSpec, Similitude};
pub use word::{wedge, Word, WordDisplay};

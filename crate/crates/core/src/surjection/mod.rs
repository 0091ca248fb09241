//! The hierarchical surjection between two commensurable systems of equal
//! dimension, finite cell maps, and verifiers for their invariants.

mod cellmap;
mod lipschitz;
mod tree;
mod verify;

use serde::Serialize;

pub use cellmap::{
    check_measure_linearity, localize, restrict_to_intersection, CellMap, DiameterWitness,
    LocalizationReport, LocalizedCell,
};
pub use lipschitz::{estimate_lipschitz, LipschitzEstimate, PairSample, ScaleProfile};
pub use tree::{BuildOptions, NodeJson, PartitionTree, TreeJson, TreeLevel};
pub use verify::{
    check_almost_injectivity, check_mass_exact, check_nesting, check_partition_total,
    check_tree_linearity, fragmentation_index, verify_surjective, Fragmentation,
    InjectivityReport, LinearityReport, MassCheck,
};

use crate::error::Result;
use crate::ifs::IfsSpec;

/// Convenience wrapper around [`PartitionTree::build`].
pub fn build_partition_tree(
    domain: &IfsSpec,
    target: &IfsSpec,
    depth: u32,
    c: Option<u32>,
) -> Result<PartitionTree> {
    PartitionTree::build(domain, target, depth, c)
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzSummary {
    pub sampled_max: f64,
    pub analytic_bound: f64,
    pub samples: usize,
    pub seed: u64,
}

impl From<&LipschitzEstimate> for LipschitzSummary {
    fn from(e: &LipschitzEstimate) -> Self {
        LipschitzSummary {
            sampled_max: e.sampled_max,
            analytic_bound: e.analytic_bound,
            samples: e.samples,
            seed: e.seed,
        }
    }
}

/// Per-level verification results of a partition tree.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub level: u32,
    pub surjective: bool,
    pub mass_exact: bool,
    pub partition_total: bool,
    /// Whether this level refines the previous one; `true` at level 1.
    pub nested: bool,
    pub almost_injective: bool,
    /// The common preimage-to-cell mass ratio, or `null` when none exists.
    pub c_tilde: Option<String>,
    /// An integer, or `"unbounded"` when the built depth cannot certify one.
    pub alpha: serde_json::Value,
    pub lipschitz: Option<LipschitzSummary>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.surjective
            && self.mass_exact
            && self.partition_total
            && self.nested
            && self.almost_injective
            && self.c_tilde.as_deref() == Some("1")
            && self.lipschitz.as_ref().is_none_or(|l| l.sampled_max.is_finite())
    }
}

/// Runs every structural check on level `k`, plus Lipschitz sampling when
/// `samples` is given as `(count, seed)`.
pub fn verify_level(
    tree: &PartitionTree,
    k: u32,
    samples: Option<(usize, u64)>,
) -> Result<VerificationReport> {
    let lin = check_tree_linearity(tree, k)?;
    let alpha = match fragmentation_index(tree, k)? {
        Fragmentation::Alpha(a) => serde_json::Value::from(a),
        Fragmentation::Unbounded(_) => serde_json::Value::from("unbounded"),
    };
    let lipschitz = match samples {
        Some((n, seed)) => Some(LipschitzSummary::from(&estimate_lipschitz(tree, k, n, seed)?)),
        None => None,
    };
    Ok(VerificationReport {
        level: k,
        surjective: verify_surjective(tree, k),
        mass_exact: check_mass_exact(tree, k)?.exact,
        partition_total: check_partition_total(tree, k)?,
        nested: k == 1 || check_nesting(tree, k - 1)?,
        almost_injective: check_almost_injectivity(tree, k)?.injective,
        c_tilde: lin.c_tilde.map(|c| c.to_string()),
        alpha,
        lipschitz,
    })
}

#[cfg(test)]
mod tests;

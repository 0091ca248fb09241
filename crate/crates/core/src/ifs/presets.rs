//! Line realizations used throughout the examples and tests.

use num::{One, Zero};

use super::spec::IfsSpec;
use crate::algebra::{rat, Rational};

/// Packs cells of the given ratios left to right in `[0, 1]` with equal
/// gaps, so the attractor spans exactly `[0, 1]`.
pub fn packed_line(label: &str, ratios: &[Rational]) -> IfsSpec {
    let n = ratios.len();
    let total: Rational = ratios.iter().sum();
    let gap = if n > 1 {
        (Rational::one() - total) / Rational::from_integer((n as i64 - 1).into())
    } else {
        Rational::zero()
    };
    let mut start = Rational::zero();
    let mut maps = Vec::with_capacity(n);
    for r in ratios {
        maps.push((r.clone(), start.clone()));
        start += r + &gap;
    }
    IfsSpec::on_line(label, &maps).expect("packed line is well formed")
}

pub fn homogeneous_line(m: usize, r: Rational) -> IfsSpec {
    packed_line(&format!("homogeneous-{m}"), &vec![r; m])
}

/// The middle-thirds Cantor set.
pub fn cantor() -> IfsSpec {
    IfsSpec::on_line("cantor", &[(rat(1, 3), rat(0, 1)), (rat(1, 3), rat(2, 3))])
        .expect("cantor is well formed")
}

/// Two maps of ratio 1/3 and two of ratio 1/9.
pub fn mixed_domain() -> IfsSpec {
    packed_line("mixed_domain", &[rat(1, 3), rat(1, 3), rat(1, 9), rat(1, 9)])
}

/// Twenty maps of ratio 1/27 followed by eight of ratio 1/729.
pub fn mixed_target() -> IfsSpec {
    let mut ratios = vec![rat(1, 27); 20];
    ratios.extend(vec![rat(1, 729); 8]);
    packed_line("mixed_target", &ratios)
}

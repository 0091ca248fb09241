use super::*;
use crate::algebra::rat;
use crate::error::Error;
use crate::ifs::{presets, Word};

fn w(s: &str, n: usize) -> Word {
    Word::parse(s, n).unwrap()
}

#[test]
fn identity_tree_on_cantor() {
    let c = presets::cantor();
    let tree = build_partition_tree(&c, &c, 3, None).unwrap();
    assert_eq!(tree.step_c(), 1);
    for k in 1..=3 {
        let lvl = tree.level(k).unwrap();
        assert_eq!(lvl.targets.len(), 1 << k);
        for (i, s) in lvl.sources.iter().enumerate() {
            assert!(lvl.targets[lvl.assignment[i] as usize].is_prefix_of(s));
        }
        assert!(verify_surjective(&tree, k));
        assert!(check_tree_linearity(&tree, k).unwrap().c_tilde.unwrap().is_one());
        assert!(check_almost_injectivity(&tree, k).unwrap().injective);
    }
    let addr = w("2121121", 2);
    assert_eq!(tree.evaluate(&addr, 3).unwrap(), w("212", 2));
    assert_eq!(fragmentation_index(&tree, 1).unwrap(), Fragmentation::Alpha(0));
    assert_eq!(fragmentation_index(&tree, 3).unwrap(), Fragmentation::Unbounded(3));
    let est = estimate_lipschitz(&tree, 2, 300, 7).unwrap();
    assert!((est.sampled_max - 1.0).abs() < 1e-12, "{}", est.sampled_max);
    assert!(est.separation_ok);
    assert!(est.analytic_bound >= est.sampled_max);
}

#[test]
fn example_tree_depth_one() {
    let k = presets::mixed_domain();
    let f = presets::mixed_target();
    let tree = build_partition_tree(&k, &f, 1, Some(4)).unwrap();
    assert_eq!(tree.base_length(), Some(3));
    let lvl = tree.level(1).unwrap();
    assert_eq!(lvl.targets.len(), 28);
    assert_eq!(lvl.source_level, 5);
    assert!(verify_surjective(&tree, 1));
    assert!(check_mass_exact(&tree, 1).unwrap().exact);
    assert!(check_partition_total(&tree, 1).unwrap());
    // The leftmost address falls in the group of the first target letter.
    assert_eq!(tree.evaluate(&w("1111111", 4), 1).unwrap(), w("1", 28));
    assert!(matches!(
        tree.evaluate(&w("1", 4), 1),
        Err(Error::AddressTooShort { .. })
    ));
}

#[test]
fn example_tree_depth_two_invariants() {
    let k = presets::mixed_domain();
    let f = presets::mixed_target();
    let tree = build_partition_tree(&k, &f, 2, Some(4)).unwrap();
    for lvl in 1..=2 {
        let rep = verify_level(&tree, lvl, None).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }
    assert!(check_nesting(&tree, 1).unwrap());
    let addr = w("2413312424131", 4);
    let j1 = tree.evaluate(&addr, 1).unwrap();
    let j2 = tree.evaluate(&addr, 2).unwrap();
    assert!(j1.is_prefix_of(&j2));
}

#[test]
fn corrupted_trees_fail() {
    let c = presets::cantor();
    let mut tree = build_partition_tree(&c, &c, 2, None).unwrap();
    {
        let lvl = tree.level_mut(2).unwrap();
        // Empty the group of the second target.
        for a in lvl.assignment.iter_mut() {
            if *a == 1 {
                *a = 0;
            }
        }
    }
    assert!(!verify_surjective(&tree, 2));
    assert!(!check_mass_exact(&tree, 2).unwrap().exact);

    let mut tree = build_partition_tree(&c, &c, 2, None).unwrap();
    {
        let lvl = tree.level_mut(2).unwrap();
        lvl.targets[1] = lvl.targets[0].clone();
    }
    let inj = check_almost_injectivity(&tree, 2).unwrap();
    assert!(!inj.injective);
    assert_eq!(inj.witnesses.len(), 1);
}

#[test]
fn dimension_mismatch_is_reported() {
    let k = presets::mixed_domain();
    let f = presets::homogeneous_line(3, rat(1, 9));
    assert!(matches!(
        build_partition_tree(&k, &f, 1, Some(1)),
        Err(Error::DimensionMismatch(_))
    ));
}

fn two_level_line() -> crate::ifs::IfsSpec {
    presets::homogeneous_line(2, rat(1, 3))
}

#[test]
fn restrict_reassigns_to_sibling() {
    let s = two_level_line();
    let map = CellMap::identity(&s, rat(1, 3), 2).unwrap();
    let all = restrict_to_intersection(&map, |_| true).unwrap().0;
    assert_eq!(all.table, map.table);
    assert!(matches!(
        restrict_to_intersection(&map, |_| false),
        Err(Error::EmptyIntersection)
    ));
    let excluded = w("12", 2);
    let (out, wit) = restrict_to_intersection(&map, |t| t != &excluded).unwrap();
    // Brute force: the excluded cell's parent images are {11, 12}; the only
    // kept one is 11.
    let i = map.sources.iter().position(|x| x == &excluded).unwrap();
    assert_eq!(out.image(i), &w("11", 2));
    for (j, x) in out.sources.iter().enumerate() {
        if j != i {
            assert_eq!(out.image(j), x);
        }
    }
    assert!(wit.iter().all(|d| d.after <= d.before));
    assert!(wit[i].collapsed);
}

#[test]
fn linearity_and_localization() {
    let s = two_level_line();
    let id = CellMap::identity(&s, rat(1, 3), 2).unwrap();
    assert!(check_measure_linearity(&id).unwrap().c_tilde.unwrap().is_one());
    let rep = localize(&id, 0.1).unwrap();
    assert!(rep.attained);
    assert_eq!(rep.q, 1);
    assert!(rep.cells.iter().all(|c| c.density == "1"));

    // Two source cells of one parent onto one target cell at level 1.
    let pairs: Vec<(Word, Word)> = id
        .sources
        .iter()
        .map(|x| (x.clone(), w("1", 2)))
        .collect();
    let squash = CellMap::from_pairs(s.clone(), s.clone(), rat(1, 3), 2, 1, &pairs).unwrap();
    let lin = check_measure_linearity(&squash).unwrap();
    assert!(lin.c_tilde.is_none());
    assert_eq!(lin.ratios[0].1.to_string(), "2");
    assert!(lin.ratios[1].1.is_zero());
    let rep = localize(&squash, 0.1).unwrap();
    assert_eq!(rep.q, 4);
    assert_eq!(rep.cells[1].density, "0");

    let json = squash.to_json();
    let back = CellMap::from_json(&json).unwrap();
    assert_eq!(back.table, squash.table);
}

#[test]
fn tree_localization_reads_group_sizes() {
    let k = presets::mixed_domain();
    let f = presets::mixed_target();
    let tree = build_partition_tree(&k, &f, 1, Some(4)).unwrap();
    let map = CellMap::from_tree(&tree, 1).unwrap();
    let rep = localize(&map, 0.01).unwrap();
    assert!(rep.cells.iter().all(|c| c.density == "1"));
    let smallest = tree.level(1).unwrap().groups().iter().map(Vec::len).min().unwrap();
    assert_eq!(rep.q as usize, smallest);
}

#[test]
fn tree_json_shape() {
    let c = presets::cantor();
    let tree = build_partition_tree(&c, &c, 1, None).unwrap();
    let v: TreeJson = serde_json::from_str(&tree.to_json()).unwrap();
    assert_eq!(v.levels.len(), 1);
    assert_eq!(v.levels[0][0].target, "1");
    assert_eq!(v.levels[0][0].group, ["11", "12"]);
}

#[test]
fn lipschitz_sampling_is_deterministic() {
    let k = presets::mixed_domain();
    let f = presets::mixed_target();
    let tree = build_partition_tree(&k, &f, 1, Some(4)).unwrap();
    let a = estimate_lipschitz(&tree, 1, 500, 42).unwrap();
    let b = estimate_lipschitz(&tree, 1, 500, 42).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.separation_ok);
    assert!(a.sampled_max.is_finite() && a.sampled_max > 0.0);
    assert!(a.analytic_bound >= a.sampled_max);
}

//! Property tests for the structural and distributional invariants, on
//! top of the seeded acceptance scenarios.

mod common;

use common::{assert_masses, assert_structure};
use mrbt::oracle::RegionList;
use mrbt::{Budget, Point, SpaceDescriptor, Tree, WeightedPoint};
use proptest::prelude::*;

fn space_strategy() -> impl Strategy<Value = SpaceDescriptor> {
    prop::collection::vec(2usize..=8, 1..=3).prop_map(|cards| SpaceDescriptor::new(cards).unwrap())
}

/// A space plus a batch of in-range weighted points (duplicates allowed).
fn scenario_strategy() -> impl Strategy<Value = (SpaceDescriptor, Vec<(Vec<usize>, f64)>)> {
    space_strategy().prop_flat_map(|space| {
        let cards = space.cardinalities().to_vec();
        let point = cards
            .into_iter()
            .map(|c| 0..c)
            .collect::<Vec<_>>()
            .prop_map(|coords| coords);
        let insert = (point, 0.01f64..10.0);
        (Just(space), prop::collection::vec(insert, 1..40))
    })
}

proptest! {
    #[test]
    fn bisect_partitions_volume((space, _) in scenario_strategy(), depth in 0usize..6) {
        let region = space.full_region();
        if let Ok(dim) = region.split_dimension(depth) {
            let (_, low, high) = region.bisect(dim).unwrap();
            prop_assert_eq!(low.volume() + high.volume(), region.volume());
            for cell in region.cells() {
                prop_assert!(low.contains(&cell) != high.contains(&cell));
            }
        }
    }

    #[test]
    fn split_dimension_is_deterministic(space in space_strategy(), depth in 0usize..8) {
        let region = space.full_region();
        prop_assert_eq!(region.split_dimension(depth).ok(), region.split_dimension(depth).ok());
    }

    #[test]
    fn cell_index_bijection(space in space_strategy()) {
        for idx in 0..space.total_cells() {
            let p = space.index_cell(idx).unwrap();
            prop_assert_eq!(space.cell_index(&p).unwrap(), idx);
        }
    }

    /// Any two distinct cells separate within max_depth bisections under the
    /// cycling rule.
    #[test]
    fn bisection_chains_separate_points((space, inserts) in scenario_strategy()) {
        let points: Vec<Point> = inserts.iter().map(|(c, _)| Point::new(c.clone())).collect();
        for a in &points {
            for b in &points {
                if a == b {
                    continue;
                }
                let mut region = space.full_region();
                let mut depth = 0;
                let mut chain = 0;
                loop {
                    let dim = region.split_dimension(depth).unwrap();
                    let (split, low, high) = region.bisect(dim).unwrap();
                    chain += 1;
                    prop_assert!(chain <= space.max_depth(), "chain exceeded the depth bound");
                    let a_low = a.coords()[dim] < split;
                    let b_low = b.coords()[dim] < split;
                    if a_low != b_low {
                        break;
                    }
                    region = if a_low { low } else { high };
                    depth += 1;
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Oracle equivalence on arbitrary insertion sequences: identical
    /// outcomes, identical per-cell probabilities, live invariants after
    /// every insert, and the split-count bounds.
    #[test]
    fn random_inserts_match_oracle((space, inserts) in scenario_strategy()) {
        let mut tree = Tree::new(space.clone(), Budget::unlimited());
        let mut rl = RegionList::new(space.clone(), Budget::unlimited());
        let max_chain = space.max_depth();
        let mut total_splits = 0usize;
        for (coords, weight) in &inserts {
            let wp = WeightedPoint::new(Point::new(coords.clone()), *weight).unwrap();
            let a = tree.insert(wp.clone()).unwrap();
            let b = rl.insert(wp).unwrap();
            prop_assert_eq!(a, b);
            if let mrbt::InsertOutcome::Inserted { splits_performed } = a {
                prop_assert!(splits_performed <= max_chain);
                total_splits += splits_performed;
            }
            prop_assert!(tree.node_count() <= 1 + 2 * total_splits);
            assert_structure(&tree);
            assert_masses(&tree);
        }
        let dense_tree = tree.to_dense().unwrap();
        let dense_oracle = rl.dense().unwrap();
        for (a, b) in dense_tree.iter().zip(&dense_oracle) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        // region list volumes always cover the space
        let covered: usize = rl.entries().iter().map(|e| e.region.volume()).sum();
        prop_assert_eq!(covered, space.total_cells());
    }

    /// Each accepted point is the representative of exactly one leaf unless
    /// a later point overwrote it; duplicates never create a second owner.
    #[test]
    fn representatives_are_unique((space, inserts) in scenario_strategy()) {
        let mut tree = Tree::new(space.clone(), Budget::unlimited());
        for (coords, weight) in &inserts {
            let wp = WeightedPoint::new(Point::new(coords.clone()), *weight).unwrap();
            tree.insert(wp).unwrap();
        }
        let leaves = tree.leaves();
        let mut reps: Vec<&Point> = leaves
            .iter()
            .filter_map(|l| l.representative.as_ref())
            .collect();
        let before = reps.len();
        reps.sort_by_key(|p| p.coords().to_vec());
        reps.dedup();
        prop_assert_eq!(before, reps.len(), "a point represents two leaves");
        for leaf in &leaves {
            if let Some(rep) = &leaf.representative {
                prop_assert!(leaf.region.contains(rep));
            }
        }
    }

    /// Round trip: serialize → deserialize preserves bytes and masses.
    #[test]
    fn serialization_round_trip((space, inserts) in scenario_strategy()) {
        let mut tree = Tree::new(space, Budget::unlimited());
        for (coords, weight) in &inserts {
            let wp = WeightedPoint::new(Point::new(coords.clone()), *weight).unwrap();
            tree.insert(wp).unwrap();
        }
        let text = mrbt::io::serialize_tree(&tree);
        let loaded = mrbt::io::deserialize_tree(&text).unwrap();
        prop_assert_eq!(mrbt::io::serialize_tree(&loaded), text);
        prop_assert!((loaded.total_mass() - tree.total_mass()).abs() <= 1e-12 * tree.total_mass());
    }
}

/// Insertion order changes the tree shape but both implementations stay in
/// lockstep on any fixed order (no order-invariance is claimed).
#[test]
fn order_sensitivity_is_mirrored_by_the_oracle() {
    let sc = common::scenario(4242, 30, 256);
    let mut reversed = sc.inserts.clone();
    reversed.reverse();

    for inserts in [&sc.inserts, &reversed] {
        let mut tree = Tree::new(sc.space.clone(), Budget::unlimited());
        let mut rl = RegionList::new(sc.space.clone(), Budget::unlimited());
        for wp in inserts.iter() {
            let a = tree.insert(wp.clone()).unwrap();
            let b = rl.insert(wp.clone()).unwrap();
            assert_eq!(a, b);
        }
        let dense_tree = tree.to_dense().unwrap();
        let dense_oracle = rl.dense().unwrap();
        for (a, b) in dense_tree.iter().zip(&dense_oracle) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

//! Shared helpers for the integration suites: deterministic random
//! scenarios and the verification predicates used across criteria.
//!
//! Each test target compiles its own copy, so not every helper is used in
//! every target.
#![allow(dead_code)]

use mrbt::{Budget, Point, SpaceDescriptor, Tree, WeightedPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Scenario {
    pub space: SpaceDescriptor,
    pub inserts: Vec<WeightedPoint>,
}

/// Deterministic random scenario: 1–3 dimensions, cardinalities 2–8, up to
/// `max_inserts` weighted points with duplicates injected, weights spread
/// log-uniformly over roughly [0.14, 7.4].
pub fn scenario(seed: u64, max_inserts: usize, max_cells: usize) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = loop {
        let dims = rng.gen_range(1..=3);
        let cards: Vec<usize> = (0..dims).map(|_| rng.gen_range(2..=8)).collect();
        let space = SpaceDescriptor::new(cards).unwrap();
        if space.total_cells() <= max_cells {
            break space;
        }
    };
    let n = rng.gen_range(1..=max_inserts);
    let mut inserts: Vec<WeightedPoint> = Vec::with_capacity(n);
    for _ in 0..n {
        let point = if !inserts.is_empty() && rng.gen_bool(0.2) {
            inserts[rng.gen_range(0..inserts.len())].point().clone()
        } else {
            random_point(&space, &mut rng)
        };
        let weight = rng.gen_range(-2.0f64..2.0).exp();
        inserts.push(WeightedPoint::new(point, weight).unwrap());
    }
    Scenario { space, inserts }
}

pub fn random_point<R: Rng>(space: &SpaceDescriptor, rng: &mut R) -> Point {
    let coords = space
        .cardinalities()
        .iter()
        .map(|&c| rng.gen_range(0..c))
        .collect();
    Point::new(coords)
}

/// The running 4×4 scenario: four inserts plus one ignored duplicate.
pub fn four_point_tree() -> Tree {
    let mut tree = Tree::new("4,4".parse().unwrap(), Budget::unlimited());
    for (coords, w) in [
        (vec![0, 0], 0.5),
        (vec![3, 3], 1.0),
        (vec![2, 0], 2.0),
        (vec![3, 2], 0.8),
    ] {
        tree.insert(WeightedPoint::new(Point::new(coords), w).unwrap())
            .unwrap();
    }
    tree
}

/// Structural invariants checked after every insert: the leaves partition
/// the space (exhaustive cell paint), the tree is full binary, the depth
/// bound holds, and the max list equals a full density scan.
pub fn assert_structure(tree: &Tree) {
    let leaves = tree.leaves();
    let cells = tree.space().total_cells();
    let mut paint = vec![0u32; cells];
    for leaf in &leaves {
        for cell in leaf.region.cells() {
            paint[tree.space().cell_index(&cell).unwrap()] += 1;
        }
    }
    assert!(
        paint.iter().all(|&c| c == 1),
        "leaf regions do not partition the space"
    );

    assert_eq!(tree.node_count(), 2 * leaves.len() - 1, "not full binary");
    assert!(
        tree.depth() <= tree.space().max_depth(),
        "depth {} above bound {}",
        tree.depth(),
        tree.space().max_depth()
    );

    let max_density = leaves.iter().map(|l| l.density).fold(0.0f64, f64::max);
    assert_eq!(tree.max_density(), max_density, "tracked max density stale");
    let mut expect: Vec<String> = leaves
        .iter()
        .filter(|l| l.density == max_density)
        .map(|l| l.region.to_string())
        .collect();
    expect.sort();
    let mut got: Vec<String> = tree
        .max_regions()
        .unwrap()
        .iter()
        .map(|r| r.region.to_string())
        .collect();
    got.sort();
    assert_eq!(got, expect, "max list does not match a full scan");
}

/// Mass invariants: root mass equals the sum over leaves of density×volume
/// within 1e-12 relative, and per-cell probabilities sum to 1 within 1e-9.
pub fn assert_masses(tree: &Tree) {
    let z = tree.total_mass();
    let from_leaves: f64 = tree
        .leaves()
        .iter()
        .map(|l| l.density * l.region.volume() as f64)
        .sum();
    assert!(
        (z - from_leaves).abs() <= 1e-12 * z.abs().max(from_leaves.abs()).max(1e-300),
        "root mass {z} vs leaf sum {from_leaves}"
    );

    let mut sum = 0.0;
    for cell in tree.space().full_region().cells() {
        sum += tree.prob(&cell).unwrap();
    }
    assert!((sum - 1.0).abs() <= 1e-9, "probabilities sum to {sum}");
}

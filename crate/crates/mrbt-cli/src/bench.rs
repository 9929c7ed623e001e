//! The tree-vs-dense benchmark: builds a tree from a target distribution,
//! then measures instrumented node visits and wall time for tree
//! probability lookups and sampling against dense-table lookups and
//! linear-scan CDF sampling.
//!
//! Wall-time keys (`*_ns`) vary run to run; every other key is
//! deterministic for a fixed seed.

use std::hint::black_box;
use std::time::Instant;

use mrbt::oracle;
use mrbt::{
    drawers, Budget, InsertOutcome, Point, SpaceDescriptor, Tree, WeightedPoint, DEFAULT_DENSE_CAP,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::CliResult;

const PROBE_POINTS: usize = 1024;
const LOOKUP_OPS: usize = 50_000;
const SAMPLE_OPS: usize = 50_000;

pub fn run(space: &str, target: &str, n: usize, seed: u64) -> CliResult {
    let space: SpaceDescriptor = space.parse()?;
    let cells = space.total_cells();
    let dense_fits = cells <= DEFAULT_DENSE_CAP;

    let table: Option<Vec<f64>> = match target {
        "uniform" if !dense_fits => None,
        "uniform" => Some(vec![1.0 / cells as f64; cells]),
        "bimodal" => Some(bimodal_table(&space)?),
        path => Some(mrbt::io::parse_dense_csv(
            &crate::read_file(path.as_ref())?,
            &space,
        )?),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stream = match &table {
        Some(table) => drawers::monte_carlo(&space, table, n, &mut rng)?,
        // uniform over a space too large to tabulate: draw cells directly;
        // every cell weight is target[cell] × cells = 1
        None => (0..n)
            .map(|_| {
                let coords = space
                    .cardinalities()
                    .iter()
                    .map(|&c| rand::Rng::gen_range(&mut rng, 0..c))
                    .collect();
                WeightedPoint::new(Point::new(coords), 1.0)
            })
            .collect::<Result<Vec<_>, _>>()?,
    };

    let mut tree = Tree::new(space.clone(), Budget::unlimited());
    let (mut inserted, mut ignored) = (0usize, 0usize);
    for wp in stream {
        match tree.insert(wp)? {
            InsertOutcome::Inserted { .. } => inserted += 1,
            InsertOutcome::DuplicateIgnored => ignored += 1,
            InsertOutcome::BudgetExhausted => unreachable!("bench builds are unbudgeted"),
        }
    }

    let stats = tree.stats();
    println!("space={space}");
    println!("cells={cells}");
    println!("target={target}");
    println!("points_drawn={n}");
    println!("inserted={inserted}");
    println!("ignored={ignored}");
    println!("nodes={}", stats.node_count);
    println!("leaves={}", stats.leaf_count);
    println!("depth={}", stats.depth);
    println!("z={}", stats.total_mass);
    println!("tree_bytes={}", stats.tree_bytes);
    println!("dense_table_bytes={}", stats.dense_table_bytes);

    if tree.is_empty() {
        return Ok(());
    }

    let mut probe_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let probes: Vec<Point> = (0..PROBE_POINTS)
        .map(|_| {
            let coords = space
                .cardinalities()
                .iter()
                .map(|&c| rand::Rng::gen_range(&mut probe_rng, 0..c))
                .collect();
            Point::new(coords)
        })
        .collect();

    // tree point lookup
    let mut visits_total = 0usize;
    let start = Instant::now();
    for i in 0..LOOKUP_OPS {
        let (p, visits) = tree.prob_with_visits(&probes[i % PROBE_POINTS])?;
        black_box(p);
        visits_total += visits;
    }
    let prob_ns = start.elapsed().as_nanos() as f64 / LOOKUP_OPS as f64;
    println!(
        "mrbt_prob_mean_visits={}",
        visits_total as f64 / LOOKUP_OPS as f64
    );
    println!("mrbt_prob_mean_ns={prob_ns:.0}");

    // tree sampling
    let mut visits_total = 0usize;
    let start = Instant::now();
    for _ in 0..SAMPLE_OPS {
        let (p, visits) = tree.sample_with_visits(&mut probe_rng)?;
        black_box(p);
        visits_total += visits;
    }
    let sample_ns = start.elapsed().as_nanos() as f64 / SAMPLE_OPS as f64;
    println!(
        "mrbt_sample_mean_visits={}",
        visits_total as f64 / SAMPLE_OPS as f64
    );
    println!("mrbt_sample_mean_ns={sample_ns:.0}");

    if let Some(table) = &table {
        // dense lookup: one array read
        let start = Instant::now();
        for i in 0..LOOKUP_OPS {
            let idx = space.cell_index(&probes[i % PROBE_POINTS])?;
            black_box(table[idx]);
        }
        let lookup_ns = start.elapsed().as_nanos() as f64 / LOOKUP_OPS as f64;
        println!("dense_lookup_mean_visits=1");
        println!("dense_lookup_mean_ns={lookup_ns:.0}");

        // dense CDF sampling: linear scan
        let cdf_ops = (4_000_000 / cells.max(1)).clamp(2_000, 50_000);
        let mut visits_total = 0usize;
        let start = Instant::now();
        for _ in 0..cdf_ops {
            let (idx, visits) = oracle::cdf_sample_with_visits(table, &mut probe_rng)?;
            black_box(idx);
            visits_total += visits;
        }
        let cdf_ns = start.elapsed().as_nanos() as f64 / cdf_ops as f64;
        println!(
            "dense_cdf_mean_visits={}",
            visits_total as f64 / cdf_ops as f64
        );
        println!("dense_cdf_mean_ns={cdf_ns:.0}");

        let tv = oracle::tv_distance(&tree.to_dense()?, table);
        println!("tv_tree_vs_target={tv}");
    }
    Ok(())
}

/// Two axis-aligned Gaussian bumps centered at the 1/4 and 3/4 corners of
/// the grid, normalized to a distribution.
fn bimodal_table(space: &SpaceDescriptor) -> Result<Vec<f64>, Box<dyn std::error::Error>> {
    let cells = space.total_cells();
    if cells > DEFAULT_DENSE_CAP {
        return Err(Box::new(mrbt::Error::SpaceTooLarge {
            cells,
            cap: DEFAULT_DENSE_CAP,
        }));
    }
    let cards = space.cardinalities();
    let c1: Vec<f64> = cards.iter().map(|&c| c as f64 / 4.0).collect();
    let c2: Vec<f64> = cards.iter().map(|&c| 3.0 * c as f64 / 4.0).collect();
    let sigma: Vec<f64> = cards.iter().map(|&c| (c as f64 / 6.0).max(0.75)).collect();
    let mut table: Vec<f64> = space
        .full_region()
        .cells()
        .map(|cell| {
            let bump = |center: &[f64]| -> f64 {
                let d2: f64 = cell
                    .coords()
                    .iter()
                    .zip(center)
                    .zip(&sigma)
                    .map(|((&x, &c), &s)| {
                        let d = (x as f64 - c) / s;
                        d * d
                    })
                    .sum();
                (-d2 / 2.0).exp()
            };
            bump(&c1) + bump(&c2)
        })
        .collect();
    let total: f64 = table.iter().sum();
    for p in &mut table {
        *p /= total;
    }
    Ok(table)
}

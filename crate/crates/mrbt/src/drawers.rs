//! Point-drawing processes that feed tree construction: an exhaustive
//! row-major sweep, a Monte-Carlo drawer over a target table, and a CSV
//! stream.

use rand::Rng;

use crate::error::{Error, Result};
use crate::io;
use crate::oracle::{cdf_sample_unchecked, validate_distribution};
use crate::query::DEFAULT_DENSE_CAP;
use crate::space::{Point, SpaceDescriptor};
use crate::tree::WeightedPoint;

/// An ordered, bounded sequence of weighted points.
pub type DrawnStream = Vec<WeightedPoint>;

/// Emits every cell of the space once, in row-major order, weighted by
/// `weight_fn`. Building a tree from this stream reproduces the weight
/// table exactly.
pub fn exhaustive_sweep<F>(space: &SpaceDescriptor, weight_fn: F) -> Result<DrawnStream>
where
    F: Fn(&Point) -> f64,
{
    exhaustive_sweep_capped(space, weight_fn, DEFAULT_DENSE_CAP)
}

pub fn exhaustive_sweep_capped<F>(
    space: &SpaceDescriptor,
    weight_fn: F,
    cap: usize,
) -> Result<DrawnStream>
where
    F: Fn(&Point) -> f64,
{
    let cells = space.total_cells();
    if cells > cap {
        return Err(Error::SpaceTooLarge { cells, cap });
    }
    let mut stream = Vec::with_capacity(cells);
    for cell in space.full_region().cells() {
        let weight = weight_fn(&cell);
        stream.push(WeightedPoint::new(cell, weight)?);
    }
    Ok(stream)
}

/// Draws `n` cells i.i.d. from `target` through the inverse-CDF scan. Each
/// emitted point carries weight `target[cell] × total_cells`, so a converged
/// tree approximates the target; duplicates are emitted as drawn (the tree
/// ignores them).
pub fn monte_carlo<R: Rng + ?Sized>(
    space: &SpaceDescriptor,
    target: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<DrawnStream> {
    if target.len() != space.total_cells() {
        return Err(Error::DimensionMismatch {
            expected: space.total_cells(),
            found: target.len(),
        });
    }
    validate_distribution(target)?;
    let scale = space.total_cells() as f64;
    let mut stream = Vec::with_capacity(n);
    for _ in 0..n {
        let (idx, _) = cdf_sample_unchecked(target, rng);
        let cell = space.index_cell(idx)?;
        stream.push(WeightedPoint::new(cell, target[idx] * scale)?);
    }
    Ok(stream)
}

/// Parses a reader of CSV rows (`k` coordinates then a weight, `#` comments)
/// into a stream, validating every point against the space.
pub fn csv_stream<R: std::io::BufRead>(
    mut reader: R,
    space: &SpaceDescriptor,
) -> Result<DrawnStream> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| Error::Parse {
        line: 0,
        column: 0,
        detail: e.to_string(),
    })?;
    io::parse_points_csv(&text, space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::tv_distance;
    use crate::tree::{Budget, Tree};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(s: &str) -> SpaceDescriptor {
        s.parse().unwrap()
    }

    fn build(space: &SpaceDescriptor, stream: DrawnStream) -> Tree {
        let mut tree = Tree::new(space.clone(), Budget::unlimited());
        for wp in stream {
            tree.insert(wp).unwrap();
        }
        tree
    }

    #[test]
    fn sweep_reproduces_constant_table() {
        let s = space("2,2");
        let stream = exhaustive_sweep(&s, |_| 1.0).unwrap();
        assert_eq!(stream.len(), 4);
        let tree = build(&s, stream);
        let dense = tree.to_dense().unwrap();
        assert!(dense.iter().all(|&p| (p - 0.25).abs() < 1e-12));
    }

    #[test]
    fn sweep_reproduces_scenario_densities() {
        // weight function shaped like the 4x4 running scenario
        let s = space("4,4");
        let weight = |p: &Point| -> f64 {
            let (x, y) = (p.coords()[0], p.coords()[1]);
            if x < 2 {
                0.5
            } else if y < 2 {
                2.0
            } else if x == 2 {
                1.0
            } else if y == 2 {
                0.8
            } else {
                1.0
            }
        };
        let stream = exhaustive_sweep(&s, weight).unwrap();
        let tree = build(&s, stream);
        let dense = tree.to_dense().unwrap();
        let total: f64 = s.full_region().cells().map(|c| weight(&c)).sum();
        for (idx, &p) in dense.iter().enumerate() {
            let cell = s.index_cell(idx).unwrap();
            assert!((p - weight(&cell) / total).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_respects_cap_and_weight_errors() {
        let wide = SpaceDescriptor::new(vec![2; 32]).unwrap();
        assert!(matches!(
            exhaustive_sweep(&wide, |_| 1.0),
            Err(Error::SpaceTooLarge { .. })
        ));
        let s = space("2,2");
        assert!(matches!(
            exhaustive_sweep(&s, |_| 0.0),
            Err(Error::NonPositiveWeight { .. })
        ));
    }

    #[test]
    fn monte_carlo_delta_target() {
        let s = space("4,4");
        let mut target = vec![0.0; 16];
        target[5] = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let stream = monte_carlo(&s, &target, 10, &mut rng).unwrap();
        assert_eq!(stream.len(), 10);
        assert!(stream
            .iter()
            .all(|wp| wp.point() == &s.index_cell(5).unwrap()));
        let mut tree = Tree::new(s, Budget::unlimited());
        let mut inserted = 0;
        let mut ignored = 0;
        for wp in stream {
            match tree.insert(wp).unwrap() {
                crate::tree::InsertOutcome::Inserted { .. } => inserted += 1,
                crate::tree::InsertOutcome::DuplicateIgnored => ignored += 1,
                crate::tree::InsertOutcome::BudgetExhausted => unreachable!(),
            }
        }
        assert_eq!((inserted, ignored), (1, 9));
    }

    #[test]
    fn monte_carlo_uniform_covers_all_cells() {
        let s = space("4,4");
        let target = vec![1.0 / 16.0; 16];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let stream = monte_carlo(&s, &target, 10_000, &mut rng).unwrap();
        let mut seen = [false; 16];
        for wp in &stream {
            seen[s.cell_index(wp.point()).unwrap()] = true;
        }
        assert!(
            seen.iter().all(|&b| b),
            "10^4 uniform draws hit all 16 cells"
        );
    }

    #[test]
    fn monte_carlo_approximates_bimodal_target() {
        let s = space("8,8");
        // two peaks of mass on opposite corners, smooth falloff
        let mut target: Vec<f64> = s
            .full_region()
            .cells()
            .map(|c| {
                let (x, y) = (c.coords()[0] as f64, c.coords()[1] as f64);
                let d1 = (x - 1.0).powi(2) + (y - 1.0).powi(2);
                let d2 = (x - 6.0).powi(2) + (y - 6.0).powi(2);
                (-d1 / 4.0).exp() + (-d2 / 4.0).exp()
            })
            .collect();
        let total: f64 = target.iter().sum();
        for p in &mut target {
            *p /= total;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let stream = monte_carlo(&s, &target, 1000, &mut rng).unwrap();
        let tree = build(&s, stream);
        let dense = tree.to_dense().unwrap();
        let tv = tv_distance(&dense, &target);
        assert!(tv <= 0.1, "tv distance {tv}");
    }

    #[test]
    fn monte_carlo_is_deterministic_per_seed() {
        let s = space("4,4");
        let target = vec![1.0 / 16.0; 16];
        let a = monte_carlo(&s, &target, 64, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = monte_carlo(&s, &target, 64, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_stream_parses_and_validates() {
        let s = space("4,4");
        let stream = csv_stream("0,0,0.5\n3,3,1.0".as_bytes(), &s).unwrap();
        assert_eq!(stream.len(), 2);
        assert_eq!(stream[0].point().coords(), &[0, 0]);
        assert_eq!(stream[1].weight(), 1.0);

        assert!(matches!(
            csv_stream("4,0,1.0".as_bytes(), &s),
            Err(Error::InvalidPoint { line: Some(1), .. })
        ));
        assert!(matches!(
            csv_stream("0,0,-1".as_bytes(), &s),
            Err(Error::NonPositiveWeight { line: Some(1), .. })
        ));
    }
}

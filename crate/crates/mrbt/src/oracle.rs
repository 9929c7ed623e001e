//! Brute-force reference implementation: a flat region list with the same
//! insertion semantics as the tree but naive data layout and linear scans,
//! plus the dense-table CDF sampler used as the O(n) baseline.
//!
//! The region list shares the `space` module's geometry (bisection and the
//! dimension-cycling rule) but reimplements insertion, lookup, and mass
//! bookkeeping from scratch, so agreement with the tree is a genuine
//! cross-check rather than a tautology.

use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::query::DEFAULT_DENSE_CAP;
use crate::space::{Point, Region, SpaceDescriptor};
use crate::tree::{Budget, InsertOutcome, WeightedPoint};

/// One constant-density region of the flat list.
#[derive(Debug, Clone)]
pub struct RegionEntry {
    pub region: Region,
    pub density: f64,
    pub representative: Option<Point>,
    /// Number of bisections that produced this region; drives the
    /// dimension-cycling rule exactly like tree depth does.
    pub depth: usize,
}

/// Flat mirror of a tree's leaf set. Test-scope component: linear scans
/// everywhere, no indexing, no incremental mass bookkeeping.
#[derive(Debug, Clone)]
pub struct RegionList {
    space: SpaceDescriptor,
    entries: Vec<RegionEntry>,
    inserted_points: usize,
    budget: Budget,
}

impl RegionList {
    pub fn new(space: SpaceDescriptor, budget: Budget) -> Self {
        Self {
            space,
            entries: Vec::new(),
            inserted_points: 0,
            budget,
        }
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn entries(&self) -> &[RegionEntry] {
        &self.entries
    }

    pub fn inserted_points(&self) -> usize {
        self.inserted_points
    }

    /// Mirrors the tree's node count: a full binary tree with this many
    /// leaves has 2·leaves − 1 nodes.
    pub fn node_count_equivalent(&self) -> usize {
        if self.entries.is_empty() {
            0
        } else {
            2 * self.entries.len() - 1
        }
    }

    /// Total mass, recomputed from scratch on every call.
    pub fn total_mass(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.density * e.region.volume() as f64)
            .sum()
    }

    /// Same contract as `Tree::insert`, naive implementation.
    pub fn insert(&mut self, wp: WeightedPoint) -> Result<InsertOutcome> {
        self.space.validate_point(wp.point())?;

        if let Some(max_points) = self.budget.max_points {
            if self.inserted_points >= max_points {
                return Ok(InsertOutcome::BudgetExhausted);
            }
        }
        if let Some(deadline) = self.budget.deadline {
            if Instant::now() >= deadline {
                return Ok(InsertOutcome::BudgetExhausted);
            }
        }

        if self.entries.is_empty() {
            if let Some(max_nodes) = self.budget.max_nodes {
                if max_nodes < 1 {
                    return Ok(InsertOutcome::BudgetExhausted);
                }
            }
            self.entries.push(RegionEntry {
                region: self.space.full_region(),
                density: wp.weight(),
                representative: Some(wp.point().clone()),
                depth: 0,
            });
            self.inserted_points += 1;
            return Ok(InsertOutcome::Inserted {
                splits_performed: 0,
            });
        }

        let slot = self
            .entries
            .iter()
            .position(|e| e.region.contains(wp.point()))
            .expect("entries partition the space");
        let entry = self.entries[slot].clone();

        match &entry.representative {
            Some(rep) if rep == wp.point() => Ok(InsertOutcome::DuplicateIgnored),
            Some(rep) => {
                // probe the bisection chain first so a refused insert
                // leaves the list untouched
                let mut splits = 0;
                let mut probe = entry.region.clone();
                let mut depth = entry.depth;
                loop {
                    let dim = probe.split_dimension(depth)?;
                    let (split, low, high) = probe.bisect(dim)?;
                    splits += 1;
                    let point_low = wp.point().coords()[dim] < split;
                    let rep_low = rep.coords()[dim] < split;
                    if point_low != rep_low {
                        break;
                    }
                    probe = if point_low { low } else { high };
                    depth += 1;
                }
                if let Some(max_nodes) = self.budget.max_nodes {
                    if self.node_count_equivalent() + 2 * splits > max_nodes {
                        return Ok(InsertOutcome::BudgetExhausted);
                    }
                }

                self.entries.swap_remove(slot);
                let mut region = entry.region;
                let mut depth = entry.depth;
                loop {
                    let dim = region.split_dimension(depth)?;
                    let (split, low, high) = region.bisect(dim)?;
                    let point_low = wp.point().coords()[dim] < split;
                    let rep_low = rep.coords()[dim] < split;
                    depth += 1;
                    if point_low != rep_low {
                        let (point_region, rep_region) =
                            if point_low { (low, high) } else { (high, low) };
                        self.entries.push(RegionEntry {
                            region: point_region,
                            density: wp.weight(),
                            representative: Some(wp.point().clone()),
                            depth,
                        });
                        self.entries.push(RegionEntry {
                            region: rep_region,
                            density: entry.density,
                            representative: Some(rep.clone()),
                            depth,
                        });
                        break;
                    }
                    let (shared, empty) = if point_low { (low, high) } else { (high, low) };
                    self.entries.push(RegionEntry {
                        region: empty,
                        density: entry.density,
                        representative: None,
                        depth,
                    });
                    region = shared;
                }
                self.inserted_points += 1;
                Ok(InsertOutcome::Inserted {
                    splits_performed: splits,
                })
            }
            None => {
                if entry.region.volume() == 1 {
                    self.entries[slot].density = wp.weight();
                    self.entries[slot].representative = Some(wp.point().clone());
                    self.inserted_points += 1;
                    return Ok(InsertOutcome::Inserted {
                        splits_performed: 0,
                    });
                }
                if let Some(max_nodes) = self.budget.max_nodes {
                    if self.node_count_equivalent() + 2 > max_nodes {
                        return Ok(InsertOutcome::BudgetExhausted);
                    }
                }
                let dim = entry.region.split_dimension(entry.depth)?;
                let (split, low, high) = entry.region.bisect(dim)?;
                let point_low = wp.point().coords()[dim] < split;
                let (point_region, rest_region) = if point_low { (low, high) } else { (high, low) };
                self.entries.swap_remove(slot);
                self.entries.push(RegionEntry {
                    region: point_region,
                    density: wp.weight(),
                    representative: Some(wp.point().clone()),
                    depth: entry.depth + 1,
                });
                self.entries.push(RegionEntry {
                    region: rest_region,
                    density: entry.density,
                    representative: None,
                    depth: entry.depth + 1,
                });
                self.inserted_points += 1;
                Ok(InsertOutcome::Inserted {
                    splits_performed: 1,
                })
            }
        }
    }

    /// Per-cell normalized probabilities in row-major order.
    pub fn dense(&self) -> Result<Vec<f64>> {
        self.dense_capped(DEFAULT_DENSE_CAP)
    }

    pub fn dense_capped(&self, cap: usize) -> Result<Vec<f64>> {
        let cells = self.space.total_cells();
        if cells > cap {
            return Err(Error::SpaceTooLarge { cells, cap });
        }
        if self.entries.is_empty() {
            return Err(Error::EmptyTree);
        }
        let z = self.total_mass();
        let mut dense = vec![0.0; cells];
        for entry in &self.entries {
            let p = entry.density / z;
            for cell in entry.region.cells() {
                dense[self.space.cell_index(&cell)?] = p;
            }
        }
        Ok(dense)
    }

    /// The density of the entry containing a cell; the oracle's analogue of
    /// a point lookup, by linear scan.
    pub fn density_at(&self, p: &Point) -> Result<f64> {
        self.space.validate_point(p)?;
        if self.entries.is_empty() {
            return Err(Error::EmptyTree);
        }
        Ok(self
            .entries
            .iter()
            .find(|e| e.region.contains(p))
            .expect("entries partition the space")
            .density)
    }
}

/// Checks that an array is a probability distribution: finite non-negative
/// entries summing to 1 within 1e-9.
pub fn validate_distribution(dense: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for &p in dense {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::UnnormalizedInput { sum: p });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::UnnormalizedInput { sum });
    }
    Ok(())
}

/// Inverse-CDF sampling by linear scan: the dense-table baseline. Returns
/// the flat index of the drawn cell.
pub fn cdf_sample<R: Rng + ?Sized>(dense: &[f64], rng: &mut R) -> Result<usize> {
    validate_distribution(dense)?;
    Ok(cdf_sample_unchecked(dense, rng).0)
}

/// Like [`cdf_sample`] but also reports how many cells the scan visited —
/// the instrumented counter behind the O(n) baseline claim.
pub fn cdf_sample_with_visits<R: Rng + ?Sized>(
    dense: &[f64],
    rng: &mut R,
) -> Result<(usize, usize)> {
    validate_distribution(dense)?;
    Ok(cdf_sample_unchecked(dense, rng))
}

/// Scan without revalidating; callers guarantee `dense` is a distribution.
/// Returns (cell index, cells visited).
pub fn cdf_sample_unchecked<R: Rng + ?Sized>(dense: &[f64], rng: &mut R) -> (usize, usize) {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    let mut visits = 0;
    let mut last_positive = 0;
    for (i, &p) in dense.iter().enumerate() {
        visits += 1;
        if p > 0.0 {
            last_positive = i;
        }
        cum += p;
        if u < cum {
            return (i, visits);
        }
    }
    // u landed past the accumulated sum through rounding
    (last_positive, visits)
}

/// Total variation distance: half the L1 distance between two distributions.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

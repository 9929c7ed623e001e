//! Read-side operations over a built tree: normalized point probability,
//! region reports, mass-proportional sampling, max-probability retrieval,
//! and dense-table export.
//!
//! Point probability is per-cell: density of the containing leaf divided by
//! the root mass, so probabilities over all cells sum to 1. The normalized
//! mass of a whole region is exposed separately through [`RegionReport`].

use rand::Rng;

use crate::error::{Error, Result};
use crate::space::{Point, Region};
use crate::tree::{NodeKind, Tree};

/// Cap on dense exports; larger spaces are exactly what the tree exists to
/// avoid materializing.
pub const DEFAULT_DENSE_CAP: usize = 1 << 24;

/// One leaf region with its density, mass, and share of the total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub region: Region,
    pub density: f64,
    /// density × volume.
    pub mass: f64,
    /// mass / Z.
    pub normalized_mass: f64,
}

impl Tree {
    /// Normalized per-cell probability of `p`: density of the unique leaf
    /// containing it, divided by Z. O(depth).
    pub fn prob(&self, p: &Point) -> Result<f64> {
        self.prob_with_visits(p).map(|(prob, _)| prob)
    }

    /// [`prob`](Self::prob) plus the number of nodes the descent visited
    /// (at most depth + 1).
    pub fn prob_with_visits(&self, p: &Point) -> Result<(f64, usize)> {
        self.space().validate_point(p)?;
        let Some(root) = self.root_id() else {
            return Err(Error::EmptyTree);
        };
        let z = self.total_mass();
        let mut id = root;
        let mut visits = 1;
        loop {
            match &self.node(id).kind {
                NodeKind::Internal {
                    dim,
                    split,
                    low,
                    high,
                } => {
                    id = if p.coords()[*dim] < *split {
                        *low
                    } else {
                        *high
                    };
                    visits += 1;
                }
                NodeKind::Leaf { density, .. } => return Ok((density / z, visits)),
            }
        }
    }

    /// The leaf region containing `p`, with density, mass, and normalized
    /// mass.
    pub fn region_of(&self, p: &Point) -> Result<RegionReport> {
        self.space().validate_point(p)?;
        let Some(root) = self.root_id() else {
            return Err(Error::EmptyTree);
        };
        let z = self.total_mass();
        let mut id = root;
        let mut region = self.space().full_region();
        loop {
            match &self.node(id).kind {
                NodeKind::Internal {
                    dim,
                    split,
                    low,
                    high,
                } => {
                    let low_side = p.coords()[*dim] < *split;
                    region.narrow(*dim, *split, low_side);
                    id = if low_side { *low } else { *high };
                }
                NodeKind::Leaf { density, .. } => {
                    let mass = self.node(id).mass;
                    return Ok(RegionReport {
                        region,
                        density: *density,
                        mass,
                        normalized_mass: mass / z,
                    });
                }
            }
        }
    }

    /// Draws one cell with probability proportional to its leaf's density:
    /// descends by mass ratio, then picks a cell uniformly inside the leaf
    /// region. Consumes one uniform real per internal node and one uniform
    /// integer per dimension. O(depth).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Point> {
        self.sample_with_visits(rng).map(|(p, _)| p)
    }

    /// [`sample`](Self::sample) plus the node-visit count.
    pub fn sample_with_visits<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Point, usize)> {
        let Some(root) = self.root_id() else {
            return Err(Error::EmptyTree);
        };
        if self.total_mass() <= 0.0 {
            return Err(Error::ZeroMass);
        }
        let mut id = root;
        let mut region = self.space().full_region();
        let mut visits = 1;
        loop {
            match &self.node(id).kind {
                NodeKind::Internal {
                    dim,
                    split,
                    low,
                    high,
                } => {
                    let threshold = self.node(*low).mass / self.node(id).mass;
                    let u: f64 = rng.gen();
                    let low_side = u < threshold;
                    region.narrow(*dim, *split, low_side);
                    id = if low_side { *low } else { *high };
                    visits += 1;
                }
                NodeKind::Leaf { .. } => {
                    return Ok((uniform_cell(&region, rng), visits));
                }
            }
        }
    }

    /// All leaves whose density equals the tracked maximum. Served from the
    /// max list maintained during construction — no tree traversal.
    pub fn max_regions(&self) -> Result<Vec<RegionReport>> {
        if self.root_id().is_none() {
            return Err(Error::EmptyTree);
        }
        let z = self.total_mass();
        Ok(self
            .max_leaf_entries()
            .iter()
            .map(|(id, region)| {
                let mass = self.node(*id).mass;
                RegionReport {
                    region: region.clone(),
                    density: self.max_density(),
                    mass,
                    normalized_mass: mass / z,
                }
            })
            .collect())
    }

    /// Draws a cell uniformly from the union of the maximum-density regions
    /// (volume-proportional region choice, then a uniform in-region draw).
    pub fn draw_max<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Point> {
        if self.root_id().is_none() {
            return Err(Error::EmptyTree);
        }
        let entries = self.max_leaf_entries();
        let total: usize = entries.iter().map(|(_, r)| r.volume()).sum();
        let mut ticket = rng.gen_range(0..total);
        for (_, region) in entries {
            let volume = region.volume();
            if ticket < volume {
                return Ok(uniform_cell(region, rng));
            }
            ticket -= volume;
        }
        unreachable!("ticket drawn below the total volume")
    }

    /// Row-major array of all normalized cell probabilities.
    pub fn to_dense(&self) -> Result<Vec<f64>> {
        self.to_dense_capped(DEFAULT_DENSE_CAP)
    }

    pub fn to_dense_capped(&self, cap: usize) -> Result<Vec<f64>> {
        let cells = self.space().total_cells();
        if cells > cap {
            return Err(Error::SpaceTooLarge { cells, cap });
        }
        if self.root_id().is_none() {
            return Err(Error::EmptyTree);
        }
        let z = self.total_mass();
        let mut dense = vec![0.0; cells];
        for leaf in self.leaves() {
            let p = leaf.density / z;
            for cell in leaf.region.cells() {
                dense[self.space().cell_index(&cell)?] = p;
            }
        }
        Ok(dense)
    }
}

/// Uniform random cell of a region: one independent uniform integer per
/// dimension.
fn uniform_cell<R: Rng + ?Sized>(region: &Region, rng: &mut R) -> Point {
    let coords = region
        .lo()
        .iter()
        .zip(region.hi())
        .map(|(&lo, &hi)| rng.gen_range(lo..hi))
        .collect();
    Point::new(coords)
}

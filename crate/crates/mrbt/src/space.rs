//! Geometry of the discrete feature space: points, axis-aligned regions,
//! volumes, and the deterministic dimension-cycling split rule.
//!
//! Regions are half-open boxes of grid cells, so bisection partitions a
//! region exactly, with no boundary ambiguity. The split rule cycles through
//! dimensions by depth and skips dimensions whose extent has been exhausted.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The discrete k-dimensional grid a distribution lives on: one cardinality
/// (cell count) per dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceDescriptor {
    cardinalities: Vec<usize>,
    total_cells: usize,
}

impl SpaceDescriptor {
    /// Builds a space from per-dimension cardinalities.
    ///
    /// Every cardinality must be at least 1 and the total cell count must fit
    /// in the native word (checked multiplication), so a space of 32 binary
    /// variables constructs in O(1) without ever allocating its 2^32 cells.
    pub fn new(cardinalities: Vec<usize>) -> Result<Self> {
        if cardinalities.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut total_cells: usize = 1;
        for (dim, &card) in cardinalities.iter().enumerate() {
            if card == 0 {
                return Err(Error::EmptyDimension { dim });
            }
            total_cells = total_cells.checked_mul(card).ok_or(Error::SpaceOverflow)?;
        }
        Ok(Self {
            cardinalities,
            total_cells,
        })
    }

    pub fn dims(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn total_cells(&self) -> usize {
        self.total_cells
    }

    /// The region covering the whole space.
    pub fn full_region(&self) -> Region {
        Region {
            lo: vec![0; self.dims()],
            hi: self.cardinalities.clone(),
        }
    }

    /// Checks that a point has the right arity and in-range coordinates.
    pub fn validate_point(&self, p: &Point) -> Result<()> {
        if p.coords.len() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: p.coords.len(),
            });
        }
        for (dim, (&coord, &card)) in p.coords.iter().zip(&self.cardinalities).enumerate() {
            if coord >= card {
                return Err(Error::InvalidPoint {
                    dim,
                    coord,
                    lo: 0,
                    hi: card,
                    line: None,
                });
            }
        }
        Ok(())
    }

    /// Row-major flat index of a cell, dimension 0 slowest.
    pub fn cell_index(&self, p: &Point) -> Result<usize> {
        self.validate_point(p)?;
        let mut index = 0;
        for (&coord, &card) in p.coords.iter().zip(&self.cardinalities) {
            index = index * card + coord;
        }
        Ok(index)
    }

    /// Inverse of [`cell_index`](Self::cell_index).
    pub fn index_cell(&self, index: usize) -> Result<Point> {
        if index >= self.total_cells {
            return Err(Error::IndexOutOfRange {
                index,
                total_cells: self.total_cells,
            });
        }
        let mut coords = vec![0; self.dims()];
        let mut rest = index;
        for dim in (0..self.dims()).rev() {
            let card = self.cardinalities[dim];
            coords[dim] = rest % card;
            rest /= card;
        }
        Ok(Point::new(coords))
    }

    /// Maximum possible tree depth: the sum over dimensions of
    /// ceil(log2(cardinality)). No chain of bisections can go deeper.
    pub fn max_depth(&self) -> usize {
        self.cardinalities
            .iter()
            .map(|&c| (usize::BITS - (c - 1).leading_zeros()) as usize)
            .sum()
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, card) in self.cardinalities.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{card}")?;
        }
        Ok(())
    }
}

impl FromStr for SpaceDescriptor {
    type Err = Error;

    /// Parses the textual form used by the CLI and file headers: comma
    /// separated cardinalities, e.g. `"4,4"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut cards = Vec::new();
        for (i, field) in s.split(',').enumerate() {
            let card = field.trim().parse::<usize>().map_err(|e| Error::Parse {
                line: 1,
                column: i + 1,
                detail: format!("bad cardinality {:?}: {e}", field.trim()),
            })?;
            cards.push(card);
        }
        Self::new(cards)
    }
}

/// A grid cell: one coordinate per dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point {
    coords: Vec<usize>,
}

impl Point {
    pub fn new(coords: Vec<usize>) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Point {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut coords = Vec::new();
        for (i, field) in s.split(',').enumerate() {
            let c = field.trim().parse::<usize>().map_err(|e| Error::Parse {
                line: 1,
                column: i + 1,
                detail: format!("bad coordinate {:?}: {e}", field.trim()),
            })?;
            coords.push(c);
        }
        Ok(Self::new(coords))
    }
}

/// An axis-aligned half-open box of cells: `lo[i] <= x[i] < hi[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    lo: Vec<usize>,
    hi: Vec<usize>,
}

impl Region {
    /// Builds a region validated against a space: `lo[i] < hi[i] <= card[i]`.
    pub fn new(lo: Vec<usize>, hi: Vec<usize>, space: &SpaceDescriptor) -> Result<Self> {
        if lo.len() != space.dims() || hi.len() != space.dims() {
            return Err(Error::DimensionMismatch {
                expected: space.dims(),
                found: lo.len().min(hi.len()),
            });
        }
        for dim in 0..space.dims() {
            if lo[dim] >= hi[dim] {
                return Err(Error::EmptyRegion { dim });
            }
            if hi[dim] > space.cardinalities()[dim] {
                return Err(Error::RegionOutOfBounds {
                    dim,
                    hi: hi[dim],
                    cardinality: space.cardinalities()[dim],
                });
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn dims(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[usize] {
        &self.lo
    }

    pub fn hi(&self) -> &[usize] {
        &self.hi
    }

    /// Number of cells covered: the product of the per-dimension extents.
    pub fn volume(&self) -> usize {
        self.lo.iter().zip(&self.hi).map(|(&l, &h)| h - l).product()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.coords().len() == self.dims()
            && p.coords()
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&c, (&l, &h))| l <= c && c < h)
    }

    /// The dimension the next bisection uses: scanning cyclically from
    /// `depth mod k`, the first dimension whose extent is at least 2.
    pub fn split_dimension(&self, depth: usize) -> Result<usize> {
        let k = self.dims();
        for offset in 0..k {
            let dim = (depth + offset) % k;
            if self.hi[dim] - self.lo[dim] >= 2 {
                return Ok(dim);
            }
        }
        Err(Error::NoSplittableDimension)
    }

    /// Cuts the region in two along `dim` at `lo + floor(extent / 2)`.
    ///
    /// Returns the split index and the (low, high) halves, which partition
    /// the input exactly.
    pub fn bisect(&self, dim: usize) -> Result<(usize, Region, Region)> {
        let extent = self.hi[dim] - self.lo[dim];
        if extent < 2 {
            return Err(Error::NoSplittableDimension);
        }
        let split = self.lo[dim] + extent / 2;
        let mut low = self.clone();
        low.hi[dim] = split;
        let mut high = self.clone();
        high.lo[dim] = split;
        Ok((split, low, high))
    }

    /// Shrinks the region in place to one side of a split.
    pub(crate) fn narrow(&mut self, dim: usize, split: usize, low_side: bool) {
        if low_side {
            self.hi[dim] = split;
        } else {
            self.lo[dim] = split;
        }
    }

    /// Iterates every cell of the region in row-major order.
    pub fn cells(&self) -> RegionCells<'_> {
        RegionCells {
            region: self,
            next: Some(self.lo.clone()),
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (&l, &h)) in self.lo.iter().zip(&self.hi).enumerate() {
            if i > 0 {
                write!(f, "x")?;
            }
            write!(f, "[{l},{h})")?;
        }
        Ok(())
    }
}

/// Row-major odometer over the cells of a region.
pub struct RegionCells<'a> {
    region: &'a Region,
    next: Option<Vec<usize>>,
}

impl Iterator for RegionCells<'_> {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut dim = self.region.dims();
        loop {
            if dim == 0 {
                // odometer wrapped: this was the last cell
                break;
            }
            dim -= 1;
            succ[dim] += 1;
            if succ[dim] < self.region.hi[dim] {
                self.next = Some(succ);
                break;
            }
            succ[dim] = self.region.lo[dim];
        }
        Some(Point::new(current))
    }
}

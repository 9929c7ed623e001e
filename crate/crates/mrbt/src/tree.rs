//! The multi-resolution binary tree itself: incremental insertion of
//! weighted points with recursive conflict splitting, mass maintenance up to
//! the root normalization constant, budget-bounded anytime construction, and
//! max-density leaf tracking.
//!
//! Every insertion prefix leaves a valid, queryable tree. The root's mass is
//! the live normalization constant Z; it is never normalized during
//! learning, so inserts only touch masses along one root-to-leaf path.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::space::{Point, Region, SpaceDescriptor};

/// A drawn grid cell carrying its strictly positive, finite, unnormalized
/// weight. Construction validates the weight, so a `WeightedPoint` is always
/// insertable weight-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoint {
    point: Point,
    weight: f64,
}

impl WeightedPoint {
    pub fn new(point: Point, weight: f64) -> Result<Self> {
        if !weight.is_finite() {
            return Err(Error::NonFiniteWeight { weight });
        }
        if weight <= 0.0 {
            return Err(Error::NonPositiveWeight { weight, line: None });
        }
        Ok(Self { point, weight })
    }

    pub fn point(&self) -> &Point {
        &self.point
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// Construction limits. A tree built under a budget is anytime-safe: inserts
/// refused by the budget leave the tree bit-identical, so any prefix of a
/// point stream yields a valid approximation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    /// Hard cap on node count; an insert that would overshoot it is refused.
    pub max_nodes: Option<usize>,
    /// Cap on accepted (non-duplicate) points.
    pub max_points: Option<usize>,
    /// Wall-clock cutoff checked before each insert.
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self::default()
    }
}

/// What one call to [`Tree::insert`] did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    Inserted {
        splits_performed: usize,
    },
    /// The point already represents a leaf; the new weight is discarded.
    DuplicateIgnored,
    /// A budget limit blocked the insert; the tree was not touched.
    BudgetExhausted,
}

pub(crate) type NodeId = usize;

#[derive(Debug, Clone)]
pub(crate) enum NodeKind {
    Leaf {
        density: f64,
        representative: Option<Point>,
    },
    Internal {
        dim: usize,
        split: usize,
        low: NodeId,
        high: NodeId,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct NodeData {
    pub(crate) kind: NodeKind,
    pub(crate) mass: f64,
}

/// Read-only view of one leaf, for inspection and verification.
#[derive(Debug, Clone)]
pub struct Leaf {
    pub region: Region,
    pub density: f64,
    pub mass: f64,
    pub representative: Option<Point>,
    pub depth: usize,
}

/// Per-node size estimate used by [`StatsReport::tree_bytes`]: a node stores
/// its mass (8 bytes) plus either two child ids with the split (internal) or
/// a density with an optional representative pointer (leaf); 48 bytes covers
/// the variant payload and discriminant on a 64-bit target.
pub const NODE_BYTE_ESTIMATE: u128 = 48;

/// Size and shape report, with the dense-table comparison computed
/// arithmetically — the dense table itself is never allocated.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub node_count: usize,
    pub leaf_count: usize,
    pub depth: usize,
    pub inserted_points: usize,
    /// The normalization constant Z (root mass), 0 for an empty tree.
    pub total_mass: f64,
    pub max_density: f64,
    /// node_count × [`NODE_BYTE_ESTIMATE`].
    pub tree_bytes: u128,
    /// total_cells × 8: what a dense probability table over the same space
    /// would occupy.
    pub dense_table_bytes: u128,
    pub total_cells: usize,
}

/// The multi-resolution binary tree over a discrete feature space.
///
/// Leaves partition the space into constant-density regions; each leaf holds
/// the unnormalized per-cell density of its region and, usually, the drawn
/// point that characterizes it. Internal nodes carry the sum of their
/// children's masses, so the root mass is the normalization constant.
///
/// Single writer: `insert` and `rebuild_masses` need exclusive access; all
/// read-side operations may run concurrently when no writer is active.
#[derive(Debug, Clone)]
pub struct Tree {
    space: SpaceDescriptor,
    nodes: Vec<NodeData>,
    root: Option<NodeId>,
    inserted_points: usize,
    depth: usize,
    max_density: f64,
    max_leaves: Vec<(NodeId, Region)>,
    budget: Budget,
}

/// One planned bisection of the target leaf's region. For a non-final step
/// both the old representative and the new point fall on the same side and
/// the other side becomes an inherited-density leaf; the final step puts
/// them (or, for a representative-less leaf, the point and the leftover
/// density) on opposite sides.
struct SplitStep {
    dim: usize,
    point_low: bool,
    last: bool,
}

enum Plan {
    NewRoot,
    Duplicate,
    Overwrite {
        leaf: NodeId,
        path: Vec<NodeId>,
        region: Region,
    },
    Split {
        leaf: NodeId,
        path: Vec<NodeId>,
        region: Region,
        leaf_depth: usize,
        steps: Vec<SplitStep>,
    },
}

impl Tree {
    /// An empty tree: no root, zero counters, Z = 0. O(1) regardless of the
    /// space's cell count.
    pub fn new(space: SpaceDescriptor, budget: Budget) -> Self {
        Self {
            space,
            nodes: Vec::new(),
            root: None,
            inserted_points: 0,
            depth: 0,
            max_density: 0.0,
            max_leaves: Vec::new(),
            budget,
        }
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// In a full binary tree, leaves = (nodes + 1) / 2.
    pub fn leaf_count(&self) -> usize {
        if self.root.is_some() {
            self.nodes.len().div_ceil(2)
        } else {
            0
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn inserted_points(&self) -> usize {
        self.inserted_points
    }

    /// The normalization constant Z: the root's mass, i.e. the sum over all
    /// leaves of density × volume. Zero for an empty tree.
    pub fn total_mass(&self) -> f64 {
        match self.root {
            Some(id) => self.nodes[id].mass,
            None => 0.0,
        }
    }

    pub fn max_density(&self) -> f64 {
        self.max_density
    }

    pub(crate) fn node(&self, id: NodeId) -> &NodeData {
        &self.nodes[id]
    }

    pub(crate) fn root_id(&self) -> Option<NodeId> {
        self.root
    }

    pub(crate) fn max_leaf_entries(&self) -> &[(NodeId, Region)] {
        &self.max_leaves
    }

    pub(crate) fn from_parts(
        space: SpaceDescriptor,
        nodes: Vec<NodeData>,
        root: Option<NodeId>,
    ) -> Self {
        let mut tree = Self {
            space,
            nodes,
            root,
            inserted_points: 0,
            depth: 0,
            max_density: 0.0,
            max_leaves: Vec::new(),
            budget: Budget::unlimited(),
        };
        tree.rebuild_masses();
        tree
    }

    /// Inserts a weighted point, refining the partition until the point is
    /// separated from the representative it conflicts with.
    ///
    /// Outcomes, in order of precedence: a budget limit refuses the insert
    /// (tree untouched); a point equal to a leaf's representative is ignored
    /// (tree untouched); otherwise the point lands in its own leaf — by
    /// becoming the root, by overwriting an exhausted inherited-density
    /// cell, or through a chain of bisections in which every empty sibling
    /// inherits the old density without a representative.
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

        let plan = self.plan(wp.point())?;
        let new_nodes = match &plan {
            Plan::NewRoot => 1,
            Plan::Duplicate | Plan::Overwrite { .. } => 0,
            Plan::Split { steps, .. } => 2 * steps.len(),
        };
        if let Some(max_nodes) = self.budget.max_nodes {
            if self.nodes.len() + new_nodes > max_nodes {
                return Ok(InsertOutcome::BudgetExhausted);
            }
        }

        let (point, weight) = (wp.point, wp.weight);
        match plan {
            Plan::Duplicate => Ok(InsertOutcome::DuplicateIgnored),
            Plan::NewRoot => {
                let region = self.space.full_region();
                let mass = weight * region.volume() as f64;
                self.nodes.push(NodeData {
                    kind: NodeKind::Leaf {
                        density: weight,
                        representative: Some(point),
                    },
                    mass,
                });
                self.root = Some(0);
                self.inserted_points += 1;
                self.max_density = weight;
                self.max_leaves = vec![(0, region)];
                Ok(InsertOutcome::Inserted {
                    splits_performed: 0,
                })
            }
            Plan::Overwrite { leaf, path, region } => {
                self.nodes[leaf].kind = NodeKind::Leaf {
                    density: weight,
                    representative: Some(point),
                };
                self.nodes[leaf].mass = weight; // volume is 1
                self.refresh_path(&path);
                self.inserted_points += 1;
                self.max_update_overwrite(leaf, region, weight);
                Ok(InsertOutcome::Inserted {
                    splits_performed: 0,
                })
            }
            Plan::Split {
                leaf,
                path,
                region,
                leaf_depth,
                steps,
            } => {
                let splits = steps.len();
                let (old_density, old_rep) = match &self.nodes[leaf].kind {
                    NodeKind::Leaf {
                        density,
                        representative,
                    } => (*density, representative.clone()),
                    NodeKind::Internal { .. } => unreachable!("plan targets a leaf"),
                };
                self.max_remove(leaf);

                let mut new_leaves: Vec<(NodeId, Region, f64)> = Vec::new();
                let mut chain: Vec<NodeId> = Vec::new();
                let mut cur = leaf;
                let mut cur_region = region;
                for step in &steps {
                    let (split, low_region, high_region) = cur_region.bisect(step.dim)?;
                    let low_id = self.nodes.len();
                    let high_id = low_id + 1;
                    self.nodes.push(NodeData {
                        kind: NodeKind::Leaf {
                            density: 0.0,
                            representative: None,
                        },
                        mass: 0.0,
                    });
                    self.nodes.push(NodeData {
                        kind: NodeKind::Leaf {
                            density: 0.0,
                            representative: None,
                        },
                        mass: 0.0,
                    });
                    self.nodes[cur].kind = NodeKind::Internal {
                        dim: step.dim,
                        split,
                        low: low_id,
                        high: high_id,
                    };
                    chain.push(cur);

                    let (point_id, point_region, other_id, other_region) = if step.point_low {
                        (low_id, low_region, high_id, high_region)
                    } else {
                        (high_id, high_region, low_id, low_region)
                    };
                    if step.last {
                        self.set_leaf(point_id, weight, Some(point.clone()), &point_region);
                        self.set_leaf(other_id, old_density, old_rep.clone(), &other_region);
                        new_leaves.push((point_id, point_region, weight));
                        new_leaves.push((other_id, other_region, old_density));
                    } else {
                        // the empty half inherits the old density, no point
                        self.set_leaf(other_id, old_density, None, &other_region);
                        new_leaves.push((other_id, other_region, old_density));
                        cur = point_id;
                        cur_region = point_region;
                    }
                }

                for &id in chain.iter().rev() {
                    self.refresh_node(id);
                }
                self.refresh_path(&path);
                self.depth = self.depth.max(leaf_depth + splits);
                self.inserted_points += 1;
                for (id, region, density) in new_leaves {
                    self.max_consider(id, region, density);
                }
                Ok(InsertOutcome::Inserted {
                    splits_performed: splits,
                })
            }
        }
    }

    /// Read-only descent and split probe: decides what the insert will do
    /// and how many bisections it needs, without touching the tree.
    fn plan(&self, point: &Point) -> Result<Plan> {
        let Some(root) = self.root else {
            return Ok(Plan::NewRoot);
        };
        let mut path = Vec::new();
        let mut id = root;
        let mut region = self.space.full_region();
        let mut depth = 0;
        let representative = loop {
            match &self.nodes[id].kind {
                NodeKind::Internal {
                    dim,
                    split,
                    low,
                    high,
                } => {
                    path.push(id);
                    let low_side = point.coords()[*dim] < *split;
                    id = if low_side { *low } else { *high };
                    region.narrow(*dim, *split, low_side);
                    depth += 1;
                }
                NodeKind::Leaf { representative, .. } => break representative.as_ref(),
            }
        };

        match representative {
            Some(rep) if rep == point => Ok(Plan::Duplicate),
            Some(rep) => {
                let mut steps = Vec::new();
                let mut cur = region.clone();
                let mut d = depth;
                loop {
                    let dim = cur.split_dimension(d)?;
                    let (split, low, high) = cur.bisect(dim)?;
                    let point_low = point.coords()[dim] < split;
                    let rep_low = rep.coords()[dim] < split;
                    if point_low != rep_low {
                        steps.push(SplitStep {
                            dim,
                            point_low,
                            last: true,
                        });
                        break;
                    }
                    steps.push(SplitStep {
                        dim,
                        point_low,
                        last: false,
                    });
                    cur = if point_low { low } else { high };
                    d += 1;
                }
                Ok(Plan::Split {
                    leaf: id,
                    path,
                    region,
                    leaf_depth: depth,
                    steps,
                })
            }
            None => {
                if region.volume() == 1 {
                    return Ok(Plan::Overwrite {
                        leaf: id,
                        path,
                        region,
                    });
                }
                let dim = region.split_dimension(depth)?;
                let (split, _, _) = region.bisect(dim)?;
                let steps = vec![SplitStep {
                    dim,
                    point_low: point.coords()[dim] < split,
                    last: true,
                }];
                Ok(Plan::Split {
                    leaf: id,
                    path,
                    region,
                    leaf_depth: depth,
                    steps,
                })
            }
        }
    }

    fn set_leaf(
        &mut self,
        id: NodeId,
        density: f64,
        representative: Option<Point>,
        region: &Region,
    ) {
        self.nodes[id].kind = NodeKind::Leaf {
            density,
            representative,
        };
        self.nodes[id].mass = density * region.volume() as f64;
    }

    /// Recomputes an internal node's mass from its children.
    fn refresh_node(&mut self, id: NodeId) {
        if let NodeKind::Internal { low, high, .. } = self.nodes[id].kind {
            self.nodes[id].mass = self.nodes[low].mass + self.nodes[high].mass;
        }
    }

    /// Recomputes masses along a root-to-leaf path, deepest first.
    fn refresh_path(&mut self, path: &[NodeId]) {
        for &id in path.iter().rev() {
            self.refresh_node(id);
        }
    }

    fn max_remove(&mut self, id: NodeId) {
        self.max_leaves.retain(|(leaf, _)| *leaf != id);
    }

    fn max_consider(&mut self, id: NodeId, region: Region, density: f64) {
        if density > self.max_density {
            self.max_density = density;
            self.max_leaves.clear();
            self.max_leaves.push((id, region));
        } else if density == self.max_density {
            self.max_leaves.push((id, region));
        }
    }

    /// Overwriting can lower the density of the only maximal leaf, in which
    /// case the new maximum is only recoverable by a full scan.
    fn max_update_overwrite(&mut self, id: NodeId, region: Region, density: f64) {
        self.max_remove(id);
        if density >= self.max_density {
            self.max_consider(id, region, density);
        } else if self.max_leaves.is_empty() {
            self.rebuild_max();
        }
    }

    /// Full recomputation of masses, depth, and the max-density list.
    /// Bottom-up, O(nodes); used after deserialization.
    pub fn rebuild_masses(&mut self) {
        let Some(root) = self.root else {
            self.depth = 0;
            self.max_density = 0.0;
            self.max_leaves.clear();
            return;
        };
        let region = self.space.full_region();
        self.rebuild_rec(root, &region);
        self.depth = self
            .walk_leaves()
            .iter()
            .map(|(_, depth, _)| *depth)
            .max()
            .unwrap_or(0);
        self.rebuild_max();
    }

    fn rebuild_rec(&mut self, id: NodeId, region: &Region) -> f64 {
        match self.nodes[id].kind.clone() {
            NodeKind::Leaf { density, .. } => {
                let mass = density * region.volume() as f64;
                self.nodes[id].mass = mass;
                mass
            }
            NodeKind::Internal { dim, low, high, .. } => {
                let (_, low_region, high_region) = region
                    .bisect(dim)
                    .expect("internal node splits a splittable region");
                let mass =
                    self.rebuild_rec(low, &low_region) + self.rebuild_rec(high, &high_region);
                self.nodes[id].mass = mass;
                mass
            }
        }
    }

    fn rebuild_max(&mut self) {
        self.max_density = 0.0;
        self.max_leaves.clear();
        let leaves: Vec<(NodeId, usize, Region)> = self.walk_leaves();
        for (id, _, region) in leaves {
            let density = match &self.nodes[id].kind {
                NodeKind::Leaf { density, .. } => *density,
                NodeKind::Internal { .. } => continue,
            };
            if density > self.max_density {
                self.max_density = density;
                self.max_leaves.clear();
                self.max_leaves.push((id, region));
            } else if density == self.max_density {
                self.max_leaves.push((id, region));
            }
        }
    }

    /// (id, depth, region) of every leaf, preorder.
    fn walk_leaves(&self) -> Vec<(NodeId, usize, Region)> {
        let mut out = Vec::new();
        let Some(root) = self.root else {
            return out;
        };
        let mut stack = vec![(root, 0usize, self.space.full_region())];
        while let Some((id, depth, region)) = stack.pop() {
            match &self.nodes[id].kind {
                NodeKind::Leaf { .. } => out.push((id, depth, region)),
                NodeKind::Internal { dim, low, high, .. } => {
                    let (_, low_region, high_region) = region
                        .bisect(*dim)
                        .expect("internal node splits a splittable region");
                    stack.push((*high, depth + 1, high_region));
                    stack.push((*low, depth + 1, low_region));
                }
            }
        }
        out
    }

    /// Read-only views of all leaves, for inspection and tests.
    pub fn leaves(&self) -> Vec<Leaf> {
        self.walk_leaves()
            .into_iter()
            .map(|(id, depth, region)| {
                let (density, representative) = match &self.nodes[id].kind {
                    NodeKind::Leaf {
                        density,
                        representative,
                    } => (*density, representative.clone()),
                    NodeKind::Internal { .. } => unreachable!(),
                };
                Leaf {
                    mass: self.nodes[id].mass,
                    region,
                    density,
                    representative,
                    depth,
                }
            })
            .collect()
    }

    pub fn stats(&self) -> StatsReport {
        StatsReport {
            node_count: self.node_count(),
            leaf_count: self.leaf_count(),
            depth: self.depth,
            inserted_points: self.inserted_points,
            total_mass: self.total_mass(),
            max_density: self.max_density,
            tree_bytes: self.node_count() as u128 * NODE_BYTE_ESTIMATE,
            dense_table_bytes: self.space.total_cells() as u128 * 8,
            total_cells: self.space.total_cells(),
        }
    }
}

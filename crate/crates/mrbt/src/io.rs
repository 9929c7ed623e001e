//! Bit-exact external formats: the versioned tree document, CSV point
//! streams, and dense-table files.
//!
//! The tree document is JSON with a fixed key order and shortest
//! round-trip number formatting, so identical trees produce identical
//! bytes. Masses are not serialized; they are recomputed on load, which
//! removes internal inconsistency as a failure mode.
//!
//! All functions here are pure over buffers; file handling belongs to
//! callers. Reads tolerate `\r\n`; writes emit `\n`.

use serde::{Deserialize, Serialize};

use crate::drawers::DrawnStream;
use crate::error::{Error, Result};
use crate::space::{Point, Region, SpaceDescriptor};
use crate::tree::{NodeData, NodeKind, Tree, WeightedPoint};

/// Version tag of the tree document schema.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TreeDocument {
    version: u32,
    space: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    root: Option<NodeRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum NodeRecord {
    Internal {
        dim: usize,
        split: usize,
        low: Box<NodeRecord>,
        high: Box<NodeRecord>,
    },
    Leaf {
        density: f64,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        rep: Option<Vec<usize>>,
    },
}

/// Canonical text form of a tree: one JSON document plus a trailing
/// newline. Identical trees serialize to identical bytes.
pub fn serialize_tree(tree: &Tree) -> String {
    let doc = TreeDocument {
        version: FORMAT_VERSION,
        space: tree.space().cardinalities().to_vec(),
        root: tree.root_id().map(|id| record_of(tree, id)),
    };
    let mut text = serde_json::to_string(&doc).expect("tree document serializes");
    text.push('\n');
    text
}

fn record_of(tree: &Tree, id: usize) -> NodeRecord {
    match &tree.node(id).kind {
        NodeKind::Internal {
            dim,
            split,
            low,
            high,
        } => NodeRecord::Internal {
            dim: *dim,
            split: *split,
            low: Box::new(record_of(tree, *low)),
            high: Box::new(record_of(tree, *high)),
        },
        NodeKind::Leaf {
            density,
            representative,
        } => NodeRecord::Leaf {
            density: *density,
            rep: representative.as_ref().map(|p| p.coords().to_vec()),
        },
    }
}

/// Parses and validates a tree document, returning a fully rebuilt tree
/// (masses and the max-density list are recomputed from the structure).
pub fn deserialize_tree(text: &str) -> Result<Tree> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Schema {
        path: "(document)".into(),
        detail: e.to_string(),
    })?;
    let version = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Schema {
            path: "version".into(),
            detail: "missing or non-integer".into(),
        })?;
    if version != u64::from(FORMAT_VERSION) {
        return Err(Error::VersionMismatch {
            found: version as u32,
            supported: FORMAT_VERSION,
        });
    }
    let doc: TreeDocument = serde_json::from_value(value).map_err(|e| Error::Schema {
        path: "(document)".into(),
        detail: e.to_string(),
    })?;

    let space = SpaceDescriptor::new(doc.space).map_err(|e| Error::Schema {
        path: "space".into(),
        detail: e.to_string(),
    })?;

    let mut nodes: Vec<NodeData> = Vec::new();
    let root = match &doc.root {
        None => None,
        Some(record) => {
            let region = space.full_region();
            Some(load_record(record, &space, &region, "root", &mut nodes)?)
        }
    };
    Ok(Tree::from_parts(space, nodes, root))
}

fn load_record(
    record: &NodeRecord,
    space: &SpaceDescriptor,
    region: &Region,
    path: &str,
    nodes: &mut Vec<NodeData>,
) -> Result<usize> {
    match record {
        NodeRecord::Leaf { density, rep } => {
            if !density.is_finite() || *density < 0.0 {
                return Err(Error::Schema {
                    path: format!("{path}.density"),
                    detail: format!("density {density} must be finite and non-negative"),
                });
            }
            let representative = match rep {
                None => None,
                Some(coords) => {
                    if coords.len() != space.dims() {
                        return Err(Error::Schema {
                            path: format!("{path}.rep"),
                            detail: format!(
                                "expected {} coordinates, found {}",
                                space.dims(),
                                coords.len()
                            ),
                        });
                    }
                    let point = Point::new(coords.clone());
                    for (dim, &coord) in coords.iter().enumerate() {
                        if coord < region.lo()[dim] || coord >= region.hi()[dim] {
                            return Err(Error::InvalidPoint {
                                dim,
                                coord,
                                lo: region.lo()[dim],
                                hi: region.hi()[dim],
                                line: None,
                            });
                        }
                    }
                    Some(point)
                }
            };
            nodes.push(NodeData {
                kind: NodeKind::Leaf {
                    density: *density,
                    representative,
                },
                mass: 0.0,
            });
            Ok(nodes.len() - 1)
        }
        NodeRecord::Internal {
            dim,
            split,
            low,
            high,
        } => {
            if *dim >= space.dims() {
                return Err(Error::Schema {
                    path: format!("{path}.dim"),
                    detail: format!("dimension {dim} out of range for {} dims", space.dims()),
                });
            }
            if *split <= region.lo()[*dim] || *split >= region.hi()[*dim] {
                return Err(Error::Schema {
                    path: format!("{path}.split"),
                    detail: format!(
                        "split {split} does not cut [{}, {}) in dimension {dim}",
                        region.lo()[*dim],
                        region.hi()[*dim]
                    ),
                });
            }
            let id = nodes.len();
            nodes.push(NodeData {
                kind: NodeKind::Leaf {
                    density: 0.0,
                    representative: None,
                },
                mass: 0.0,
            });
            let mut low_region = region.clone();
            low_region.narrow(*dim, *split, true);
            let mut high_region = region.clone();
            high_region.narrow(*dim, *split, false);
            let low_id = load_record(low, space, &low_region, &format!("{path}.low"), nodes)?;
            let high_id = load_record(high, space, &high_region, &format!("{path}.high"), nodes)?;
            nodes[id].kind = NodeKind::Internal {
                dim: *dim,
                split: *split,
                low: low_id,
                high: high_id,
            };
            Ok(id)
        }
    }
}

/// Parses CSV rows of `k` coordinates followed by a weight. Lines starting
/// with `#` (after leading whitespace) and blank lines are skipped.
pub fn parse_points_csv(text: &str, space: &SpaceDescriptor) -> Result<DrawnStream> {
    let expected = space.dims() + 1;
    let mut stream = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected {
            return Err(Error::ArityMismatch {
                line: line_no,
                expected,
                found: fields.len(),
            });
        }
        let mut coords = Vec::with_capacity(space.dims());
        for (col, field) in fields[..space.dims()].iter().enumerate() {
            let coord = field.trim().parse::<usize>().map_err(|e| Error::Parse {
                line: line_no,
                column: col + 1,
                detail: format!("bad coordinate {:?}: {e}", field.trim()),
            })?;
            coords.push(coord);
        }
        let weight_field = fields[space.dims()].trim();
        let weight = weight_field.parse::<f64>().map_err(|e| Error::Parse {
            line: line_no,
            column: expected,
            detail: format!("bad weight {weight_field:?}: {e}"),
        })?;
        let point = Point::new(coords);
        space
            .validate_point(&point)
            .map_err(|e| at_line(e, line_no))?;
        stream.push(WeightedPoint::new(point, weight).map_err(|e| at_line(e, line_no))?);
    }
    Ok(stream)
}

/// Attaches a CSV line number to the errors that support one.
fn at_line(err: Error, line: usize) -> Error {
    match err {
        Error::InvalidPoint {
            dim, coord, lo, hi, ..
        } => Error::InvalidPoint {
            dim,
            coord,
            lo,
            hi,
            line: Some(line),
        },
        Error::NonPositiveWeight { weight, .. } => Error::NonPositiveWeight {
            weight,
            line: Some(line),
        },
        other => other,
    }
}

/// Writes a dense table: a `# space:` header, then one
/// `cell_coords,probability` row per cell in row-major order, probabilities
/// as 17-significant-digit decimals (exact round trip).
pub fn write_dense(space: &SpaceDescriptor, dense: &[f64]) -> String {
    let mut out = format!("# space: {space}\n");
    for (cell, &p) in space.full_region().cells().zip(dense) {
        out.push_str(&format!("{cell},{p:.16e}\n"));
    }
    out
}

/// Reads a dense table back: every cell must appear exactly once.
pub fn parse_dense_csv(text: &str, space: &SpaceDescriptor) -> Result<Vec<f64>> {
    let expected = space.dims() + 1;
    let mut dense = vec![f64::NAN; space.total_cells()];
    let mut filled = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected {
            return Err(Error::ArityMismatch {
                line: line_no,
                expected,
                found: fields.len(),
            });
        }
        let mut coords = Vec::with_capacity(space.dims());
        for (col, field) in fields[..space.dims()].iter().enumerate() {
            let coord = field.trim().parse::<usize>().map_err(|e| Error::Parse {
                line: line_no,
                column: col + 1,
                detail: format!("bad coordinate {:?}: {e}", field.trim()),
            })?;
            coords.push(coord);
        }
        let p_field = fields[space.dims()].trim();
        let p = p_field.parse::<f64>().map_err(|e| Error::Parse {
            line: line_no,
            column: expected,
            detail: format!("bad probability {p_field:?}: {e}"),
        })?;
        let point = Point::new(coords);
        space
            .validate_point(&point)
            .map_err(|e| at_line(e, line_no))?;
        let cell = space.cell_index(&point)?;
        if !dense[cell].is_nan() {
            return Err(Error::Parse {
                line: line_no,
                column: 1,
                detail: format!("cell {point} appears twice"),
            });
        }
        dense[cell] = p;
        filled += 1;
    }
    if filled != space.total_cells() {
        return Err(Error::Parse {
            line: 0,
            column: 0,
            detail: format!("table covers {filled} of {} cells", space.total_cells()),
        });
    }
    Ok(dense)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{Budget, InsertOutcome};

    fn space(s: &str) -> SpaceDescriptor {
        s.parse().unwrap()
    }

    fn wp(coords: &[usize], w: f64) -> WeightedPoint {
        WeightedPoint::new(Point::new(coords.to_vec()), w).unwrap()
    }

    fn scenario_tree() -> Tree {
        let mut tree = Tree::new(space("4,4"), Budget::unlimited());
        tree.insert(wp(&[0, 0], 0.5)).unwrap();
        tree.insert(wp(&[3, 3], 1.0)).unwrap();
        tree.insert(wp(&[2, 0], 2.0)).unwrap();
        tree.insert(wp(&[3, 2], 0.8)).unwrap();
        tree
    }

    #[test]
    fn round_trip_preserves_everything() {
        let tree = scenario_tree();
        let text = serialize_tree(&tree);
        let loaded = deserialize_tree(&text).unwrap();
        assert_eq!(loaded.total_mass(), tree.total_mass());
        assert!((loaded.total_mass() - 15.8).abs() < 1e-12);
        assert_eq!(loaded.node_count(), tree.node_count());
        assert_eq!(loaded.depth(), tree.depth());
        assert_eq!(loaded.max_density(), tree.max_density());
        // structure, densities, and representatives survive
        let a = tree.leaves();
        let b = loaded.leaves();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.region, y.region);
            assert_eq!(x.density, y.density);
            assert_eq!(x.representative, y.representative);
        }
    }

    #[test]
    fn serialization_is_byte_idempotent() {
        let tree = scenario_tree();
        let once = serialize_tree(&tree);
        let twice = serialize_tree(&deserialize_tree(&once).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn empty_tree_document() {
        let tree = Tree::new(space("4,4"), Budget::unlimited());
        let text = serialize_tree(&tree);
        assert_eq!(text, "{\"version\":1,\"space\":[4,4]}\n");
        let loaded = deserialize_tree(&text).unwrap();
        assert!(loaded.is_empty());
        assert_eq!(serialize_tree(&loaded), text);
    }

    #[test]
    fn version_and_schema_errors() {
        assert!(matches!(
            deserialize_tree("{\"version\":2,\"space\":[4,4]}"),
            Err(Error::VersionMismatch {
                found: 2,
                supported: 1
            })
        ));
        assert!(matches!(
            deserialize_tree("not json"),
            Err(Error::Schema { .. })
        ));
        // split outside the region it cuts
        let bad_split = "{\"version\":1,\"space\":[4],\"root\":{\"kind\":\"internal\",\
             \"dim\":0,\"split\":9,\"low\":{\"kind\":\"leaf\",\"density\":1.0},\
             \"high\":{\"kind\":\"leaf\",\"density\":1.0}}}";
        match deserialize_tree(bad_split) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "root.split"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn tampered_representative_is_invalid() {
        // representative (0,0) placed in the high half [2,4)x[0,4)
        let text = "{\"version\":1,\"space\":[4,4],\"root\":{\"kind\":\"internal\",\
             \"dim\":0,\"split\":2,\
             \"low\":{\"kind\":\"leaf\",\"density\":0.5,\"rep\":[0,0]},\
             \"high\":{\"kind\":\"leaf\",\"density\":1.0,\"rep\":[0,0]}}}";
        assert!(matches!(
            deserialize_tree(text),
            Err(Error::InvalidPoint {
                dim: 0,
                coord: 0,
                ..
            })
        ));
    }

    #[test]
    fn loaded_tree_keeps_insert_semantics() {
        let tree = scenario_tree();
        let mut loaded = deserialize_tree(&serialize_tree(&tree)).unwrap();
        assert_eq!(
            loaded.insert(wp(&[3, 3], 7.0)).unwrap(),
            InsertOutcome::DuplicateIgnored
        );
    }

    #[test]
    fn points_csv_parsing() {
        let s = space("4,4");
        let stream = parse_points_csv("# header\n0,0,0.5", &s).unwrap();
        assert_eq!(stream.len(), 1);

        assert!(matches!(
            parse_points_csv("0,0", &s),
            Err(Error::ArityMismatch {
                line: 1,
                expected: 3,
                found: 2
            })
        ));
        assert!(matches!(
            parse_points_csv("0,0,0.5\nx,0,1", &s),
            Err(Error::Parse {
                line: 2,
                column: 1,
                ..
            })
        ));
        assert!(matches!(
            parse_points_csv("4,0,1.0", &s),
            Err(Error::InvalidPoint { line: Some(1), .. })
        ));
        assert!(matches!(
            parse_points_csv("0,0,-1", &s),
            Err(Error::NonPositiveWeight { line: Some(1), .. })
        ));
        // blank lines and CRLF are tolerated
        let stream = parse_points_csv("\r\n0,0,0.5\r\n\r\n3,3,1.0\r\n", &s).unwrap();
        assert_eq!(stream.len(), 2);
    }

    #[test]
    fn dense_write_and_read_back() {
        let tree = scenario_tree();
        let dense = tree.to_dense().unwrap();
        let text = write_dense(tree.space(), &dense);
        assert_eq!(text.lines().count(), 17); // header + 16 rows
        let sum: f64 = dense.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        let back = parse_dense_csv(&text, tree.space()).unwrap();
        assert_eq!(back, dense); // 17 significant digits round-trip exactly

        let missing = "# space: 4,4\n0,0,1.0\n";
        assert!(matches!(
            parse_dense_csv(missing, tree.space()),
            Err(Error::Parse { .. })
        ));
    }
}

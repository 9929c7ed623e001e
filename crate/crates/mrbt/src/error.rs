use std::fmt;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A space dimension was declared with zero cells.
    EmptyDimension { dim: usize },
    /// The product of cardinalities does not fit in the native word.
    SpaceOverflow,
    /// A coordinate vector has the wrong number of dimensions.
    DimensionMismatch { expected: usize, found: usize },
    /// A point lies outside the space (or outside a leaf region on load).
    /// `line` is set when the point came from a CSV row.
    InvalidPoint {
        dim: usize,
        coord: usize,
        lo: usize,
        hi: usize,
        line: Option<usize>,
    },
    /// A flat cell index is out of range.
    IndexOutOfRange { index: usize, total_cells: usize },
    /// Region bounds with lo >= hi.
    EmptyRegion { dim: usize },
    /// Region bounds extend past the space.
    RegionOutOfBounds {
        dim: usize,
        hi: usize,
        cardinality: usize,
    },
    /// Every dimension of the region has extent 1; nothing to bisect.
    NoSplittableDimension,
    /// A weight was zero or negative. `line` is set for CSV input.
    NonPositiveWeight { weight: f64, line: Option<usize> },
    /// A weight was NaN or infinite.
    NonFiniteWeight { weight: f64 },
    /// The operation needs at least one inserted point.
    EmptyTree,
    /// The tree's total mass is zero; nothing can be drawn.
    ZeroMass,
    /// The space has more cells than the dense-table cap allows.
    SpaceTooLarge { cells: usize, cap: usize },
    /// A dense array does not sum to 1 (or contains invalid entries).
    UnnormalizedInput { sum: f64 },
    /// A CSV field could not be parsed. `column` is the 1-based field index.
    Parse {
        line: usize,
        column: usize,
        detail: String,
    },
    /// A CSV row has the wrong number of fields.
    ArityMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    /// A serialized tree document has an unsupported version.
    VersionMismatch { found: u32, supported: u32 },
    /// A serialized tree document is malformed; `path` locates the offence.
    Schema { path: String, detail: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyDimension { dim } => {
                write!(f, "dimension {dim} has zero cells")
            }
            Self::SpaceOverflow => {
                write!(f, "total cell count overflows the native word size")
            }
            Self::DimensionMismatch { expected, found } => {
                write!(f, "expected {expected} coordinates, found {found}")
            }
            Self::InvalidPoint {
                dim,
                coord,
                lo,
                hi,
                line,
            } => {
                write!(
                    f,
                    "invalid point: coordinate {coord} in dimension {dim} is outside [{lo}, {hi})"
                )?;
                if let Some(line) = line {
                    write!(f, " (line {line})")?;
                }
                Ok(())
            }
            Self::IndexOutOfRange { index, total_cells } => {
                write!(f, "cell index {index} out of range for {total_cells} cells")
            }
            Self::EmptyRegion { dim } => {
                write!(f, "region is empty along dimension {dim}")
            }
            Self::RegionOutOfBounds {
                dim,
                hi,
                cardinality,
            } => {
                write!(
                    f,
                    "region bound {hi} in dimension {dim} exceeds cardinality {cardinality}"
                )
            }
            Self::NoSplittableDimension => {
                write!(f, "region is a single cell; no dimension can be split")
            }
            Self::NonPositiveWeight { weight, line } => {
                write!(f, "weight {weight} must be strictly positive")?;
                if let Some(line) = line {
                    write!(f, " (line {line})")?;
                }
                Ok(())
            }
            Self::NonFiniteWeight { weight } => {
                write!(f, "weight {weight} must be finite")
            }
            Self::EmptyTree => write!(f, "tree has no points"),
            Self::ZeroMass => write!(f, "tree has zero total mass"),
            Self::SpaceTooLarge { cells, cap } => {
                write!(f, "space has {cells} cells, above the dense cap of {cap}")
            }
            Self::UnnormalizedInput { sum } => {
                write!(f, "dense array is not a distribution (sum = {sum})")
            }
            Self::Parse {
                line,
                column,
                detail,
            } => {
                write!(f, "parse error at line {line}, field {column}: {detail}")
            }
            Self::ArityMismatch {
                line,
                expected,
                found,
            } => {
                write!(f, "line {line}: expected {expected} fields, found {found}")
            }
            Self::VersionMismatch { found, supported } => {
                write!(
                    f,
                    "document version {found} is not supported (expected {supported})"
                )
            }
            Self::Schema { path, detail } => {
                write!(f, "invalid document at {path}: {detail}")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

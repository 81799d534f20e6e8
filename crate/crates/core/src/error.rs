use std::path::PathBuf;

use thiserror::Error;

use crate::tile::Tile;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset must have at least one row and one column, got {rows}x{cols}")]
    EmptyDataset { rows: usize, cols: usize },

    #[error("tile has an empty row or column set")]
    EmptyTile,

    #[error("ids are 1-based, found id 0")]
    ZeroId,

    #[error("{axis} id {id} is out of bounds (dimension is {bound})")]
    OutOfBounds { axis: Axis, id: usize, bound: usize },

    #[error("invalid fit options: {0}")]
    InvalidOptions(String),

    #[error("frequency {0} is not within [0, 1]")]
    InvalidFrequency(f64),

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("exact tiles disagree on entry ({row}, {col}) (tile #{tile})")]
    ConflictingExactTiles { row: usize, col: usize, tile: usize },

    #[error(
        "tile #{tile} ({rect}): frequency {alpha} is outside the attainable range [{min}, {max}] given clamped entries"
    )]
    InfeasibleTile {
        tile: usize,
        rect: Tile,
        alpha: f64,
        min: f64,
        max: f64,
    },

    #[error(
        "iterative scaling did not converge after {sweeps} sweeps (residual {residual:e} on tile #{tile}, {rect})"
    )]
    NoConvergence {
        sweeps: usize,
        residual: f64,
        tile: usize,
        rect: Tile,
    },

    #[error("tile frequencies are mutually inconsistent: {0}")]
    Inconsistent(Box<Error>),

    #[error("divergence is infinite at entry ({row}, {col})")]
    InfiniteDivergence { row: usize, col: usize },

    #[error("tile #{tile} is not exact (frequency {alpha})")]
    NotExact { tile: usize, alpha: f64 },

    #[error("surprise is infinite: model frequency {beta} is deterministic but target is {alpha}")]
    InfiniteSurprise { alpha: f64, beta: f64 },

    #[error("joint enumeration over {cells} cells exceeds the limit of {limit}")]
    SizeLimit { cells: usize, limit: usize },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Failures of the fitting or divergence machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ConflictingExactTiles { .. }
                | Error::InfeasibleTile { .. }
                | Error::NoConvergence { .. }
                | Error::Inconsistent(_)
                | Error::InfiniteDivergence { .. }
                | Error::InfiniteSurprise { .. }
        )
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Col,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Row => f.write_str("row"),
            Axis::Col => f.write_str("column"),
        }
    }
}

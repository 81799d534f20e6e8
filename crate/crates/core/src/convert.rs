//! Turning mining results into tile sets.
//!
//! Biclusters and subspace clusters are already rectangles and are read
//! directly from tile files; everything else goes through here.

use std::str::FromStr;

use crate::dataset::{check_id, BinaryDataset};
use crate::error::{Axis, Error, Result};
use crate::tile::{FreqTile, Tile, TileSet};

/// Itemsets (column-id sets), optionally with explicit supporting rows for
/// fault-tolerant miners.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ItemsetResult {
    pub itemsets: Vec<Vec<usize>>,
    pub supports: Option<Vec<Vec<usize>>>,
}

/// Cluster label (1-based) for every row.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub labels: Vec<usize>,
    pub k: usize,
}

impl ClusteringResult {
    /// Labels indexed by row (`labels[0]` is row 1); `k` is the largest label.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::ZeroId);
        }
        let k = labels.iter().copied().max().unwrap_or(0);
        Ok(ClusteringResult { labels, k })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterMode {
    /// One tile per cluster spanning every column.
    SingleTile,
    /// One tile per (cluster, column); its frequency is the column mean within the cluster.
    PerColumn,
}

impl FromStr for ClusterMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "single" | "single-tile" => Ok(ClusterMode::SingleTile),
            "per-column" | "columns" => Ok(ClusterMode::PerColumn),
            other => Err(format!("unknown clustering mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginAxis {
    Columns,
    Rows,
}

/// Converted tiles plus the indices of inputs that produced no tile.
#[derive(Debug, Clone, PartialEq)]
pub struct Conversion {
    pub tiles: TileSet,
    pub skipped: Vec<usize>,
}

/// One tile per itemset: its supporting rows (or the given support list)
/// times its columns.
pub fn itemsets_to_tiles(r: &ItemsetResult, data: &BinaryDataset) -> Result<Conversion> {
    if let Some(s) = &r.supports {
        if s.len() != r.itemsets.len() {
            return Err(Error::InvalidOptions(format!(
                "{} itemsets but {} support lists",
                r.itemsets.len(),
                s.len()
            )));
        }
    }
    let mut tiles = TileSet::empty(data.dims());
    let mut skipped = Vec::new();
    for (k, items) in r.itemsets.iter().enumerate() {
        for &j in items {
            check_id(Axis::Col, j, data.n_cols())?;
        }
        let rows: Vec<usize> = match &r.supports {
            Some(s) => {
                for &i in &s[k] {
                    check_id(Axis::Row, i, data.n_rows())?;
                }
                s[k].clone()
            }
            None => (1..=data.n_rows())
                .filter(|&i| items.iter().all(|&j| data.get(i, j).unwrap_or(false)))
                .collect(),
        };
        if rows.is_empty() || items.is_empty() {
            skipped.push(k);
            continue;
        }
        tiles.push(FreqTile::from_data(
            Tile::new(rows, items.iter().copied())?,
            data,
        )?)?;
    }
    Ok(Conversion { tiles, skipped })
}

pub fn clustering_to_tiles(
    r: &ClusteringResult,
    data: &BinaryDataset,
    mode: ClusterMode,
) -> Result<Conversion> {
    if r.labels.len() != data.n_rows() {
        return Err(Error::DimMismatch {
            left: (r.labels.len(), 1),
            right: data.dims(),
        });
    }
    let mut members = vec![Vec::new(); r.k];
    for (i, &label) in r.labels.iter().enumerate() {
        check_id(Axis::Row, label, r.k)?;
        members[label - 1].push(i + 1);
    }
    let mut tiles = TileSet::empty(data.dims());
    let mut skipped = Vec::new();
    for (c, rows) in members.into_iter().enumerate() {
        if rows.is_empty() {
            skipped.push(c);
            continue;
        }
        match mode {
            ClusterMode::SingleTile => {
                let t = Tile::new(rows, 1..=data.n_cols())?;
                tiles.push(FreqTile::from_data(t, data)?)?;
            }
            ClusterMode::PerColumn => {
                for j in 1..=data.n_cols() {
                    let t = Tile::new(rows.iter().copied(), [j])?;
                    tiles.push(FreqTile::from_data(t, data)?)?;
                }
            }
        }
    }
    Ok(Conversion { tiles, skipped })
}

/// Single tile over the whole grid carrying the data density.
pub fn density_tile(data: &BinaryDataset) -> TileSet {
    let t = Tile::new(1..=data.n_rows(), 1..=data.n_cols()).expect("dataset is nonempty");
    let ft = FreqTile::from_data(t, data).expect("tile spans the dataset");
    TileSet::new(data.dims(), [ft]).expect("single tile fits")
}

/// One tile per column (or row) spanning the other axis.
pub fn margin_tiles(data: &BinaryDataset, axis: MarginAxis) -> TileSet {
    let (n, m) = data.dims();
    let tiles = match axis {
        MarginAxis::Columns => (1..=m)
            .map(|j| Tile::new(1..=n, [j]))
            .collect::<Result<Vec<_>>>(),
        MarginAxis::Rows => (1..=n)
            .map(|i| Tile::new([i], 1..=m))
            .collect::<Result<Vec<_>>>(),
    }
    .expect("margin tiles are nonempty");
    TileSet::new(
        data.dims(),
        tiles
            .into_iter()
            .map(|t| FreqTile::from_data(t, data).expect("margin tile fits")),
    )
    .expect("margin tiles are consistent")
}

/// Named background-knowledge tile sets computed from the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Background {
    None,
    Density,
    Columns,
    Rows,
    ColumnsRows,
}

impl FromStr for Background {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Background::None),
            "density" => Ok(Background::Density),
            "columns" => Ok(Background::Columns),
            "rows" => Ok(Background::Rows),
            "columns+rows" | "rows+columns" => Ok(Background::ColumnsRows),
            other => Err(format!("unknown background preset `{other}`")),
        }
    }
}

impl Background {
    pub fn tiles(self, data: &BinaryDataset) -> TileSet {
        match self {
            Background::None => TileSet::empty(data.dims()),
            Background::Density => density_tile(data),
            Background::Columns => margin_tiles(data, MarginAxis::Columns),
            Background::Rows => margin_tiles(data, MarginAxis::Rows),
            Background::ColumnsRows => margin_tiles(data, MarginAxis::Columns)
                .union(&margin_tiles(data, MarginAxis::Rows))
                .expect("same dimensions"),
        }
    }
}

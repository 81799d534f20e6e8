//! Tiles, frequency-annotated tiles and tile sets.
//!
//! A tile is the Cartesian product of a row-id set and a column-id set. Its
//! frequency is the fraction of ones inside that rectangle, either measured
//! on a dataset or prescribed as a constraint for model fitting.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dataset::{check_id, BinaryDataset};
use crate::error::{Axis, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tile {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl Tile {
    /// Sorts and deduplicates the ids. Both sets must be nonempty and ids are 1-based.
    pub fn new(
        rows: impl IntoIterator<Item = usize>,
        cols: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let rows = normalize(rows)?;
        let cols = normalize(cols)?;
        Ok(Tile { rows, cols })
    }

    /// Single-cell tile.
    pub fn cell(row: usize, col: usize) -> Result<Self> {
        Tile::new([row], [col])
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn area_size(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    pub fn fits(&self, (n, m): (usize, usize)) -> Result<()> {
        // sorted, so checking the last id suffices
        check_id(Axis::Row, *self.rows.last().unwrap(), n)?;
        check_id(Axis::Col, *self.cols.last().unwrap(), m)
    }

    /// Row-major flat indices (zero-based) of the cells in the tile's area.
    pub fn cells(&self, n_cols: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows
            .iter()
            .flat_map(move |&i| self.cols.iter().map(move |&j| (i - 1) * n_cols + (j - 1)))
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.rows.binary_search(&row).is_ok() && self.cols.binary_search(&col).is_ok()
    }
}

/// Compact id list: `1-3,7`.
pub fn format_ids(ids: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < ids.len() {
        let mut j = i;
        while j + 1 < ids.len() && ids[j + 1] == ids[j] + 1 {
            j += 1;
        }
        parts.push(if j > i {
            format!("{}-{}", ids[i], ids[j])
        } else {
            ids[i].to_string()
        });
        i = j + 1;
    }
    parts.join(",")
}

impl std::fmt::Display for Tile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "rows {} x cols {}",
            format_ids(&self.rows),
            format_ids(&self.cols)
        )
    }
}

fn normalize(ids: impl IntoIterator<Item = usize>) -> Result<Vec<usize>> {
    let mut ids: Vec<usize> = ids.into_iter().collect();
    if ids.is_empty() {
        return Err(Error::EmptyTile);
    }
    ids.sort_unstable();
    ids.dedup();
    if ids[0] == 0 {
        return Err(Error::ZeroId);
    }
    Ok(ids)
}

/// Fraction of ones of `data` inside the tile's area.
pub fn empirical_frequency(tile: &Tile, data: &BinaryDataset) -> Result<f64> {
    tile.fits(data.dims())?;
    let ones = tile.cells(data.n_cols()).filter(|&c| data.cell(c)).count();
    Ok(ones as f64 / tile.area_size() as f64)
}

/// A tile together with its target frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreqTile {
    pub tile: Tile,
    alpha: f64,
}

impl FreqTile {
    pub fn new(tile: Tile, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidFrequency(alpha));
        }
        Ok(FreqTile { tile, alpha })
    }

    /// Tile annotated with its frequency in `data`.
    pub fn from_data(tile: Tile, data: &BinaryDataset) -> Result<Self> {
        let alpha = empirical_frequency(&tile, data)?;
        Ok(FreqTile { tile, alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_exact(&self) -> bool {
        self.alpha == 0.0 || self.alpha == 1.0
    }

    pub(crate) fn key(&self) -> (&Tile, u64) {
        (&self.tile, self.alpha.to_bits())
    }
}

/// Ordered collection of frequency tiles over common dimensions.
///
/// Duplicates and overlaps are allowed. Two identical rectangles that are
/// both exact but disagree on the frequency are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileSet {
    dims: (usize, usize),
    tiles: Vec<FreqTile>,
}

impl TileSet {
    pub fn empty(dims: (usize, usize)) -> Self {
        TileSet {
            dims,
            tiles: Vec::new(),
        }
    }

    pub fn new(dims: (usize, usize), tiles: impl IntoIterator<Item = FreqTile>) -> Result<Self> {
        let mut set = TileSet::empty(dims);
        for t in tiles {
            set.push(t)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, tile: FreqTile) -> Result<()> {
        tile.tile.fits(self.dims)?;
        if tile.is_exact() {
            if let Some(clash) = self
                .tiles
                .iter()
                .find(|t| t.is_exact() && t.tile == tile.tile && t.alpha != tile.alpha)
            {
                return Err(Error::ConflictingExactTiles {
                    row: clash.tile.rows[0],
                    col: clash.tile.cols[0],
                    tile: self.tiles.len(),
                });
            }
        }
        self.tiles.push(tile);
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn tiles(&self) -> &[FreqTile] {
        &self.tiles
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FreqTile> {
        self.tiles.iter()
    }

    pub fn get(&self, index: usize) -> Option<&FreqTile> {
        self.tiles.get(index)
    }

    pub fn all_exact(&self) -> bool {
        self.tiles.iter().all(FreqTile::is_exact)
    }

    pub fn contains(&self, tile: &FreqTile) -> bool {
        self.tiles.iter().any(|t| t.key() == tile.key())
    }

    /// Set union: tiles of `self` then those of `other` not already present.
    pub fn union(&self, other: &TileSet) -> Result<TileSet> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch {
                left: self.dims,
                right: other.dims,
            });
        }
        let mut seen: HashSet<(&Tile, u64)> = HashSet::new();
        let mut out = TileSet::empty(self.dims);
        for t in self.tiles.iter().chain(other.tiles.iter()) {
            if seen.insert(t.key()) {
                out.push(t.clone())?;
            }
        }
        Ok(out)
    }

    /// Copy with one more tile appended (no-op if already present).
    pub fn with(&self, tile: &FreqTile) -> Result<TileSet> {
        let mut out = self.clone();
        if !out.contains(tile) {
            out.push(tile.clone())?;
        }
        Ok(out)
    }

    /// Deduplicated copy in a fixed order that does not depend on how the
    /// set was assembled.
    pub fn canonical(&self) -> TileSet {
        let mut tiles = self.tiles.clone();
        tiles.sort_by(|a, b| {
            a.tile
                .cmp(&b.tile)
                .then(a.alpha.to_bits().cmp(&b.alpha.to_bits()))
        });
        tiles.dedup_by(|a, b| a.key() == b.key());
        TileSet {
            dims: self.dims,
            tiles,
        }
    }

    /// Cells covered by at least one tile.
    pub fn area_union(&self) -> Area {
        let mut area = Area::empty(self.dims);
        for t in &self.tiles {
            for c in t.tile.cells(self.dims.1) {
                area.mask[c] = true;
            }
        }
        area
    }
}

impl<'a> IntoIterator for &'a TileSet {
    type Item = &'a FreqTile;
    type IntoIter = std::slice::Iter<'a, FreqTile>;

    fn into_iter(self) -> Self::IntoIter {
        self.tiles.iter()
    }
}

/// Set of cells in an `n x m` grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Area {
    dims: (usize, usize),
    mask: Vec<bool>,
}

impl Area {
    pub fn empty(dims: (usize, usize)) -> Self {
        Area {
            dims,
            mask: vec![false; dims.0 * dims.1],
        }
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= 1
            && col >= 1
            && row <= self.dims.0
            && col <= self.dims.1
            && self.mask[(row - 1) * self.dims.1 + (col - 1)]
    }

    /// 1-based `(row, col)` pairs in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.dims.1;
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(c, _)| (c / m + 1, c % m + 1))
    }

    pub fn difference(&self, other: &Area) -> Area {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn intersection(&self, other: &Area) -> Area {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Area) -> Area {
        self.zip_with(other, |a, b| a || b)
    }

    fn zip_with(&self, other: &Area, f: impl Fn(bool, bool) -> bool) -> Area {
        assert_eq!(self.dims, other.dims, "area dimensions differ");
        Area {
            dims: self.dims,
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

/// Replaces every tile's frequency with its empirical frequency in `data`.
pub fn annotate(ts: &TileSet, data: &BinaryDataset) -> Result<TileSet> {
    if ts.dims() != data.dims() {
        return Err(Error::DimMismatch {
            left: ts.dims(),
            right: data.dims(),
        });
    }
    let tiles = ts
        .iter()
        .map(|t| FreqTile::from_data(t.tile.clone(), data))
        .collect::<Result<Vec<_>>>()?;
    TileSet::new(ts.dims(), tiles)
}

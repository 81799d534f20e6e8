//! Text formats.
//!
//! Dataset: a header line `n m`, then exactly one line per row listing the
//! 1-based column ids holding a one (an empty line is an all-zero row;
//! missing trailing rows are all-zero).
//!
//! Tile set: one JSON object per line,
//! `{"rows": [1, 2, "4-6"], "cols": ["1-3"], "freq": 0.5}`. Ids may be
//! integers or `"a-b"` ranges; `freq` is optional and filled in from the
//! dataset when absent. Blank lines and lines starting with `#` are ignored.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::convert::{ClusteringResult, ItemsetResult};
use crate::dataset::BinaryDataset;
use crate::error::{Error, Result};
use crate::tile::{FreqTile, Tile, TileSet};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses a whitespace-separated list of ids and `a-b` ranges.
fn parse_ids(s: &str, path: &Path, line: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for tok in s.split_whitespace() {
        out.extend(parse_id_token(tok).map_err(|msg| Error::parse(path, line, msg))?);
    }
    Ok(out)
}

fn parse_id_token(tok: &str) -> std::result::Result<Vec<usize>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid id `{tok}`"))
    };
    match tok.split_once('-') {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(format!("empty range `{tok}`"));
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![num(tok)?]),
    }
}

pub fn parse_dataset(text: &str, path: &Path) -> Result<BinaryDataset> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| Error::parse(path, 1, "missing `n m` header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::parse(path, hline, "header must be two integers `n m`"))?;
    let [n, m] = dims[..] else {
        return Err(Error::parse(
            path,
            hline,
            "header must be two integers `n m`",
        ));
    };
    let mut data =
        BinaryDataset::zeros(n, m).map_err(|e| Error::parse(path, hline, e.to_string()))?;
    let mut row = 0;
    for (line, text) in lines {
        if row == n {
            if text.trim().is_empty() {
                continue;
            }
            return Err(Error::parse(path, line, format!("more than {n} rows")));
        }
        row += 1;
        for j in parse_ids(text, path, line)? {
            data.set(row, j, true)
                .map_err(|e| Error::parse(path, line, e.to_string()))?;
        }
    }
    Ok(data)
}

pub fn read_dataset(path: &Path) -> Result<BinaryDataset> {
    parse_dataset(&read(path)?, path)
}

pub fn write_dataset(data: &BinaryDataset, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{} {}", data.n_rows(), data.n_cols())?;
    for i in 1..=data.n_rows() {
        let ids: Vec<String> = data.row_ones(i).iter().map(usize::to_string).collect();
        writeln!(w, "{}", ids.join(" "))?;
    }
    Ok(())
}

fn json_ids(v: Option<&Value>, key: &str) -> std::result::Result<Vec<usize>, String> {
    let arr = v
        .and_then(Value::as_array)
        .ok_or_else(|| format!("`{key}` must be an array"))?;
    let mut out = Vec::new();
    for item in arr {
        match item {
            Value::Number(x) => out.push(
                x.as_u64()
                    .ok_or_else(|| format!("invalid id {x} in `{key}`"))? as usize,
            ),
            Value::String(s) => out.extend(parse_id_token(s)?),
            other => return Err(format!("invalid id {other} in `{key}`")),
        }
    }
    Ok(out)
}

/// Parses a tile-set file. Tiles lacking a frequency are annotated from
/// `data`, which is then required.
pub fn parse_tiles(
    text: &str,
    path: &Path,
    dims: (usize, usize),
    data: Option<&BinaryDataset>,
) -> Result<TileSet> {
    let mut ts = TileSet::empty(dims);
    for (line, l) in content_lines(text) {
        let err = |msg: String| Error::parse(path, line, msg);
        let v: Value = serde_json::from_str(l).map_err(|e| err(e.to_string()))?;
        let rows = json_ids(v.get("rows"), "rows").map_err(err)?;
        let cols = json_ids(v.get("cols"), "cols").map_err(err)?;
        let tile = Tile::new(rows, cols).map_err(|e| err(e.to_string()))?;
        let ft = match v.get("freq") {
            None | Some(Value::Null) => {
                let data =
                    data.ok_or_else(|| err("tile has no `freq` and no dataset was given".into()))?;
                FreqTile::from_data(tile, data)
            }
            Some(f) => {
                let alpha = f
                    .as_f64()
                    .ok_or_else(|| err("`freq` must be a number".into()))?;
                FreqTile::new(tile, alpha)
            }
        }
        .map_err(|e| err(e.to_string()))?;
        ts.push(ft).map_err(|e| err(e.to_string()))?;
    }
    Ok(ts)
}

pub fn read_tiles(
    path: &Path,
    dims: (usize, usize),
    data: Option<&BinaryDataset>,
) -> Result<TileSet> {
    parse_tiles(&read(path)?, path, dims, data)
}

#[derive(Serialize)]
pub struct TileRecord<'a> {
    pub rows: &'a [usize],
    pub cols: &'a [usize],
    pub freq: f64,
}

impl<'a> From<&'a FreqTile> for TileRecord<'a> {
    fn from(t: &'a FreqTile) -> Self {
        TileRecord {
            rows: t.tile.rows(),
            cols: t.tile.cols(),
            freq: t.alpha(),
        }
    }
}

pub fn write_tiles(ts: &TileSet, mut w: impl Write) -> std::io::Result<()> {
    for t in ts {
        serde_json::to_writer(&mut w, &TileRecord::from(t))?;
        writeln!(w)?;
    }
    Ok(())
}

/// One itemset per line as column ids; `cols | rows` gives explicit support
/// rows (fault-tolerant itemsets). Either every line has rows or none does.
pub fn parse_itemsets(text: &str, path: &Path) -> Result<ItemsetResult> {
    let mut itemsets = Vec::new();
    let mut supports = Vec::new();
    let mut with_rows = None;
    for (line, l) in content_lines(text) {
        let (cols, rows) = match l.split_once('|') {
            Some((c, r)) => (c, Some(r)),
            None => (l, None),
        };
        if *with_rows.get_or_insert(rows.is_some()) != rows.is_some() {
            return Err(Error::parse(
                path,
                line,
                "either all itemsets or none may list support rows",
            ));
        }
        itemsets.push(parse_ids(cols, path, line)?);
        if let Some(r) = rows {
            supports.push(parse_ids(r, path, line)?);
        }
    }
    Ok(ItemsetResult {
        itemsets,
        supports: (with_rows == Some(true)).then_some(supports),
    })
}

pub fn read_itemsets(path: &Path) -> Result<ItemsetResult> {
    parse_itemsets(&read(path)?, path)
}

/// `row cluster` pairs, one per line; every row of an `n`-row dataset must
/// appear exactly once.
pub fn parse_clustering(text: &str, path: &Path, n: usize) -> Result<ClusteringResult> {
    let mut labels = vec![0usize; n];
    for (line, l) in content_lines(text) {
        let nums: Vec<usize> = l
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(path, line, "expected `row cluster`"))?;
        let [row, cluster] = nums[..] else {
            return Err(Error::parse(path, line, "expected `row cluster`"));
        };
        if row == 0 || row > n {
            return Err(Error::parse(
                path,
                line,
                format!("row {row} out of range 1..={n}"),
            ));
        }
        if cluster == 0 {
            return Err(Error::parse(path, line, "cluster ids are 1-based"));
        }
        if labels[row - 1] != 0 {
            return Err(Error::parse(
                path,
                line,
                format!("row {row} labelled twice"),
            ));
        }
        labels[row - 1] = cluster;
    }
    if let Some(i) = labels.iter().position(|&c| c == 0) {
        return Err(Error::parse(
            path,
            text.lines().count(),
            format!("row {} has no cluster", i + 1),
        ));
    }
    ClusteringResult::new(labels)
}

pub fn read_clustering(path: &Path, n: usize) -> Result<ClusteringResult> {
    parse_clustering(&read(path)?, path, n)
}

/// Scientific notation with 17 significant digits; parses back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

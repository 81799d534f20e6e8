//! Seeded random instances shared by the integration suites.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tilediff::{BinaryDataset, FreqTile, Tile, TileSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dataset with ones drawn at a density picked uniformly from `density`.
pub fn dataset(
    rng: &mut impl Rng,
    n: usize,
    m: usize,
    density: std::ops::Range<f64>,
) -> BinaryDataset {
    let density = rng.gen_range(density);
    let mut d = BinaryDataset::zeros(n, m).unwrap();
    for i in 1..=n {
        for j in 1..=m {
            if rng.gen_bool(density) {
                d.set(i, j, true).unwrap();
            }
        }
    }
    d
}

fn subset(rng: &mut impl Rng, n: usize, max: usize) -> Vec<usize> {
    let k = rng.gen_range(1..=max.min(n));
    let mut ids: Vec<usize> = (1..=n).collect();
    ids.shuffle(rng);
    ids.truncate(k);
    ids
}

/// Random rectangle (rows and columns need not be contiguous).
pub fn rect(rng: &mut impl Rng, (n, m): (usize, usize)) -> Tile {
    Tile::new(subset(rng, n, n), subset(rng, m, m)).unwrap()
}

/// Tile annotated from `data`, so any collection of them is consistent.
pub fn noisy_tile(rng: &mut impl Rng, data: &BinaryDataset) -> FreqTile {
    FreqTile::from_data(rect(rng, data.dims()), data).unwrap()
}

pub fn noisy_set(rng: &mut impl Rng, data: &BinaryDataset, max_tiles: usize) -> TileSet {
    let k = rng.gen_range(0..=max_tiles);
    TileSet::new(data.dims(), (0..k).map(|_| noisy_tile(rng, data))).unwrap()
}

/// Grows a rectangle around a random seed cell while every cell keeps the
/// seed's value, giving an exact tile that agrees with `data`.
pub fn exact_tile(rng: &mut impl Rng, data: &BinaryDataset) -> FreqTile {
    let (n, m) = data.dims();
    let (r0, c0) = (rng.gen_range(1..=n), rng.gen_range(1..=m));
    let v = data.get(r0, c0).unwrap();
    let mut rows = vec![r0];
    let mut cols = vec![c0];
    let mut order: Vec<(bool, usize)> = (1..=n)
        .filter(|&i| i != r0)
        .map(|i| (true, i))
        .chain((1..=m).filter(|&j| j != c0).map(|j| (false, j)))
        .collect();
    order.shuffle(rng);
    for (is_row, id) in order {
        if rng.gen_bool(0.4) {
            continue;
        }
        let ok = if is_row {
            cols.iter().all(|&j| data.get(id, j).unwrap() == v)
        } else {
            rows.iter().all(|&i| data.get(i, id).unwrap() == v)
        };
        if ok {
            if is_row {
                rows.push(id);
            } else {
                cols.push(id);
            }
        }
    }
    FreqTile::new(Tile::new(rows, cols).unwrap(), if v { 1.0 } else { 0.0 }).unwrap()
}

pub fn exact_set(rng: &mut impl Rng, data: &BinaryDataset, max_tiles: usize) -> TileSet {
    let k = rng.gen_range(0..=max_tiles);
    TileSet::new(data.dims(), (0..k).map(|_| exact_tile(rng, data))).unwrap()
}

pub fn dims(rng: &mut impl Rng, lo: usize, hi: usize) -> (usize, usize) {
    (rng.gen_range(lo..=hi), rng.gen_range(lo..=hi))
}

/// Dimensions with at most `cells` entries.
pub fn small_dims(rng: &mut impl Rng, cells: usize) -> (usize, usize) {
    loop {
        let n = rng.gen_range(1..=cells);
        let m = rng.gen_range(1..=cells);
        if n * m <= cells && n * m >= 2 {
            return (n, m);
        }
    }
}

/// Prints one result line straight to the terminal, bypassing output capture.
pub fn report(criterion: &str, pass: bool, detail: &str) {
    use std::io::Write;
    let line = format!(
        "acceptance {criterion}: {} ({detail})\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
}

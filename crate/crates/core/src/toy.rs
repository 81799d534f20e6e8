//! A 5x5 worked example with five tiles, used by the docs and tests.
//!
//! ```text
//!        c1 c2 c3 c4 c5
//!   r1    1  1  .  .  1
//!   r2    1  1  .  .  .
//!   r3    .  .  .  1  1
//!   r4    .  .  1  1  1
//!   r5    .  .  1  1  1
//! ```
//!
//! * `T1` rows 2-5 x cols 1-5 (frequency 1/2)
//! * `T2` rows 1-2 x cols 1-2 (all ones)
//! * `T3` rows 3-5 x cols 1-2 (all zeros)
//! * `T4` rows 4-5 x cols 3-5 (all ones)
//! * `T5` rows 3-5 x cols 4-5 (all ones)

use crate::dataset::BinaryDataset;
use crate::tile::{FreqTile, Tile, TileSet};

pub fn dataset() -> BinaryDataset {
    BinaryDataset::from_rows(
        5,
        vec![
            vec![1, 2, 5],
            vec![1, 2],
            vec![4, 5],
            vec![3, 4, 5],
            vec![3, 4, 5],
        ],
    )
    .expect("toy dataset is well formed")
}

/// `T1..T5` in order (index 0 is `T1`).
pub fn tiles() -> Vec<Tile> {
    let t = |rows: std::ops::RangeInclusive<usize>, cols: std::ops::RangeInclusive<usize>| {
        Tile::new(rows, cols).expect("toy tile is well formed")
    };
    vec![
        t(2..=5, 1..=5),
        t(1..=2, 1..=2),
        t(3..=5, 1..=2),
        t(4..=5, 3..=5),
        t(3..=5, 4..=5),
    ]
}

/// Tile `T{k}` (1-based) annotated from the toy dataset.
pub fn tile(k: usize) -> FreqTile {
    FreqTile::from_data(tiles()[k - 1].clone(), &dataset()).expect("toy tile fits")
}

/// Annotated tile set made of the given 1-based tile numbers, in order.
pub fn set(ks: &[usize]) -> TileSet {
    TileSet::new((5, 5), ks.iter().map(|&k| tile(k))).expect("toy tiles are consistent")
}

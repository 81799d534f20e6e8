//! Maximum-entropy models of binary data built from (noisy) tiles, and an
//! information-theoretic distance between sets of tiles.
//!
//! Mining results on a binary matrix (itemsets, clusterings, biclusters,
//! margins) are converted into tiles with frequencies ([`convert`]). A tile
//! set defines a maximum-entropy distribution over all datasets of the same
//! shape ([`maxent`]); comparing those distributions gives a distance between
//! results relative to background knowledge ([`divergence`]). On top of the
//! distance sit greedy redescription ([`redescribe`]) and iterative ranking
//! ([`rank`]).
//!
//! ```
//! use tilediff::{divergence, maxent::FitOptions, toy, TileSet};
//!
//! let t = toy::set(&[2, 4]);
//! let u = toy::set(&[2, 3, 5]);
//! let d = divergence::distance(&t, &u, &TileSet::empty((5, 5)), &FitOptions::default()).unwrap();
//! assert!((d.value - 5.0 / 9.0).abs() < 1e-12);
//! ```

pub mod cli;
pub mod convert;
pub mod dataset;
pub mod divergence;
pub mod error;
pub mod io;
pub mod maxent;
pub mod oracle;
pub mod rank;
pub mod redescribe;
pub mod tile;
pub mod toy;

pub use dataset::BinaryDataset;
pub use error::{Error, Result};
pub use tile::{FreqTile, Tile, TileSet};

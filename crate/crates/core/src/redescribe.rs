//! Greedy redescription: pick candidate tiles, one at a time, that bring a
//! selection closest to a target tile set.

use rayon::prelude::*;
use serde::Serialize;

use crate::divergence::distance;
use crate::error::Result;
use crate::maxent::FitOptions;
use crate::tile::{FreqTile, TileSet};

/// An addition must lower the distance by more than this to be accepted.
pub const MIN_IMPROVEMENT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Redescription {
    pub selected: Vec<FreqTile>,
    /// Position of each selected tile in the candidate set.
    pub indices: Vec<usize>,
    /// Distance of the empty selection to the target.
    pub initial_distance: f64,
    /// Distance after each addition.
    pub trace: Vec<f64>,
    pub final_distance: f64,
}

/// Greedily selects candidates minimizing `d(selection, target; background)`.
///
/// Each round evaluates every remaining candidate and keeps the one with the
/// lowest distance, the earliest candidate winning ties. Stops as soon as no
/// candidate strictly improves.
pub fn fruits(
    target: &TileSet,
    candidates: &TileSet,
    background: &TileSet,
    opts: &FitOptions,
) -> Result<Redescription> {
    let mut selection = TileSet::empty(candidates.dims());
    let mut indices = Vec::new();
    let mut trace = Vec::new();
    let initial = distance(&selection, target, background, opts)?.value;
    let mut current = initial;
    let mut remaining: Vec<usize> = (0..candidates.len()).collect();

    loop {
        let scores = remaining
            .par_iter()
            .map(|&k| {
                let with = selection.with(&candidates.tiles()[k])?;
                Ok(distance(&with, target, background, opts)?.value)
            })
            .collect::<Result<Vec<f64>>>()?;

        let mut best: Option<(usize, f64)> = None;
        for (pos, &d) in scores.iter().enumerate() {
            let bar = best.map_or(current, |(_, b)| b);
            if d < bar - MIN_IMPROVEMENT {
                best = Some((pos, d));
            }
        }
        let Some((pos, d)) = best else { break };
        let k = remaining.remove(pos);
        selection.push(candidates.tiles()[k].clone())?;
        indices.push(k);
        trace.push(d);
        current = d;
    }

    Ok(Redescription {
        selected: selection.tiles().to_vec(),
        indices,
        initial_distance: initial,
        trace,
        final_distance: current,
    })
}

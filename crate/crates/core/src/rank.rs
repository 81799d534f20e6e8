//! Iterative ranking: order tiles so each one adds as much information as
//! possible on top of those ranked above it.
//!
//! With `T` the tiles being ranked and `L` the ranked prefix, the exact mode
//! picks the tile minimizing `d(L ∪ {U}, T; B)`. The heuristic mode instead
//! scores each candidate by how surprising its frequency is under the current
//! model of `L ∪ B` and needs a single refit per step.
//!
//! The surprise of a tile is the divergence gained by constraining only its
//! own cells. Known noisy tiles that overlap it push back: moving the tile's
//! count also moves theirs, so the other cells they cover must compensate.
//! The heuristic scales the surprise by how much of the tile's variance is
//! left once the known tiles are held fixed, which is exact to second order.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::divergence::{fit_joint, kl, kl_zero};
use crate::error::{Error, Result};
use crate::maxent::{bernoulli_update, fit, model_frequency, solve_scale, EntryModel, FitOptions};
use crate::tile::{FreqTile, TileSet};

/// Scores closer than this count as tied; the earlier tile wins.
const TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMode {
    Exact,
    Heuristic,
}

impl FromStr for RankMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(RankMode::Exact),
            "heuristic" => Ok(RankMode::Heuristic),
            other => Err(format!("unknown ranking mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    /// Input positions in ranked order.
    pub order: Vec<usize>,
    /// `d(∅, T; B)`.
    pub initial_distance: f64,
    /// `d(L_k, T; B)` after each step.
    pub distances: Vec<f64>,
    /// Per-step decrease of the distance.
    pub gains: Vec<f64>,
    pub mode: RankMode,
}

/// `KL(q || p)` for Bernoulli variables.
fn bernoulli_kl(q: f64, p: f64) -> f64 {
    let mut kl = 0.0;
    if q > 0.0 {
        kl += q * (q / p).ln();
    }
    if q < 1.0 {
        kl += (1.0 - q) * ((1.0 - q) / (1.0 - p)).ln();
    }
    kl
}

/// Divergence, in nats, gained by moving the tile's cells under `current`
/// to the candidate's frequency while every other cell stays put.
///
/// When the tile's cells share one probability `β` this is
/// `area · KL(α || β)` for Bernoulli variables.
pub fn surprise_score(candidate: &FreqTile, current: &EntryModel) -> Result<f64> {
    let alpha = candidate.alpha();
    let beta = model_frequency(&candidate.tile, current)?;
    if (alpha - beta).abs() <= TIE {
        return Ok(0.0);
    }
    let p = current.probabilities();
    let cells: Vec<usize> = candidate.tile.cells(current.dims().1).collect();
    let fixed_ones: f64 = cells.iter().map(|&c| p[c]).filter(|&v| v == 1.0).sum();
    let free: Vec<f64> = cells
        .iter()
        .map(|&c| p[c])
        .filter(|&v| v > 0.0 && v < 1.0)
        .collect();
    let target = alpha * cells.len() as f64 - fixed_ones;
    let n_free = free.len() as f64;
    let slack = 1e-9 * cells.len() as f64;
    if free.is_empty() || target < -slack || target > n_free + slack {
        return Err(Error::InfiniteSurprise { alpha, beta });
    }
    if target <= slack {
        return Ok(free.iter().map(|&v| -(1.0 - v).ln()).sum());
    }
    if target >= n_free - slack {
        return Ok(free.iter().map(|&v| -v.ln()).sum());
    }
    let g = |x: f64| free.iter().map(|&v| bernoulli_update(v, x)).sum::<f64>();
    let x = solve_scale(g, target, 4.0, 1e-14 * n_free);
    Ok(free
        .iter()
        .map(|&v| bernoulli_kl(bernoulli_update(v, x), v))
        .sum())
}

/// Second-order interaction between a candidate and the noisy tiles a model
/// was fitted on, under that model's cell variances `p (1 - p)`.
struct Coupling {
    var: Vec<f64>,
    /// Known noisy tiles covering each cell.
    cover: Vec<Vec<u32>>,
    /// `L D Lᵀ` factor of the known tiles' covariance; dependent tiles are dropped.
    lower: Vec<Vec<f64>>,
    diag: Vec<f64>,
    kept: Vec<bool>,
}

impl Coupling {
    fn new(model: &EntryModel) -> Self {
        let m = model.dims().1;
        let var: Vec<f64> = model
            .probabilities()
            .iter()
            .map(|&p| p * (1.0 - p))
            .collect();
        let mut cover = vec![Vec::new(); var.len()];
        let mut k = 0;
        for t in model.tiles().iter().filter(|t| !t.is_exact()) {
            let mut any = false;
            for c in t.tile.cells(m).filter(|&c| var[c] > 0.0) {
                cover[c].push(k as u32);
                any = true;
            }
            k += usize::from(any);
        }
        let mut cov = vec![vec![0.0; k]; k];
        for (c, js) in cover.iter().enumerate() {
            for &a in js {
                for &b in js {
                    cov[a as usize][b as usize] += var[c];
                }
            }
        }
        let mut lower = vec![vec![0.0; k]; k];
        let mut diag = vec![0.0; k];
        let mut kept = vec![false; k];
        for j in 0..k {
            for i in 0..j {
                if kept[i] {
                    let s: f64 = (0..i).map(|h| lower[j][h] * lower[i][h] * diag[h]).sum();
                    lower[j][i] = (cov[j][i] - s) / diag[i];
                }
            }
            let d = cov[j][j]
                - (0..j)
                    .map(|h| lower[j][h] * lower[j][h] * diag[h])
                    .sum::<f64>();
            if d > 1e-10 * cov[j][j] {
                diag[j] = d;
                kept[j] = true;
            }
        }
        Coupling {
            var,
            cover,
            lower,
            diag,
            kept,
        }
    }

    /// Variance of the tile's count over the part of it the known tiles
    /// leave free; 1 when nothing overlaps, 0 when it is fully determined.
    fn inflation(&self, candidate: &FreqTile, m: usize) -> f64 {
        let k = self.diag.len();
        let mut f = vec![0.0; k];
        let mut total = 0.0;
        for c in candidate.tile.cells(m) {
            total += self.var[c];
            for &j in &self.cover[c] {
                f[j as usize] += self.var[c];
            }
        }
        if total == 0.0 {
            return 1.0;
        }
        let mut explained = 0.0;
        let mut z = vec![0.0; k];
        for j in 0..k {
            if !self.kept[j] {
                continue;
            }
            z[j] = f[j] - (0..j).map(|i| self.lower[j][i] * z[i]).sum::<f64>();
            explained += z[j] * z[j] / self.diag[j];
        }
        let residual = total - explained;
        if residual <= 1e-9 * total {
            return 0.0;
        }
        total / residual
    }
}

/// Shared pieces of `d(L, T; B)` for a fixed `T` and `B`.
struct Scorer<'a> {
    background: &'a TileSet,
    opts: &'a FitOptions,
    joint: EntryModel,
    kl_m_b: f64,
    zero: f64,
}

impl<'a> Scorer<'a> {
    fn new(tiles: &TileSet, background: &'a TileSet, opts: &'a FitOptions) -> Result<Self> {
        let joint = fit_joint(&tiles.union(background)?.canonical(), opts)?;
        let b = fit(&background.canonical(), opts)?;
        Ok(Scorer {
            background,
            opts,
            kl_m_b: kl(&joint, &b)?,
            zero: kl_zero(joint.dims(), opts),
            joint,
        })
    }

    /// Model of `prefix ∪ B`.
    fn fit_prefix(&self, prefix: &TileSet) -> Result<EntryModel> {
        fit(&prefix.union(self.background)?.canonical(), self.opts)
    }

    /// Since `L ⊆ T`, `M = T ∪ B` and `KL(M || T ∪ B)` vanishes.
    fn distance(&self, prefix_model: &EntryModel) -> Result<f64> {
        if self.kl_m_b <= self.zero {
            return Ok(1.0);
        }
        Ok(kl(&self.joint, prefix_model)? / self.kl_m_b)
    }
}

pub fn fitamin(
    tiles: &TileSet,
    background: &TileSet,
    mode: RankMode,
    opts: &FitOptions,
) -> Result<Ranking> {
    let scorer = Scorer::new(tiles, background, opts)?;
    let mut prefix = TileSet::empty(tiles.dims());
    let mut current = scorer.fit_prefix(&prefix)?;
    let initial = scorer.distance(&current)?;
    let mut remaining: Vec<usize> = (0..tiles.len()).collect();
    let mut order = Vec::with_capacity(tiles.len());
    let mut distances = Vec::with_capacity(tiles.len());
    let mut gains = Vec::with_capacity(tiles.len());
    let mut last = initial;

    while !remaining.is_empty() {
        let (pos, model) = match mode {
            RankMode::Exact => {
                let evaluated = remaining
                    .par_iter()
                    .map(|&k| {
                        let model = scorer.fit_prefix(&prefix.with(&tiles.tiles()[k])?)?;
                        let d = scorer.distance(&model)?;
                        Ok((d, model))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let pos = first_best(evaluated.iter().map(|(d, _)| -d));
                let (_, model) = evaluated.into_iter().nth(pos).expect("nonempty");
                (pos, model)
            }
            RankMode::Heuristic => {
                let coupling = Coupling::new(&current);
                let m = current.dims().1;
                let scores = remaining
                    .par_iter()
                    .map(|&k| {
                        let t = &tiles.tiles()[k];
                        let s = surprise_score(t, &current)?;
                        Ok(if s == 0.0 {
                            0.0
                        } else {
                            s * coupling.inflation(t, m)
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let pos = first_best(scores.into_iter());
                let model = scorer.fit_prefix(&prefix.with(&tiles.tiles()[remaining[pos]])?)?;
                (pos, model)
            }
        };
        let k = remaining.remove(pos);
        prefix = prefix.with(&tiles.tiles()[k])?;
        let d = scorer.distance(&model)?;
        current = model;
        order.push(k);
        gains.push(last - d);
        distances.push(d);
        last = d;
    }

    Ok(Ranking {
        order,
        initial_distance: initial,
        distances,
        gains,
        mode,
    })
}

/// Position of the largest score; near-ties go to the earliest.
fn first_best(scores: impl Iterator<Item = f64>) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (pos, s) in scores.enumerate() {
        match best {
            Some((_, b)) if s <= b + TIE => {}
            _ => best = Some((pos, s)),
        }
    }
    best.expect("at least one candidate").0
}

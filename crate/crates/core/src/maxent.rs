//! Maximum-entropy distribution over binary datasets given tile frequencies.
//!
//! The distribution factorizes into independent Bernoulli variables, one per
//! cell, so a fitted model is just a matrix of `P[cell = 1]`. Fitting is
//! iterative scaling: exact tiles clamp their cells, then every noisy tile is
//! visited in turn and its cells are rescaled with [`bernoulli_update`] until
//! the tile's expected frequency hits its target. Sweeps repeat until every
//! tile is within tolerance.
//!
//! Cells covered by exactly the same tiles always share a probability, so the
//! fit runs over these equivalence classes ("atoms") and expands at the end.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::tile::{Tile, TileSet};

/// Slack, in units of cells, when comparing a tile's target count of ones
/// against what its clamped cells allow.
const FEASIBILITY_SLACK: f64 = 1e-9;

/// Inner root solve stops when the expected count is this close (per cell).
const ROOT_PRECISION: f64 = 1e-14;

const ROOT_MAX_ITER: usize = 200;

/// Overlapping noisy tiles can jointly force cells to 0 or 1, which scaling
/// only approaches slowly. Up to this many free atoms such cells are found
/// before scaling starts; larger problems look for them only once scaling
/// has run `REDUCE_AFTER_SWEEPS` sweeps without converging.
const REDUCE_MAX_ATOMS: usize = 20_000;

const REDUCE_AFTER_SWEEPS: usize = 50;

/// An atom counts as free when some feasible point keeps it this far from 0 and 1.
const INTERIOR_MARGIN: f64 = 1e-6;

/// Per-cell slack on tile counts in the reduction LP. Slack across several
/// tiles adds up and can lift a forced atom off the boundary, so this stays
/// far below `INTERIOR_MARGIN`.
const LP_SLACK: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Largest accepted `|freq(T; model) - alpha_T|` over all tiles.
    pub tolerance: f64,
    /// Cap on full passes over the noisy tiles.
    pub max_sweeps: usize,
    /// Geometric factor used when bracketing the scale factor.
    pub bracket_growth: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tolerance: 1e-6,
            max_sweeps: 10_000,
            bracket_growth: 4.0,
        }
    }
}

impl FitOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        FitOptions {
            tolerance,
            ..FitOptions::default()
        }
    }

    // negated comparisons so that NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidOptions(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidOptions(
                "max_sweeps must be at least 1".into(),
            ));
        }
        if !(self.bracket_growth > 1.0) || !self.bracket_growth.is_finite() {
            return Err(Error::InvalidOptions(format!(
                "bracket_growth must be a finite factor above 1, got {}",
                self.bracket_growth
            )));
        }
        Ok(())
    }
}

/// Fitted factorized model.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryModel {
    dims: (usize, usize),
    p: Vec<f64>,
    fixed: Vec<bool>,
    fitted_for: TileSet,
    residual: f64,
    sweeps: usize,
}

impl EntryModel {
    /// Model with every cell at 1/2, i.e. the fit of an empty tile set.
    pub fn uniform(dims: (usize, usize)) -> Self {
        EntryModel {
            dims,
            p: vec![0.5; dims.0 * dims.1],
            fixed: vec![false; dims.0 * dims.1],
            fitted_for: TileSet::empty(dims),
            residual: 0.0,
            sweeps: 0,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// `P[(row, col) = 1]`, 1-based.
    pub fn probability(&self, row: usize, col: usize) -> Result<f64> {
        crate::dataset::check_id(crate::error::Axis::Row, row, self.dims.0)?;
        crate::dataset::check_id(crate::error::Axis::Col, col, self.dims.1)?;
        Ok(self.p[(row - 1) * self.dims.1 + (col - 1)])
    }

    /// Row-major probabilities.
    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// Cells whose value is determined (probability exactly 0 or 1).
    pub fn fixed_mask(&self) -> &[bool] {
        &self.fixed
    }

    pub fn is_fixed(&self, row: usize, col: usize) -> bool {
        self.fixed[(row - 1) * self.dims.1 + (col - 1)]
    }

    pub fn tiles(&self) -> &TileSet {
        &self.fitted_for
    }

    /// Largest tile-frequency error at termination.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Number of full sweeps performed.
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn frequency(&self, tile: &Tile) -> Result<f64> {
        model_frequency(tile, self)
    }

    pub fn entropy(&self) -> f64 {
        entropy(self)
    }

    /// Rows of probabilities, for display.
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.p.chunks(self.dims.1)
    }
}

/// `u(y, x) = x y / (1 - y (1 - x))`: the cell probability after the tile's
/// natural parameter is shifted by `ln x`.
pub fn bernoulli_update(y: f64, x: f64) -> f64 {
    // endpoints are fixed points; keep them exact
    if y <= 0.0 || y >= 1.0 {
        return y;
    }
    x * y / (1.0 - y * (1.0 - x))
}

/// Expected frequency of `tile` under the model.
pub fn model_frequency(tile: &Tile, model: &EntryModel) -> Result<f64> {
    tile.fits(model.dims)?;
    let sum: f64 = tile.cells(model.dims.1).map(|c| model.p[c]).sum();
    Ok(sum / tile.area_size() as f64)
}

/// Sum of per-cell Bernoulli entropies, in nats.
pub fn entropy(model: &EntryModel) -> f64 {
    model.p.iter().map(|&p| bernoulli_entropy(p)).sum()
}

pub(crate) fn bernoulli_entropy(p: f64) -> f64 {
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.ln();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).ln();
    }
    h
}

/// Closed form for sets of exact tiles: covered cells take their tile's
/// value, everything else stays at 1/2.
pub fn exact_fastpath(ts: &TileSet) -> Result<EntryModel> {
    if let Some((i, t)) = ts.iter().enumerate().find(|(_, t)| !t.is_exact()) {
        return Err(Error::NotExact {
            tile: i,
            alpha: t.alpha(),
        });
    }
    let (n, m) = ts.dims();
    let mut p = vec![0.5; n * m];
    let mut fixed = vec![false; n * m];
    for (i, t) in ts.iter().enumerate() {
        for c in t.tile.cells(m) {
            if fixed[c] && p[c] != t.alpha() {
                return Err(Error::ConflictingExactTiles {
                    row: c / m + 1,
                    col: c % m + 1,
                    tile: i,
                });
            }
            p[c] = t.alpha();
            fixed[c] = true;
        }
    }
    Ok(EntryModel {
        dims: ts.dims(),
        p,
        fixed,
        fitted_for: ts.clone(),
        residual: 0.0,
        sweeps: 0,
    })
}

/// Fits the maximum-entropy model for `ts` by iterative scaling.
pub fn fit(ts: &TileSet, opts: &FitOptions) -> Result<EntryModel> {
    opts.validate()?;
    let mut atoms = Atoms::build(ts);
    atoms.clamp_exact(ts)?;
    atoms.settle_boundaries(ts)?;

    let mut active = atoms.free_targets(ts);
    let mut reduced = false;
    if atoms.noisy_overlap(&active) && atoms.free_count() <= REDUCE_MAX_ATOMS {
        reduced = true;
        if atoms.clamp_forced(ts) {
            active = atoms.free_targets(ts);
        }
    }
    let mut sweeps = 0;
    let (mut residual, mut worst) = atoms.max_residual(ts);
    while residual > opts.tolerance {
        if !reduced && sweeps >= REDUCE_AFTER_SWEEPS && active.len() > 1 {
            reduced = true;
            if atoms.clamp_forced(ts) {
                active = atoms.free_targets(ts);
            }
        }
        if sweeps == opts.max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                residual,
                tile: worst,
                rect: ts.tiles()[worst].tile.clone(),
            });
        }
        for &(i, target) in &active {
            atoms.scale_tile(i, target, opts.bracket_growth);
        }
        sweeps += 1;
        (residual, worst) = atoms.max_residual(ts);
    }

    let (p, fixed) = atoms.expand();
    Ok(EntryModel {
        dims: ts.dims(),
        p,
        fixed,
        fitted_for: ts.clone(),
        residual,
        sweeps,
    })
}

/// Cells grouped by the exact set of tiles covering them.
struct Atoms {
    m: usize,
    cell_atom: Vec<usize>,
    first_cell: Vec<usize>,
    weight: Vec<f64>,
    p: Vec<f64>,
    fixed: Vec<bool>,
    tile_atoms: Vec<Vec<usize>>,
}

impl Atoms {
    fn build(ts: &TileSet) -> Self {
        let (n, m) = ts.dims();
        let mut cover: Vec<Vec<u32>> = vec![Vec::new(); n * m];
        for (i, t) in ts.iter().enumerate() {
            for c in t.tile.cells(m) {
                cover[c].push(i as u32);
            }
        }
        let mut index: HashMap<&[u32], usize> = HashMap::new();
        let mut cell_atom = Vec::with_capacity(n * m);
        let mut first_cell = Vec::new();
        let mut weight: Vec<f64> = Vec::new();
        for (c, sig) in cover.iter().enumerate() {
            let next = weight.len();
            let a = *index.entry(sig.as_slice()).or_insert(next);
            if a == next {
                first_cell.push(c);
                weight.push(0.0);
            }
            weight[a] += 1.0;
            cell_atom.push(a);
        }
        let mut tile_atoms = vec![Vec::new(); ts.len()];
        for (a, &c) in first_cell.iter().enumerate() {
            for &i in &cover[c] {
                tile_atoms[i as usize].push(a);
            }
        }
        let k = weight.len();
        Atoms {
            m,
            cell_atom,
            first_cell,
            weight,
            p: vec![0.5; k],
            fixed: vec![false; k],
            tile_atoms,
        }
    }

    fn clamp_exact(&mut self, ts: &TileSet) -> Result<()> {
        for (i, t) in ts.iter().enumerate().filter(|(_, t)| t.is_exact()) {
            for &a in &self.tile_atoms[i] {
                if self.fixed[a] && self.p[a] != t.alpha() {
                    let c = self.first_cell[a];
                    return Err(Error::ConflictingExactTiles {
                        row: c / self.m + 1,
                        col: c % self.m + 1,
                        tile: i,
                    });
                }
                self.p[a] = t.alpha();
                self.fixed[a] = true;
            }
        }
        Ok(())
    }

    /// `(tile, expected ones over its free cells)` for noisy tiles that
    /// still have free cells. Fixed while the clamped set does not change.
    fn free_targets(&self, ts: &TileSet) -> Vec<(usize, f64)> {
        ts.iter()
            .enumerate()
            .filter(|(_, t)| !t.is_exact())
            .filter_map(|(i, t)| {
                let (ones, free) = self.clamped_split(i);
                (free > 0.0).then(|| (i, t.alpha() * t.tile.area_size() as f64 - ones))
            })
            .collect()
    }

    fn free_count(&self) -> usize {
        self.fixed.iter().filter(|&&f| !f).count()
    }

    /// Whether two of the given tiles share a free atom.
    fn noisy_overlap(&self, active: &[(usize, f64)]) -> bool {
        let mut seen = vec![false; self.p.len()];
        for &(i, _) in active {
            for &a in &self.tile_atoms[i] {
                if !self.fixed[a] {
                    if seen[a] {
                        return true;
                    }
                    seen[a] = true;
                }
            }
        }
        false
    }

    /// Finds free atoms that every feasible assignment puts at 0 or 1 and
    /// clamps them. Returns whether anything was clamped.
    ///
    /// Repeatedly maximizes the total distance from {0, 1} of the atoms not
    /// yet known to be free; atoms that get a positive margin are free. When
    /// no further atom can move off the boundary, the rest are forced.
    fn clamp_forced(&mut self, ts: &TileSet) -> bool {
        use microlp::{ComparisonOp, OptimizationDirection, Problem};

        let free: Vec<usize> = (0..self.p.len()).filter(|&a| !self.fixed[a]).collect();
        let mut known_free = vec![false; self.p.len()];
        let mut values = vec![0.0; self.p.len()];
        loop {
            let mut lp = Problem::new(OptimizationDirection::Maximize);
            let mut var = vec![None; self.p.len()];
            let mut margins = Vec::new();
            for &a in &free {
                let p = lp.add_var(0.0, (0.0, 1.0));
                var[a] = Some(p);
                if !known_free[a] {
                    let s = lp.add_var(1.0, (0.0, 0.5));
                    lp.add_constraint([(p, 1.0), (s, -1.0)], ComparisonOp::Ge, 0.0);
                    lp.add_constraint([(p, 1.0), (s, 1.0)], ComparisonOp::Le, 1.0);
                    margins.push((a, s));
                }
            }
            if margins.is_empty() {
                return false;
            }
            for (i, target) in self.free_targets(ts) {
                let terms: Vec<_> = self.tile_atoms[i]
                    .iter()
                    .filter_map(|&a| var[a].map(|v| (v, self.weight[a])))
                    .collect();
                let slack = LP_SLACK * ts.tiles()[i].tile.area_size() as f64;
                lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, target - slack);
                lp.add_constraint(terms.as_slice(), ComparisonOp::Le, target + slack);
            }
            // on solver trouble keep scaling; the sweep cap still applies
            let Ok(outcome) = lp.solve() else {
                return false;
            };
            let Some(solution) = outcome.solution() else {
                return false;
            };
            let mut progress = false;
            for &(a, s) in &margins {
                if solution.var_value(s) > INTERIOR_MARGIN {
                    known_free[a] = true;
                    progress = true;
                }
            }
            if !progress {
                for &(a, _) in &margins {
                    values[a] = solution.var_value(var[a].expect("free atom has a variable"));
                }
                break;
            }
        }
        let mut clamped = false;
        for a in free {
            if !known_free[a] {
                self.p[a] = if values[a] < 0.5 { 0.0 } else { 1.0 };
                self.fixed[a] = true;
                clamped = true;
            }
        }
        clamped
    }

    /// (ones among clamped cells, number of free cells) in tile `i`'s area.
    fn clamped_split(&self, i: usize) -> (f64, f64) {
        let mut ones = 0.0;
        let mut free = 0.0;
        for &a in &self.tile_atoms[i] {
            if self.fixed[a] {
                ones += self.weight[a] * self.p[a];
            } else {
                free += self.weight[a];
            }
        }
        (ones, free)
    }

    /// Checks every noisy tile against the range its clamped cells allow.
    /// A target sitting on the edge of that range forces all free cells of
    /// the tile to 0 (or 1); those are clamped too, repeating until stable.
    fn settle_boundaries(&mut self, ts: &TileSet) -> Result<()> {
        loop {
            let mut changed = false;
            for (i, t) in ts.iter().enumerate().filter(|(_, t)| !t.is_exact()) {
                let area = t.tile.area_size() as f64;
                let (ones, free) = self.clamped_split(i);
                let target = t.alpha() * area - ones;
                let slack = FEASIBILITY_SLACK * area;
                if target < -slack || target > free + slack {
                    return Err(Error::InfeasibleTile {
                        tile: i,
                        rect: t.tile.clone(),
                        alpha: t.alpha(),
                        min: ones / area,
                        max: (ones + free) / area,
                    });
                }
                if free == 0.0 {
                    continue;
                }
                let forced = if target <= slack {
                    0.0
                } else if target >= free - slack {
                    1.0
                } else {
                    continue;
                };
                for &a in &self.tile_atoms[i] {
                    if !self.fixed[a] {
                        self.p[a] = forced;
                        self.fixed[a] = true;
                    }
                }
                changed = true;
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn max_residual(&self, ts: &TileSet) -> (f64, usize) {
        let mut worst = (0.0, 0);
        for (i, t) in ts.iter().enumerate() {
            let sum: f64 = self.tile_atoms[i]
                .iter()
                .map(|&a| self.weight[a] * self.p[a])
                .sum();
            let r = (sum / t.tile.area_size() as f64 - t.alpha()).abs();
            if r > worst.0 {
                worst = (r, i);
            }
        }
        worst
    }

    /// Rescales the free cells of tile `i` so their expected count of ones is `target`.
    fn scale_tile(&mut self, i: usize, target: f64, growth: f64) {
        let free: Vec<usize> = self.tile_atoms[i]
            .iter()
            .copied()
            .filter(|&a| !self.fixed[a])
            .collect();
        let g = |x: f64| -> f64 {
            free.iter()
                .map(|&a| self.weight[a] * bernoulli_update(self.p[a], x))
                .sum()
        };
        let cells: f64 = free.iter().map(|&a| self.weight[a]).sum();
        let x = solve_scale(g, target, growth, ROOT_PRECISION * cells.max(1.0));
        for a in free {
            self.p[a] = bernoulli_update(self.p[a], x);
        }
    }

    fn expand(&self) -> (Vec<f64>, Vec<bool>) {
        let p = self.cell_atom.iter().map(|&a| self.p[a]).collect();
        let fixed = self.cell_atom.iter().map(|&a| self.fixed[a]).collect();
        (p, fixed)
    }
}

/// Finds `x > 0` with `g(x) = target` for increasing `g`.
///
/// Brackets geometrically around 1, then runs regula falsi with the Illinois
/// modification, falling back to a geometric bisection step whenever the
/// bracket stops halving.
pub(crate) fn solve_scale(g: impl Fn(f64) -> f64, target: f64, growth: f64, precision: f64) -> f64 {
    let f = |x: f64| g(x) - target;
    let f1 = f(1.0);
    if f1.abs() <= precision {
        return 1.0;
    }

    let (mut lo, mut flo, mut hi, mut fhi);
    if f1 < 0.0 {
        (lo, flo) = (1.0, f1);
        hi = growth;
        loop {
            fhi = f(hi);
            if fhi >= 0.0 || hi > 1e300 {
                break;
            }
            (lo, flo) = (hi, fhi);
            hi *= growth;
        }
    } else {
        (hi, fhi) = (1.0, f1);
        lo = 1.0 / growth;
        loop {
            flo = f(lo);
            if flo <= 0.0 || lo < 1e-300 {
                break;
            }
            (hi, fhi) = (lo, flo);
            lo /= growth;
        }
    }
    debug_assert!(
        flo <= 0.0 && fhi >= 0.0,
        "scale bracket failed: g({lo}) - t = {flo}, g({hi}) - t = {fhi}"
    );
    if flo >= 0.0 {
        return lo;
    }
    if fhi <= 0.0 {
        return hi;
    }

    let mut side = 0i8;
    let mut stalls = 0;
    let mut x = 1.0;
    for _ in 0..ROOT_MAX_ITER {
        let width = hi - lo;
        let interp = hi - fhi * (hi - lo) / (fhi - flo);
        x = if stalls >= 2 || !(interp > lo && interp < hi) {
            stalls = 0;
            (lo * hi).sqrt()
        } else {
            interp
        };
        let fx = f(x);
        if fx.abs() <= precision {
            return x;
        }
        if fx < 0.0 {
            (lo, flo) = (x, fx);
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            (hi, fhi) = (x, fx);
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if hi - lo > 0.5 * width {
            stalls += 1;
        } else {
            stalls = 0;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    x
}

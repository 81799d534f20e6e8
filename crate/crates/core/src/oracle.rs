//! Brute-force reference over the explicit space of all `2^(n m)` datasets.
//!
//! Nothing here uses the per-cell factorization: the maximum-entropy
//! distribution is found by iterative proportional fitting of the joint
//! weights directly. Only for tiny grids; used to check the fast paths.

use crate::error::{Error, Result};
use crate::maxent::bernoulli_entropy;
use crate::tile::TileSet;

/// Largest grid (in cells) the oracle will enumerate.
pub const MAX_CELLS: usize = 16;

const TOLERANCE: f64 = 1e-11;
const MAX_SWEEPS: usize = 200_000;

/// Probability of every dataset; bit `(i-1) * m + (j-1)` of the index is cell `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    dims: (usize, usize),
    weights: Vec<f64>,
}

impl JointDistribution {
    pub fn uniform(dims: (usize, usize)) -> Result<Self> {
        let cells = check_size(dims)?;
        let k = 1usize << cells;
        Ok(JointDistribution {
            dims,
            weights: vec![1.0 / k as f64; k],
        })
    }

    /// Point mass on one dataset, given as its bit pattern.
    pub fn point_mass(dims: (usize, usize), pattern: usize) -> Result<Self> {
        let cells = check_size(dims)?;
        let mut weights = vec![0.0; 1 << cells];
        weights[pattern] = 1.0;
        Ok(JointDistribution { dims, weights })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `P[cell = 1]` for each cell, row-major.
    pub fn marginals(&self) -> Vec<f64> {
        let cells = self.dims.0 * self.dims.1;
        (0..cells)
            .map(|c| {
                self.weights
                    .iter()
                    .enumerate()
                    .filter(|(d, _)| d >> c & 1 == 1)
                    .map(|(_, w)| w)
                    .sum()
            })
            .collect()
    }

    pub fn entropy(&self) -> f64 {
        self.weights
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| -w * w.ln())
            .sum()
    }

    /// Total variation distance to the product of this distribution's own
    /// cell marginals.
    pub fn distance_to_product(&self) -> f64 {
        let marg = self.marginals();
        let tv: f64 = self
            .weights
            .iter()
            .enumerate()
            .map(|(d, &w)| {
                let q: f64 = marg
                    .iter()
                    .enumerate()
                    .map(|(c, &p)| if d >> c & 1 == 1 { p } else { 1.0 - p })
                    .product();
                (w - q).abs()
            })
            .sum();
        0.5 * tv
    }

    /// Sum of per-cell Bernoulli entropies of the marginals.
    pub fn product_entropy(&self) -> f64 {
        self.marginals().into_iter().map(bernoulli_entropy).sum()
    }
}

fn check_size((n, m): (usize, usize)) -> Result<usize> {
    let cells = n * m;
    if cells > MAX_CELLS {
        return Err(Error::SizeLimit {
            cells,
            limit: MAX_CELLS,
        });
    }
    Ok(cells)
}

/// Maximum-entropy joint distribution matching every tile frequency.
pub fn ipf_maxent(ts: &TileSet) -> Result<JointDistribution> {
    let mut joint = JointDistribution::uniform(ts.dims())?;
    let m = ts.dims().1;
    let k = joint.weights.len();

    // number of ones inside each tile, per dataset
    let counts: Vec<Vec<usize>> = ts
        .iter()
        .map(|t| {
            let mask: usize = t.tile.cells(m).fold(0, |acc, c| acc | 1 << c);
            (0..k).map(|d| (d & mask).count_ones() as usize).collect()
        })
        .collect();
    restrict_support(&mut joint.weights, &counts, ts);

    for sweep in 0..=MAX_SWEEPS {
        let mut worst = (0.0f64, 0usize);
        for (i, t) in ts.iter().enumerate() {
            let area = t.tile.area_size() as f64;
            let mean = counts[i]
                .iter()
                .zip(&joint.weights)
                .map(|(&c, &w)| c as f64 * w)
                .sum::<f64>();
            let r = (mean / area - t.alpha()).abs();
            if r > worst.0 {
                worst = (r, i);
            }
        }
        if worst.0 <= TOLERANCE {
            return Ok(joint);
        }
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps: sweep,
                residual: worst.0,
                tile: worst.1,
                rect: ts.tiles()[worst.1].tile.clone(),
            });
        }
        for (i, t) in ts.iter().enumerate() {
            let area = t.tile.area_size();
            scale_to_count(
                &mut joint.weights,
                &counts[i],
                area,
                t.alpha() * area as f64,
            )
            .map_err(|(min, max)| Error::InfeasibleTile {
                tile: i,
                rect: t.tile.clone(),
                alpha: t.alpha(),
                min,
                max,
            })?;
        }
    }
    unreachable!()
}

/// Zeroes the datasets that no distribution matching the tile frequencies can
/// put mass on, so scaling converges geometrically on the rest.
///
/// Datasets with equal tile counts are interchangeable, so the search runs
/// over count classes. Matching distributions (up to scale) form a cone, and
/// one LP maximizing `Σ min(q_c, 1)` reaches every supported class at once.
fn restrict_support(weights: &mut [f64], counts: &[Vec<usize>], ts: &TileSet) {
    use microlp::{ComparisonOp, OptimizationDirection, Problem};
    use std::collections::HashMap;

    if ts.is_empty() {
        return;
    }
    let mut class_of = Vec::with_capacity(weights.len());
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    for d in 0..weights.len() {
        let key: Vec<usize> = counts.iter().map(|c| c[d]).collect();
        let next = classes.len();
        let c = *index.entry(key.clone()).or_insert(next);
        if c == next {
            classes.push(key);
        }
        class_of.push(c);
    }

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let mut q = Vec::with_capacity(classes.len());
    let mut caps = Vec::with_capacity(classes.len());
    for _ in &classes {
        let v = lp.add_var(0.0, (0.0, f64::INFINITY));
        let s = lp.add_var(1.0, (0.0, 1.0));
        lp.add_constraint([(v, 1.0), (s, -1.0)], ComparisonOp::Ge, 0.0);
        q.push(v);
        caps.push(s);
    }
    for (i, t) in ts.iter().enumerate() {
        let target = t.alpha() * t.tile.area_size() as f64;
        let row: Vec<(microlp::Variable, f64)> = classes
            .iter()
            .zip(&q)
            .map(|(key, &v)| (v, key[i] as f64 - target))
            .collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, 0.0);
    }
    let Ok(outcome) = lp.solve() else { return };
    let Some(solution) = outcome.solution() else {
        return;
    };
    let supported: Vec<bool> = caps.iter().map(|&s| solution.var_value(s) > 1e-7).collect();
    if !supported.iter().any(|&b| b) {
        return;
    }
    let mut norm = 0.0;
    for (w, &c) in weights.iter_mut().zip(&class_of) {
        if !supported[c] {
            *w = 0.0;
        }
        norm += *w;
    }
    for w in weights.iter_mut() {
        *w /= norm;
    }
}

/// Multiplies each weight by `x^count` (then renormalizes) so that the
/// expected count equals `target`.
fn scale_to_count(
    weights: &mut [f64],
    counts: &[usize],
    area: usize,
    target: f64,
) -> std::result::Result<(), (f64, f64)> {
    let mut hist = vec![0.0; area + 1];
    for (&c, &w) in counts.iter().zip(weights.iter()) {
        hist[c] += w;
    }
    let support: Vec<usize> = (0..=area).filter(|&c| hist[c] > 0.0).collect();
    let (lo, hi) = (support[0], *support.last().unwrap());
    let slack = 1e-9 * area as f64;
    if target < lo as f64 - slack || target > hi as f64 + slack {
        return Err((lo as f64 / area as f64, hi as f64 / area as f64));
    }
    // on the edge of the support only the extreme count survives
    if target <= lo as f64 + slack || target >= hi as f64 - slack {
        let keep = if target <= lo as f64 + slack { lo } else { hi };
        let mass = hist[keep];
        for (w, &c) in weights.iter_mut().zip(counts) {
            *w = if c == keep { *w / mass } else { 0.0 };
        }
        return Ok(());
    }

    // mean count under hist tilted by exp(s * count), evaluated stably
    let mean_at = |s: f64| -> f64 {
        let top = support
            .iter()
            .map(|&c| hist[c].ln() + s * c as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for &c in &support {
            let e = (hist[c].ln() + s * c as f64 - top).exp();
            num += c as f64 * e;
            den += e;
        }
        num / den
    };
    let (mut a, mut b) = (-1.0, 1.0);
    while mean_at(a) > target {
        a *= 2.0;
    }
    while mean_at(b) < target {
        b *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mean_at(mid) < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    let s = 0.5 * (a + b);
    let shift = support
        .iter()
        .map(|&c| s * c as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut norm = 0.0;
    for (w, &c) in weights.iter_mut().zip(counts) {
        *w *= (s * c as f64 - shift).exp();
        norm += *w;
    }
    for w in weights.iter_mut() {
        *w /= norm;
    }
    Ok(())
}

/// `KL(a || b) = Σ a(D) ln(a(D) / b(D))` over all datasets.
pub fn joint_kl(a: &JointDistribution, b: &JointDistribution) -> Result<f64> {
    if a.dims != b.dims {
        return Err(Error::DimMismatch {
            left: a.dims,
            right: b.dims,
        });
    }
    let m = a.dims.1;
    let mut total = 0.0;
    for (d, (&wa, &wb)) in a.weights.iter().zip(&b.weights).enumerate() {
        if wa == 0.0 {
            continue;
        }
        if wb == 0.0 {
            let c = d.trailing_zeros() as usize;
            return Err(Error::InfiniteDivergence {
                row: c / m + 1,
                col: c % m + 1,
            });
        }
        total += wa * (wa / wb).ln();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tile::{FreqTile, Tile};
    use approx::assert_abs_diff_eq;

    #[test]
    fn empty_tileset_is_uniform() {
        let j = ipf_maxent(&TileSet::empty((2, 3))).unwrap();
        assert!(j.weights().iter().all(|&w| (w - 1.0 / 64.0).abs() < 1e-15));
        assert_abs_diff_eq!(j.entropy(), 6.0 * 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn full_exact_tile_is_a_point_mass() {
        let ts = TileSet::new(
            (2, 2),
            [FreqTile::new(Tile::new(1..=2, 1..=2).unwrap(), 1.0).unwrap()],
        )
        .unwrap();
        let j = ipf_maxent(&ts).unwrap();
        assert_eq!(j, JointDistribution::point_mass((2, 2), 0b1111).unwrap());
    }

    #[test]
    fn point_mass_against_uniform() {
        let a = JointDistribution::point_mass((2, 2), 0b1010).unwrap();
        let b = JointDistribution::uniform((2, 2)).unwrap();
        assert_abs_diff_eq!(joint_kl(&a, &b).unwrap(), 4.0 * 2f64.ln(), epsilon = 1e-12);
        assert_eq!(joint_kl(&b, &b).unwrap(), 0.0);
        assert!(matches!(
            joint_kl(&b, &a),
            Err(Error::InfiniteDivergence { .. })
        ));
    }

    #[test]
    fn size_limit() {
        assert!(matches!(
            ipf_maxent(&TileSet::empty((4, 5))),
            Err(Error::SizeLimit { cells: 20, .. })
        ));
    }

    #[test]
    fn noisy_tile_spreads_evenly() {
        let ts = TileSet::new(
            (3, 3),
            [FreqTile::new(Tile::new(1..=2, 1..=3).unwrap(), 1.0 / 3.0).unwrap()],
        )
        .unwrap();
        let j = ipf_maxent(&ts).unwrap();
        let marg = j.marginals();
        for (c, p) in marg.iter().enumerate() {
            let expected = if c < 6 { 1.0 / 3.0 } else { 0.5 };
            assert_abs_diff_eq!(*p, expected, epsilon = 1e-9);
        }
        assert!(j.distance_to_product() < 1e-9);
    }

    #[test]
    fn jointly_forced_cell_converges() {
        // column 1 holds two ones, one of them in rows 2-3: row 1 must be a one
        let ts = TileSet::new(
            (3, 2),
            [
                FreqTile::new(Tile::new([1, 2, 3], [2]).unwrap(), 2.0 / 3.0).unwrap(),
                FreqTile::new(Tile::new([2, 3], [1]).unwrap(), 0.5).unwrap(),
                FreqTile::new(Tile::new([1, 2, 3], [1]).unwrap(), 2.0 / 3.0).unwrap(),
            ],
        )
        .unwrap();
        let p = ipf_maxent(&ts).unwrap().marginals();
        assert_eq!(p[0], 1.0);
        assert_abs_diff_eq!(p[2], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(p[1], 2.0 / 3.0, epsilon = 1e-9);
    }
}

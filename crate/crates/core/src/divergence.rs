//! KL divergence between fitted models and the normalized distance between
//! tile sets.
//!
//! For tile sets `T`, `U` and background `B`, with `M = T ∪ U ∪ B`:
//!
//! ```text
//! d(T, U; B) = (KL(M || U ∪ B) + KL(M || T ∪ B)) / KL(M || B)
//! ```
//!
//! and `d = 1` when `KL(M || B)` vanishes. All divergences are in nats.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::maxent::{self, EntryModel, FitOptions};
use crate::tile::TileSet;

/// `KL(M || B)` below `KL_ZERO_SCALE * n * m * tolerance^2` is treated as zero:
/// two fits that carry the same information only agree up to the fit tolerance.
/// Per-cell errors can exceed the per-tile residual several times over, and
/// near-deterministic cells weigh them up, hence the generous factor.
const KL_ZERO_SCALE: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceReport {
    pub value: f64,
    /// `KL(M || T ∪ B)`
    pub kl_m_t: f64,
    /// `KL(M || U ∪ B)`
    pub kl_m_u: f64,
    /// `KL(M || B)`
    pub kl_m_b: f64,
    pub used_jaccard_path: bool,
}

impl DistanceReport {
    fn from_divergences(kl_m_t: f64, kl_m_u: f64, kl_m_b: f64, zero: f64, jaccard: bool) -> Self {
        let value = if kl_m_b <= zero {
            1.0
        } else {
            (kl_m_u + kl_m_t) / kl_m_b
        };
        DistanceReport {
            value,
            kl_m_t,
            kl_m_u,
            kl_m_b,
            used_jaccard_path: jaccard,
        }
    }
}

/// Per-cell `KL(Bern(pa) || Bern(pb))`, `None` if infinite.
fn cell_kl(pa: f64, pb: f64) -> Option<f64> {
    let mut s = 0.0;
    if pa > 0.0 {
        if pb <= 0.0 {
            return None;
        }
        s += pa * (pa / pb).ln();
    }
    if pa < 1.0 {
        if pb >= 1.0 {
            return None;
        }
        s += (1.0 - pa) * ((1.0 - pa) / (1.0 - pb)).ln();
    }
    Some(s)
}

fn check_dims(a: &EntryModel, b: &EntryModel) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    Ok(())
}

fn infinite_at(index: usize, m: usize) -> Error {
    Error::InfiniteDivergence {
        row: index / m + 1,
        col: index % m + 1,
    }
}

/// `KL(a || b)` summed cell by cell in row-major order.
///
/// Meant for `b` fitted on a subset of `a`'s tiles; then every cell that is
/// deterministic under `b` is deterministic under `a` with the same value and
/// the result is finite.
pub fn kl(a: &EntryModel, b: &EntryModel) -> Result<f64> {
    check_dims(a, b)?;
    let m = a.dims().1;
    let mut total = 0.0;
    for (c, (&pa, &pb)) in a.probabilities().iter().zip(b.probabilities()).enumerate() {
        total += cell_kl(pa, pb).ok_or_else(|| infinite_at(c, m))?;
    }
    Ok(total)
}

/// `H(b) - H(a)`, which equals `KL(a || b)` when `b`'s tiles are a subset of `a`'s.
pub fn kl_by_entropy(a: &EntryModel, b: &EntryModel) -> Result<f64> {
    check_dims(a, b)?;
    let m = a.dims().1;
    for (c, (&pa, &pb)) in a.probabilities().iter().zip(b.probabilities()).enumerate() {
        if (pb == 0.0 || pb == 1.0) && pa != pb {
            return Err(infinite_at(c, m));
        }
    }
    Ok(maxent::entropy(b) - maxent::entropy(a))
}

/// Distance between `t` and `u` relative to background `b`.
///
/// When every tile of the three sets is exact this reduces to a Jaccard
/// distance on covered cells and no model is fitted.
pub fn distance(
    t: &TileSet,
    u: &TileSet,
    b: &TileSet,
    opts: &FitOptions,
) -> Result<DistanceReport> {
    if t.all_exact() && u.all_exact() && b.all_exact() {
        // surfaces conflicting exact tiles across the three sets
        maxent::exact_fastpath(&t.union(u)?.union(b)?)?;
        let (x, y) = exclusive_areas(t, u, b)?;
        let ln2 = std::f64::consts::LN_2;
        let only_t = x.difference(&y).len() as f64;
        let only_u = y.difference(&x).len() as f64;
        let either = x.union(&y).len() as f64;
        let mut report =
            DistanceReport::from_divergences(only_u * ln2, only_t * ln2, either * ln2, 0.0, true);
        report.value = jaccard_from_areas(&x, &y);
        return Ok(report);
    }
    general_distance(t, u, b, opts)
}

/// Distance through four model fits, whatever the tiles.
pub fn general_distance(
    t: &TileSet,
    u: &TileSet,
    b: &TileSet,
    opts: &FitOptions,
) -> Result<DistanceReport> {
    let m = t.union(u)?.union(b)?.canonical();
    let tb = t.union(b)?.canonical();
    let ub = u.union(b)?.canonical();
    let bb = b.canonical();

    let ((fm, ftb), (fub, fbb)) = rayon::join(
        || rayon::join(|| fit_joint(&m, opts), || maxent::fit(&tb, opts)),
        || rayon::join(|| maxent::fit(&ub, opts), || maxent::fit(&bb, opts)),
    );
    let fm = fm?;
    distance_from_models(&fm, &ftb?, &fub?, &fbb?, opts)
}

/// Fits `M`; failing to converge there means the three sets disagree.
pub(crate) fn fit_joint(m: &TileSet, opts: &FitOptions) -> Result<EntryModel> {
    maxent::fit(m, opts).map_err(|e| match e {
        Error::NoConvergence { .. } => Error::Inconsistent(Box::new(e)),
        other => other,
    })
}

/// Distance from already fitted models of `M`, `T ∪ B`, `U ∪ B` and `B`.
pub fn distance_from_models(
    m: &EntryModel,
    tb: &EntryModel,
    ub: &EntryModel,
    b: &EntryModel,
    opts: &FitOptions,
) -> Result<DistanceReport> {
    let kl_m_t = kl(m, tb)?;
    let kl_m_u = kl(m, ub)?;
    let kl_m_b = kl(m, b)?;
    Ok(DistanceReport::from_divergences(
        kl_m_t,
        kl_m_u,
        kl_m_b,
        kl_zero(m.dims(), opts),
        false,
    ))
}

pub(crate) fn kl_zero((n, m): (usize, usize), opts: &FitOptions) -> f64 {
    KL_ZERO_SCALE * (n * m) as f64 * opts.tolerance * opts.tolerance
}

fn exclusive_areas(
    t: &TileSet,
    u: &TileSet,
    b: &TileSet,
) -> Result<(crate::tile::Area, crate::tile::Area)> {
    for other in [u, b] {
        if other.dims() != t.dims() {
            return Err(Error::DimMismatch {
                left: t.dims(),
                right: other.dims(),
            });
        }
    }
    let bg = b.area_union();
    Ok((
        t.area_union().difference(&bg),
        u.area_union().difference(&bg),
    ))
}

fn jaccard_from_areas(x: &crate::tile::Area, y: &crate::tile::Area) -> f64 {
    let either = x.union(y).len();
    if either == 0 {
        return 1.0;
    }
    let both = x.intersection(y).len();
    1.0 - both as f64 / either as f64
}

/// Jaccard distance between the cells `t` and `u` cover outside the
/// background. Only defined for exact tiles.
pub fn jaccard_distance(t: &TileSet, u: &TileSet, b: &TileSet) -> Result<f64> {
    for set in [t, u, b] {
        if let Some((i, tile)) = set.iter().enumerate().find(|(_, x)| !x.is_exact()) {
            return Err(Error::NotExact {
                tile: i,
                alpha: tile.alpha(),
            });
        }
    }
    let (x, y) = exclusive_areas(t, u, b)?;
    Ok(jaccard_from_areas(&x, &y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxent::{exact_fastpath, fit};
    use crate::tile::{FreqTile, Tile};
    use crate::toy;
    use approx::assert_abs_diff_eq;

    fn opts() -> FitOptions {
        FitOptions::with_tolerance(1e-12)
    }

    fn empty() -> TileSet {
        TileSet::empty((5, 5))
    }

    #[test]
    fn kl_toy_value() {
        let m = fit(&toy::set(&[2, 4, 3, 5, 1]), &opts()).unwrap();
        let tb = fit(&toy::set(&[2, 4, 1]), &opts()).unwrap();
        let expected = 2.0 * 6f64.ln() + 10.0 * 1.2f64.ln();
        assert_abs_diff_eq!(kl(&m, &tb).unwrap(), expected, epsilon = 1e-9);
        assert_abs_diff_eq!(kl(&m, &tb).unwrap(), 5.4067, epsilon = 1e-3);
        assert_eq!(kl(&m, &m).unwrap(), 0.0);
    }

    #[test]
    fn kl_between_nested_exact_sets_counts_cells() {
        let t = exact_fastpath(&toy::set(&[2, 3, 4, 5])).unwrap();
        let u = exact_fastpath(&toy::set(&[2, 3])).unwrap();
        // T4 ∪ T5 adds 8 determined cells
        assert_abs_diff_eq!(kl(&t, &u).unwrap(), 8.0 * 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn kl_paths_agree_on_toy() {
        let m = fit(&toy::set(&[2, 4, 3, 5, 1]), &opts()).unwrap();
        for ks in [&[2, 3, 5, 1][..], &[2, 4, 1], &[1], &[]] {
            let b = fit(&toy::set(ks), &opts()).unwrap();
            assert_abs_diff_eq!(
                kl(&m, &b).unwrap(),
                kl_by_entropy(&m, &b).unwrap(),
                epsilon = 1e-9
            );
        }
        let a = fit(&toy::set(&[2, 4, 1]), &opts()).unwrap();
        assert_eq!(kl_by_entropy(&a, &a).unwrap(), 0.0);
        let uniform = EntryModel::uniform((5, 5));
        assert_abs_diff_eq!(
            kl_by_entropy(&a, &uniform).unwrap(),
            25.0 * 2f64.ln() - a.entropy(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn kl_detects_infinite_divergence() {
        let a = exact_fastpath(&toy::set(&[2])).unwrap();
        let b = exact_fastpath(&toy::set(&[3])).unwrap();
        // a leaves (3,1) at 1/2 while b pins it to 0
        assert!(matches!(
            kl(&a, &b),
            Err(Error::InfiniteDivergence { row: 3, col: 1 })
        ));
        assert!(kl_by_entropy(&a, &b).is_err());
        let small = EntryModel::uniform((2, 2));
        assert!(matches!(kl(&a, &small), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn toy_distances() {
        let t = toy::set(&[2, 4]);
        let u = toy::set(&[2, 3, 5]);
        let b = toy::set(&[1]);
        let d = distance(&t, &u, &empty(), &opts()).unwrap();
        assert!(d.used_jaccard_path);
        assert_abs_diff_eq!(d.value, 5.0 / 9.0, epsilon = 1e-12);

        let d = distance(&t, &u, &b, &opts()).unwrap();
        assert!(!d.used_jaccard_path);
        assert!(d.value >= 0.600 && d.value <= 0.610, "{}", d.value);
        assert_abs_diff_eq!(
            d.kl_m_t,
            2.0 * 6f64.ln() + 10.0 * 1.2f64.ln(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(d.kl_m_b, 22.0 * 2f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(
            d.kl_m_u,
            2.0 * 3f64.ln() + 4.0 * 1.5f64.ln(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn jaccard_matches_general_path_on_toy() {
        let t = toy::set(&[2, 4]);
        let u = toy::set(&[2, 3, 5]);
        let j = distance(&t, &u, &empty(), &opts()).unwrap();
        let g = general_distance(&t, &u, &empty(), &opts()).unwrap();
        assert_abs_diff_eq!(j.value, g.value, epsilon = 1e-12);
        assert_abs_diff_eq!(j.kl_m_t, g.kl_m_t, epsilon = 1e-12);
        assert_abs_diff_eq!(j.kl_m_u, g.kl_m_u, epsilon = 1e-12);
        assert_abs_diff_eq!(j.kl_m_b, g.kl_m_b, epsilon = 1e-12);
    }

    #[test]
    fn jaccard_edge_cases() {
        let t = toy::set(&[2, 4]);
        assert_eq!(jaccard_distance(&t, &t, &empty()).unwrap(), 0.0);
        assert_eq!(
            jaccard_distance(&toy::set(&[2]), &toy::set(&[4]), &empty()).unwrap(),
            1.0
        );
        // nothing left outside the background
        assert_eq!(jaccard_distance(&t, &t, &t).unwrap(), 1.0);
        assert!(matches!(
            jaccard_distance(&toy::set(&[1]), &t, &empty()),
            Err(Error::NotExact { tile: 0, .. })
        ));
    }

    #[test]
    fn distance_is_one_without_information() {
        let e = empty();
        let d = distance(&e, &e, &e, &opts()).unwrap();
        assert_eq!(d.value, 1.0);
        // T's tile carries no more than the background already says
        let b = toy::set(&[1]);
        let d = distance(&b, &b, &b, &opts()).unwrap();
        assert_eq!(d.value, 1.0);
    }

    #[test]
    fn distance_surfaces_inconsistency() {
        let tile = Tile::new(1..=2, 1..=2).unwrap();
        let t = TileSet::new((2, 2), [FreqTile::new(tile.clone(), 0.25).unwrap()]).unwrap();
        let u = TileSet::new((2, 2), [FreqTile::new(tile, 0.75).unwrap()]).unwrap();
        let o = FitOptions {
            max_sweeps: 20,
            ..FitOptions::default()
        };
        let err = distance(&t, &u, &TileSet::empty((2, 2)), &o).unwrap_err();
        assert!(matches!(err, Error::Inconsistent(_)), "{err}");

        let a = TileSet::new(
            (2, 2),
            [FreqTile::new(Tile::cell(1, 1).unwrap(), 1.0).unwrap()],
        )
        .unwrap();
        let z = TileSet::new(
            (2, 2),
            [FreqTile::new(Tile::new([1], [1, 2]).unwrap(), 0.0).unwrap()],
        )
        .unwrap();
        assert!(matches!(
            distance(&a, &z, &TileSet::empty((2, 2)), &o),
            Err(Error::ConflictingExactTiles { .. })
        ));
    }

    #[test]
    fn distance_is_symmetric_bitwise() {
        let t = toy::set(&[2, 4]);
        let u = toy::set(&[2, 3, 5]);
        let b = toy::set(&[1]);
        let o = FitOptions::default();
        assert_eq!(
            distance(&t, &u, &b, &o).unwrap().value,
            distance(&u, &t, &b, &o).unwrap().value
        );
    }
}

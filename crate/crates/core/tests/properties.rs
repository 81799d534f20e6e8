mod common;

use std::path::Path;

use proptest::prelude::*;
use tilediff::divergence::{distance, jaccard_distance, kl, kl_by_entropy};
use tilediff::io::{format_f64, parse_tiles, write_tiles};
use tilediff::maxent::{fit, FitOptions};
use tilediff::TileSet;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn floats_round_trip(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        prop_assert_eq!(format_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn tile_files_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, m) = common::dims(&mut rng, 1, 12);
        let data = common::dataset(&mut rng, n, m, 0.1..0.9);
        let ts = common::noisy_set(&mut rng, &data, 8);
        let mut buf = Vec::new();
        write_tiles(&ts, &mut buf).unwrap();
        let back = parse_tiles(std::str::from_utf8(&buf).unwrap(), Path::new("p"), (n, m), None).unwrap();
        prop_assert_eq!(back, ts);
    }

    #[test]
    fn fitted_models_hit_every_frequency(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, m) = common::dims(&mut rng, 1, 10);
        let data = common::dataset(&mut rng, n, m, 0.1..0.9);
        let mut ts = common::noisy_set(&mut rng, &data, 6);
        for t in common::exact_set(&mut rng, &data, 3).iter() {
            ts.push(t.clone()).unwrap();
        }
        let model = fit(&ts, &FitOptions::default()).unwrap();
        for t in ts.iter() {
            prop_assert!((model.frequency(&t.tile).unwrap() - t.alpha()).abs() <= 1e-6);
        }
        prop_assert!(model.probabilities().iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn distance_is_symmetric_and_bounded(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, m) = common::dims(&mut rng, 1, 8);
        let data = common::dataset(&mut rng, n, m, 0.2..0.8);
        let t = common::noisy_set(&mut rng, &data, 4);
        let u = common::noisy_set(&mut rng, &data, 4);
        let b = common::noisy_set(&mut rng, &data, 2);
        let o = FitOptions::default();
        let tu = distance(&t, &u, &b, &o).unwrap().value;
        let ut = distance(&u, &t, &b, &o).unwrap().value;
        prop_assert!((tu - ut).abs() <= 1e-9);
        prop_assert!((-1e-9..=2.0 + 1e-9).contains(&tu));
        // a set adding nothing over the background sits at distance 1 by convention
        let own = distance(&t, &t, &b, &o).unwrap();
        let want = if own.kl_m_b > 1e3 * (n * m) as f64 * o.tolerance.powi(2) { 0.0 } else { 1.0 };
        prop_assert!((own.value - want).abs() <= 1e-9);
    }

    #[test]
    fn exact_distances_are_jaccard(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, m) = common::dims(&mut rng, 1, 8);
        let data = common::dataset(&mut rng, n, m, 0.2..0.8);
        let t = common::exact_set(&mut rng, &data, 4);
        let u = common::exact_set(&mut rng, &data, 4);
        let b = common::exact_set(&mut rng, &data, 2);
        let j = jaccard_distance(&t, &u, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j, jaccard_distance(&u, &t, &b).unwrap());
        let d = distance(&t, &u, &b, &FitOptions::default()).unwrap().value;
        prop_assert!((d - j).abs() <= 1e-9);
    }

    #[test]
    fn divergence_is_entropy_gap_under_refinement(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, m) = common::dims(&mut rng, 1, 8);
        let data = common::dataset(&mut rng, n, m, 0.2..0.8);
        let coarse = common::noisy_set(&mut rng, &data, 3);
        let extra = common::noisy_set(&mut rng, &data, 3);
        let fine = coarse.union(&extra).unwrap();
        let o = FitOptions::with_tolerance(1e-12);
        let a = fit(&fine, &o).unwrap();
        let b = fit(&coarse, &o).unwrap();
        let d = kl(&a, &b).unwrap();
        prop_assert!(d >= -1e-12);
        prop_assert!((d - kl_by_entropy(&a, &b).unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn empty_left_side_is_one(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, m) = common::dims(&mut rng, 1, 8);
        let data = common::dataset(&mut rng, n, m, 0.2..0.8);
        let u = common::exact_set(&mut rng, &data, 4);
        let empty = TileSet::empty((n, m));
        let d = distance(&empty, &u, &empty, &FitOptions::default()).unwrap().value;
        prop_assert!((d - 1.0).abs() <= 1e-12);
    }
}

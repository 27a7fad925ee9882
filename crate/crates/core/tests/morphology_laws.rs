//! Duality, exact correlation and opening/closing laws on random solids.

mod common;

use common::*;
use hybridplan::morphology::LatticeSet;
use hybridplan::{TranslationSet, VoxelSolid};
use proptest::prelude::*;
use rand::Rng;

fn solid(max: usize, density: f64) -> impl Strategy<Value = VoxelSolid> {
    [1..=max, 1..=max, 1..=max].prop_flat_map(move |dims| {
        prop::collection::vec(prop::bool::weighted(density), dims[0] * dims[1] * dims[2])
            .prop_map(move |bits| VoxelSolid::from_fn(grid(dims), |p| bits[grid(dims).index(p)]))
    })
}

fn lattice(max: usize) -> impl Strategy<Value = LatticeSet> {
    prop::collection::vec([-(max as i64)..max as i64, -(max as i64)..max as i64, -(max as i64)..max as i64], 0..60)
        .prop_map(LatticeSet::from_points)
}

fn kernel() -> impl Strategy<Value = LatticeSet> {
    prop::collection::vec([-2i64..=2, -2i64..=2, -2i64..=2], 0..6).prop_map(|mut pts| {
        pts.push([0; 3]);
        LatticeSet::from_points(pts)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn correlation_matches_pair_count(a in lattice(12), b in lattice(12)) {
        prop_assert_eq!(check_correlation(&a, &b), Ok(()));
    }

    #[test]
    fn dilation_complement_is_erosion_of_complement(b in solid(24, 0.05), seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = TranslationSet::from_offsets(1.0, (0..r.gen_range(1..8)).map(|_| [0; 3].map(|_| r.gen_range(-4i64..=4)))).unwrap();
        prop_assert_eq!(check_duality(&t, &b), Ok(()));
    }

    #[test]
    fn opening_and_closing_laws(s in solid(14, 0.6), b in kernel(), c in kernel()) {
        prop_assert_eq!(check_opening_closing(&s, &b, &c), Ok(()));
    }

    #[test]
    fn opening_without_assembly(s in solid(14, 0.6), b in kernel()) {
        prop_assert_eq!(check_opening_closing(&s, &b, &LatticeSet::empty()), Ok(()));
    }
}

#[test]
fn full_size_correlation() {
    let mut r = rng(7);
    let g = grid([24, 24, 24]);
    let a = LatticeSet::from_solid(&random_solid(&mut r, g, 0.02));
    let b = LatticeSet::from_solid(&random_solid(&mut r, g, 0.02));
    assert_eq!(check_correlation(&a, &b), Ok(()));
}

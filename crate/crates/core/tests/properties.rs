mod common;

use adaptile::attention::{equalize, NormMap};
use adaptile::geometry::{check_exact_cover, CellGrid, PixelMask};
use adaptile::mnc::{partition_grid, RectilinearRegion};
use adaptile::regions::{determine_threshold, EmptyMaskPolicy};
use adaptile::trace::{parse_traces_from, write_traces, TraceSet, ViewportSample};
use proptest::prelude::*;

fn sample() -> impl Strategy<Value = (u32, u32, f64, f64)> {
    // times on a 1 ms lattice so the CSV text round-trips exactly
    (0u32..5, 0u32..20_000, -180.0f64..180.0, -90.0f64..=90.0)
}

proptest! {
    #[test]
    fn traces_round_trip_through_csv(rows in prop::collection::vec(sample(), 1..60)) {
        let samples: Vec<ViewportSample> = rows
            .iter()
            .map(|&(u, ms, y, p)| ViewportSample::new(u, ms as f64 / 1000.0, y, p).unwrap())
            .collect();
        let set = TraceSet::from_samples("v", samples);
        let mut buf = Vec::new();
        write_traces(&set, &mut buf).unwrap();
        let back = parse_traces_from(buf.as_slice(), "v").unwrap();
        prop_assert_eq!(back, set);
    }

    #[test]
    fn equalization_preserves_order(raw in prop::collection::vec(0.0f64..=1.0, 1..300)) {
        let eq = equalize(&raw);
        for i in 0..raw.len() {
            if raw[i] == 0.0 {
                prop_assert_eq!(eq[i], 0);
            }
            for j in 0..raw.len() {
                if raw[i] < raw[j] {
                    prop_assert!(eq[i] <= eq[j]);
                } else if raw[i] == raw[j] {
                    prop_assert_eq!(eq[i], eq[j]);
                }
            }
        }
    }

    #[test]
    fn coverage_does_not_grow_with_threshold(
        levels in prop::collection::vec(any::<u8>(), 64),
        users in prop::collection::vec(prop::collection::vec(any::<bool>(), 64), 1..6),
    ) {
        prop_assume!(users.iter().all(|u| u.iter().any(|&b| b)));
        let norm = NormMap::from_levels(8, 8, levels).unwrap();
        let masks: Vec<PixelMask> = users.into_iter().map(|b| PixelMask::from_bits(8, 8, b).unwrap()).collect();
        let refs: Vec<&PixelMask> = masks.iter().collect();
        let candidates = [0.1, 0.3, 0.5, 0.7, 0.9];
        let res = determine_threshold(&norm, &refs, &candidates, 80.0, EmptyMaskPolicy::Reject).unwrap();
        let covs: Vec<f64> = res.coverage_by_candidate.iter().map(|c| c.1).collect();
        prop_assert!(covs.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{:?}", covs);
    }

    #[test]
    fn mnc_exactly_covers_random_grids(bits in any::<u64>()) {
        let mask = bits & ((1u64 << 36) - 1);
        let grid = CellGrid::from_cells(common::BOX, common::BOX, common::cells(mask));
        let rects = partition_grid(&grid).unwrap();
        prop_assert!(check_exact_cover(&rects, &grid).is_ok());
        // each component is at least as costly as its brute-force minimum
        let mut lower = 0;
        for comp in grid.components() {
            let m = comp.iter().fold(0u64, |m, &(r, c)| m | common::bit(r, c));
            lower += common::min_rect_partition(m);
            prop_assert!(RectilinearRegion::new(comp).is_ok());
        }
        prop_assert!(rects.len() >= lower);
    }
}

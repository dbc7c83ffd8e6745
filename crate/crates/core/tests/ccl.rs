mod common;

use common::{flood_fill_labels, random_mask};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use textkernel::{label_components, label_components_parallel, BitMask, Connectivity};

fn both() -> [(Connectivity, bool); 2] {
    [(Connectivity::Four, false), (Connectivity::Eight, true)]
}

#[test]
fn every_3x3_mask_matches_flood_fill() {
    for code in 0u32..512 {
        let m = BitMask::from_fn(3, 3, |x, y| code >> (y * 3 + x) & 1 == 1);
        for (conn, eight) in both() {
            let (expected, count) = flood_fill_labels(&m, eight);
            let seq = label_components(&m, conn);
            assert_eq!(seq.as_slice(), &expected[..], "mask {code:09b} {conn}");
            assert_eq!(seq.count(), count);
            for tiles in 1..=3 {
                assert_eq!(label_components_parallel(&m, conn, tiles), seq);
            }
        }
    }
}

#[test]
fn small_random_masks_match_flood_fill() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..2000 {
        let (w, h) = (rng.gen_range(1..9), rng.gen_range(1..9));
        let density = rng.gen_range(0.1..0.9);
        let m = random_mask(&mut rng, w, h, density);
        for (conn, eight) in both() {
            let (expected, _) = flood_fill_labels(&m, eight);
            assert_eq!(label_components(&m, conn).as_slice(), &expected[..]);
        }
    }
}

#[test]
fn parallel_matches_sequential_across_tile_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let (w, h) = (rng.gen_range(1..80), rng.gen_range(1..80));
        let density = rng.gen_range(0.05..0.95);
        let m = random_mask(&mut rng, w, h, density);
        for (conn, _) in both() {
            let seq = label_components(&m, conn);
            for tiles in [1, 2, 4, 8, 100] {
                assert_eq!(
                    label_components_parallel(&m, conn, tiles),
                    seq,
                    "{w}x{h} tiles {tiles}"
                );
            }
        }
    }
}

#[test]
fn spiral_crossing_every_band_is_one_component() {
    let n = 41;
    let mut m = BitMask::new(n, n);
    let (mut lo, mut hi) = (0usize, n - 1);
    while lo + 2 <= hi {
        for i in lo..=hi {
            m.set(i, lo, true);
            m.set(hi, i, true);
            m.set(i, hi, true);
        }
        for i in lo + 2..=hi {
            m.set(lo, i, true);
        }
        m.set(lo + 1, lo + 2, true);
        lo += 2;
        hi -= 2;
    }
    let seq = label_components(&m, Connectivity::Four);
    assert_eq!(seq.count(), 1);
    for tiles in [2, 4, 8, 41] {
        assert_eq!(
            label_components_parallel(&m, Connectivity::Four, tiles),
            seq
        );
    }
}

proptest! {
    #[test]
    fn eight_never_has_more_components_than_four(
        bits in proptest::collection::vec(0u8..2, 1..300),
        width in 1usize..18,
    ) {
        let h = bits.len() / width;
        prop_assume!(h >= 1);
        let m = BitMask::from_bits(width, h, bits[..width * h].to_vec()).unwrap();
        let four = label_components(&m, Connectivity::Four);
        let eight = label_components(&m, Connectivity::Eight);
        prop_assert!(eight.count() <= four.count());
        prop_assert_eq!(four.to_mask(), m.clone());
        prop_assert_eq!(eight.to_mask(), m);
    }

    #[test]
    fn adding_a_pixel_changes_count_by_at_most_one_up(
        bits in proptest::collection::vec(0u8..2, 4..200),
        width in 2usize..14,
        pick in any::<prop::sample::Index>(),
    ) {
        let h = bits.len() / width;
        prop_assume!(h >= 1);
        let mut m = BitMask::from_bits(width, h, bits[..width * h].to_vec()).unwrap();
        let before = label_components(&m, Connectivity::Eight).count();
        let i = pick.index(width * h);
        m.set(i % width, i / width, true);
        let after = label_components(&m, Connectivity::Eight).count();
        prop_assert!(after <= before + 1);
    }
}

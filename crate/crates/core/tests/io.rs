use proptest::prelude::*;
use textkernel::io::annotation::{
    format_detection, format_polygon, parse_annotations_str, ParseMode,
};
use textkernel::io::mapfile::{read_map, write_map, MapData, MAGIC};
use textkernel::{BitMask, Error, Polygon};

fn float_bits(m: &MapData) -> Vec<u32> {
    match m {
        MapData::Float { values, .. } => values.iter().map(|v| v.to_bits()).collect(),
        MapData::Mask(_) => panic!("expected floats"),
    }
}

proptest! {
    #[test]
    fn mask_round_trip(w in 1usize..40, h in 1usize..12, seed in any::<u64>()) {
        let m = BitMask::from_fn(w, h, |x, y| (seed.rotate_left((x * 7 + y * 13) as u32 % 64) & 1) == 1);
        let data = MapData::Mask(m);
        let bytes = data.encode();
        prop_assert_eq!(bytes.len(), 13 + w.div_ceil(8) * h);
        prop_assert_eq!(MapData::decode(&bytes).unwrap(), data);
    }

    #[test]
    fn float_round_trip_is_bit_exact(w in 1usize..20, h in 1usize..8, raw in proptest::collection::vec(any::<u32>(), 160)) {
        let values: Vec<f32> = raw[..w * h].iter().map(|&b| f32::from_bits(b)).collect();
        let data = MapData::Float { width: w, height: h, values };
        let back = MapData::decode(&data.encode()).unwrap();
        prop_assert_eq!(back.dims(), (w, h));
        prop_assert_eq!(float_bits(&back), float_bits(&data));
    }

    #[test]
    fn polygon_lines_round_trip(coords in proptest::collection::vec((-500i64..500, -500i64..500), 3..10)) {
        let poly = Polygon::new(coords.iter().map(|&(x, y)| (x as f64, y as f64)));
        prop_assume!(poly.is_ok());
        let poly = poly.unwrap();
        let line = format_polygon(&poly);
        let parsed = parse_annotations_str(&line, ParseMode::Strict).unwrap();
        prop_assert_eq!(&parsed.polygons[0], &poly);
        let scored = parse_annotations_str(&format_detection(&poly, 0.5), ParseMode::Strict).unwrap();
        prop_assert_eq!(&scored.polygons[0], &poly);
    }
}

#[test]
fn one_by_one_and_odd_widths() {
    for (w, h) in [(1, 1), (7, 3), (9, 2), (17, 1)] {
        let m = BitMask::from_fn(w, h, |x, y| (x + y) % 3 != 1);
        let data = MapData::Mask(m);
        assert_eq!(MapData::decode(&data.encode()).unwrap(), data);
    }
}

#[test]
fn header_layout() {
    let bytes = MapData::Mask(BitMask::from_fn(10, 2, |x, _| x == 0 || x == 9)).encode();
    assert_eq!(&bytes[..4], MAGIC);
    assert_eq!(&bytes[4..8], &10u32.to_le_bytes());
    assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
    assert_eq!(bytes[12], 0);
    assert_eq!(
        &bytes[13..],
        &[0b1000_0000, 0b0100_0000, 0b1000_0000, 0b0100_0000]
    );
}

#[test]
fn corrupt_files_are_format_errors() {
    let good = MapData::Mask(BitMask::filled(5, 5)).encode();
    let mut bad_magic = good.clone();
    bad_magic[0] = b'X';
    let mut bad_dtype = good.clone();
    bad_dtype[12] = 7;
    let truncated = &good[..good.len() - 1];
    for bytes in [&bad_magic[..], &bad_dtype[..], truncated, &good[..5]] {
        assert!(matches!(MapData::decode(bytes), Err(Error::MapFormat(_))));
    }
}

#[test]
fn files_round_trip_through_disk() {
    let dir = std::env::temp_dir().join(format!("textkernel-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.fkm");
    let data = MapData::Float {
        width: 3,
        height: 2,
        values: vec![0.0, -1.5, 2.25, 1e-30, 7.0, 3.0],
    };
    write_map(&path, &data).unwrap();
    assert_eq!(read_map(&path).unwrap(), data);
    assert!(matches!(
        read_map(&dir.join("missing.fkm")),
        Err(Error::Io(_))
    ));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn annotation_rules() {
    let ok = parse_annotations_str(
        "0,0,10,0,10,5,0,5\n\n1,1,9,1,9,9,1,9,###\n",
        ParseMode::Strict,
    )
    .unwrap();
    assert_eq!(ok.polygons.len(), 2);
    assert_eq!(ok.polygons[0], Polygon::rect(0.0, 0.0, 10.0, 5.0).unwrap());
    let err =
        parse_annotations_str("0,0,10,0,10,5,0,5\n0,0,10,0,10\n", ParseMode::Strict).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }));
    let lenient =
        parse_annotations_str("0,0,10,0,10,5,0,5\n0,0,10,0,10\nfoo\n", ParseMode::Lenient).unwrap();
    assert_eq!(lenient.polygons.len(), 1);
    assert_eq!(
        lenient.warnings.iter().map(|w| w.0).collect::<Vec<_>>(),
        vec![2, 3]
    );
}

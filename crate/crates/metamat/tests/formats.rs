use std::path::Path;

use metamat::config::FileConfig;
use metamat::formats::csvio::{self, LabelRecord};
use metamat::formats::mksm::Mksm;
use metamat::formats::{mksd, npy};
use metamat::pipeline::gen::GenArgs;
use metamat::PipelineError;
use metamat_core::geometry::UnitCell;
use metamat_core::linalg::Matrix;
use proptest::prelude::*;

fn cells_strategy() -> impl Strategy<Value = Vec<UnitCell>> {
    (1usize..6, 1usize..6, 0usize..5).prop_flat_map(|(w, h, n)| {
        proptest::collection::vec(proptest::collection::vec(0u8..2, w * h), n)
            .prop_map(move |v| v.into_iter().map(|c| UnitCell::new(w, h, c).unwrap()).collect())
    })
}

proptest! {
    #[test]
    fn mksd_round_trip_is_lossless(cells in cells_strategy()) {
        let p = Path::new("x.mksd");
        let bytes = mksd::encode(&cells).unwrap();
        let back = mksd::decode(&bytes, p).unwrap();
        prop_assert_eq!(&back, &cells);
        prop_assert_eq!(mksd::encode(&back).unwrap(), bytes);
    }

    #[test]
    fn mksm_round_trip_is_lossless(
        rows in 0usize..5,
        cols in 1usize..5,
        seed in proptest::collection::vec(-1e300f64..1e300, 25),
        extra in proptest::collection::vec(proptest::num::f64::ANY, 0..7),
    ) {
        let m = Matrix::from_fn(rows, cols, |i, j| seed[(i * cols + j) % seed.len()]);
        let mut c = Mksm::new("test");
        c.set_attr("n", rows);
        c.set_attr("name", "abc");
        c.push_matrix("m", &m);
        c.push_vector("v", &extra);
        let bytes = c.encode();
        let back = Mksm::decode(&bytes, Path::new("x.mksm")).unwrap();
        prop_assert_eq!(back.matrix("m").unwrap(), m);
        let v = back.vector("v").unwrap();
        prop_assert_eq!(v.len(), extra.len());
        prop_assert!(v.iter().zip(&extra).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(back.encode(), bytes);
    }
}

fn format_message(e: PipelineError) -> String {
    match e {
        PipelineError::Format { message, .. } => message,
        other => panic!("expected a format error, got {other:?}"),
    }
}

#[test]
fn mksd_errors_carry_byte_offsets() {
    let cells = vec![UnitCell::from_rows(&[[0u8, 1], [1, 1]]).unwrap(); 2];
    let good = mksd::encode(&cells).unwrap();
    let p = Path::new("bad.mksd");

    let mut bad_magic = good.clone();
    bad_magic[0] = b'X';
    assert!(format_message(mksd::decode(&bad_magic, p).unwrap_err()).starts_with("byte 0:"));

    let mut bad_version = good.clone();
    bad_version[4] = 9;
    assert!(format_message(mksd::decode(&bad_version, p).unwrap_err()).starts_with("byte 4:"));

    let mut bad_pixel = good.clone();
    bad_pixel[14 + 4 + 2] = 7;
    let msg = format_message(mksd::decode(&bad_pixel, p).unwrap_err());
    assert!(msg.starts_with("byte 20:") && msg.contains("cell 1"), "{msg}");

    let truncated = &good[..good.len() - 1];
    assert!(format_message(mksd::decode(truncated, p).unwrap_err()).contains("length mismatch"));
}

#[test]
fn mksm_rejects_wrong_kind_and_truncation() {
    let mut c = Mksm::new("pca");
    c.push_vector("v", &[1.0, 2.0]);
    let bytes = c.encode();
    let p = Path::new("m.mksm");
    assert!(Mksm::decode(&bytes, p).unwrap().expect_kind("gpr", p).is_err());
    assert!(format_message(Mksm::decode(&bytes[..bytes.len() - 3], p).unwrap_err()).contains("past the end"));
    assert!(Mksm::decode(&bytes[..2], p).is_err());
}

#[test]
fn npy_cells_round_trip_and_validation() {
    let a = UnitCell::new(4, 4, (0..16).map(|i| (i % 3 == 0) as u8).collect()).unwrap();
    let b = UnitCell::filled(4, 4, 1).unwrap();
    let bytes = npy::encode(&[a.clone(), b.clone()]).unwrap();
    let p = Path::new("c.npy");
    assert_eq!(npy::decode(&bytes, p, 4).unwrap(), vec![a.clone(), b]);
    assert!(format_message(npy::decode(&bytes, p, 96).unwrap_err()).contains("shape"));

    let mut raw = vec![0u8; 14 * 16];
    for cell in 2..14 {
        raw[cell * 16 + 5] = 2;
    }
    let msg = format_message(npy::decode(&npy::encode_raw(&[14, 4, 4], &raw).unwrap(), p, 4).unwrap_err());
    assert!(msg.starts_with("12 non-binary records"), "{msg}");
    assert!(msg.contains("record 2 has value 2 at (1, 1)"), "{msg}");
    assert!(msg.contains("record 11 ") && !msg.contains("record 12 "), "{msg}");
    assert!(msg.contains("and 2 more"), "{msg}");
}

#[test]
fn label_csv_round_trip_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labels.csv");
    let records = vec![
        LabelRecord { index: 0, normalized_c11: 0.123456789012345, converged: true, iterations: 12, residual: 1e-9 },
        LabelRecord { index: 3, normalized_c11: 1.0 / 3.0, converged: false, iterations: 500, residual: 2.5e-3 },
    ];
    csvio::write_labels(&path, &records).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("index,normalized_c11,converged,iterations,residual\n"));
    assert_eq!(csvio::read_labels(&path).unwrap(), records);
}

#[test]
fn missing_artifact_names_its_producer() {
    let err = csvio::read_labels(Path::new("/nonexistent/labels.csv")).unwrap_err();
    assert_eq!(err.exit_code(), 5);
    assert!(err.to_string().contains("metamat label"));
}

#[test]
fn config_fills_unset_flags_and_flags_win() {
    let text = "seed = 9\n[gen]\ncount = 40\ntile = 24\n";
    let file = FileConfig::parse(text, Path::new("c.toml")).unwrap();
    assert_eq!(file.seed(), Some(9));
    let flags = GenArgs { count: Some(5), ..GenArgs::default() };
    let merged = file.merge("gen", &flags).unwrap();
    assert_eq!(merged.count, Some(5));
    assert_eq!(merged.tile, Some(24));
    assert!(FileConfig::parse("[gen]\nbogus = 1\n", Path::new("c.toml")).unwrap().merge("gen", &flags).is_err());
    assert!(FileConfig::parse("[nosuch]\n", Path::new("c.toml")).is_err());
    assert!(FileConfig::parse("count = [", Path::new("c.toml")).is_err());
}

use std::fs;

use gawd_core::io::{load, save, sidecar_path, Format};
use gawd_core::{make_two_layer_grid, Data, ErrorKind, Signal};
use gawd_core::synth::GridPhantomParams;

fn small_grid() -> Data<f64> {
    let p = GridPhantomParams {
        ny: 3,
        nx: 4,
        ..GridPhantomParams::default()
    };
    Data::Grid(make_two_layer_grid(&p).unwrap())
}

#[test]
fn raw_grid_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.raw");
    let data = small_grid().with_noise(10.0, 3).unwrap();
    save(&path, &data, Format::Raw).unwrap();
    assert!(sidecar_path(&path).exists());
    let back = load(&path, Format::Raw, None).unwrap();
    assert_eq!(back.shape(), vec![3, 4, 4096]);
    assert_eq!(back.sample_rate_hz(), data.sample_rate_hz());
    for (a, b) in back.samples().iter().zip(data.samples()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn csv_grid_and_signal_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let grid = small_grid().with_noise(5.0, 9).unwrap();
    let path = dir.path().join("grid.csv");
    save(&path, &grid, Format::Csv).unwrap();
    let back = load(&path, Format::Csv, Some(grid.sample_rate_hz())).unwrap();
    assert_eq!(back.shape(), grid.shape());
    assert_eq!(back.samples(), grid.samples());

    let s = Data::Signal(Signal::new(vec![0.1, -1e-300, 3.5e10, 0.0], 1e6).unwrap());
    let path = dir.path().join("line.csv");
    save(&path, &s, Format::Csv).unwrap();
    let back = load(&path, Format::Csv, Some(1e6)).unwrap();
    assert_eq!(back.kind(), "signal");
    assert_eq!(back.samples(), s.samples());
}

#[test]
fn sidecar_length_mismatch_names_both_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.raw");
    let bytes: Vec<u8> = (0..99).flat_map(|i| (i as f64).to_le_bytes()).collect();
    fs::write(&path, bytes).unwrap();
    fs::write(
        sidecar_path(&path),
        r#"{"dtype":"f64","byte_order":"little","sample_rate_hz":1e6,"length":100}"#,
    )
    .unwrap();
    let err = load(&path, Format::Raw, None).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("100") && msg.contains("99"), "{msg}");
    assert_eq!(err.kind(), ErrorKind::Io);
}

#[test]
fn missing_sidecar_is_a_load_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bare.raw");
    fs::write(&path, 1.0f64.to_le_bytes()).unwrap();
    let err = load(&path, Format::Raw, None).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Io);
    assert!(err.to_string().contains("meta.json"), "{err}");
}

#[test]
fn csv_without_rate_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    fs::write(&path, "1\n2\n").unwrap();
    let err = load(&path, Format::Csv, None).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::InvalidParameter);
}

#[test]
fn bad_csv_cell_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    fs::write(&path, "r0c0,r0c1\n1,2\n3,oops\n").unwrap();
    let msg = load(&path, Format::Csv, Some(1.0)).unwrap_err().to_string();
    assert!(msg.contains("line 3") && msg.contains("column 2"), "{msg}");
}

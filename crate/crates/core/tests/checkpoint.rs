mod common;

use common::random_field;
use mkdv_core::checkpoint::{Checkpoint, MAGIC, VERSION};
use mkdv_core::torus::TorusGrid;
use mkdv_core::Error;

fn sample() -> Checkpoint {
    let g = TorusGrid::new(2.5, 64).unwrap();
    Checkpoint {
        field: random_field(g, 11, 1.0),
        t: 0.123456789,
        phase: -3.25,
    }
}

#[test]
fn round_trip_is_bit_exact() {
    let ck = sample();
    let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap();
    assert_eq!(back, ck);
    for (a, b) in back.field.coeffs().iter().zip(ck.field.coeffs()) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.bin");
    ck.write(&p).unwrap();
    assert_eq!(Checkpoint::read(&p).unwrap(), ck);
}

#[test]
fn header_layout() {
    let b = sample().to_bytes();
    assert_eq!(&b[..8], MAGIC);
    assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), VERSION);
    assert_eq!(u64::from_le_bytes(b[12..20].try_into().unwrap()), 64);
    assert_eq!(b.len(), 44 + 16 * 64);
}

#[test]
fn corrupt_files_are_format_errors() {
    let good = sample().to_bytes();
    let mut bad_magic = good.clone();
    bad_magic[0] = b'X';
    let mut bad_version = good.clone();
    bad_version[8..12].copy_from_slice(&(VERSION + 1).to_le_bytes());
    let mut bad_grid = good.clone();
    bad_grid[12..20].copy_from_slice(&3u64.to_le_bytes());
    let mut long = good.clone();
    long.push(0);
    for bytes in [&bad_magic[..], &bad_version, &bad_grid, &good[..good.len() - 1], &long, &good[..5], &[]] {
        assert!(matches!(Checkpoint::from_bytes(bytes), Err(Error::Format(_))));
    }
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(Checkpoint::read(&dir.path().join("none.bin")), Err(Error::Io(_))));
}

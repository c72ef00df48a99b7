//! Regenerates the committed binary fixtures under `tests/fixtures/`.
//!
//! The fixtures pin the file format and the deterministic generators:
//! any platform must reproduce these exact bytes from the same seeds.
//! Run from the crate root after a deliberate format change:
//!
//! ```text
//! cargo run -p wilson-cg --example make_fixtures
//! ```

use std::path::Path;
use wilson_cg::io::{fnv1a64, gauge_payload, fermion_payload, write_fermion, write_gauge};
use wilson_cg::{FermionField, GaugeField, LatticeDims};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    std::fs::create_dir_all(&dir).expect("fixture directory");

    let dims = LatticeDims::new(2, 2).expect("valid dims");

    let gauge = GaugeField::random(dims, 7);
    let gauge_path = dir.join("gauge_2x2x2x2_seed7.bin");
    write_gauge(&gauge_path, &gauge).expect("write gauge fixture");
    println!(
        "{}: payload checksum {:#018x}",
        gauge_path.display(),
        fnv1a64(&gauge_payload(&gauge))
    );

    let fermion = FermionField::random(dims, 11);
    let fermion_path = dir.join("fermion_2x2x2x2_seed11.bin");
    write_fermion(&fermion_path, &fermion).expect("write fermion fixture");
    println!(
        "{}: payload checksum {:#018x}",
        fermion_path.display(),
        fnv1a64(&fermion_payload(&fermion))
    );
}

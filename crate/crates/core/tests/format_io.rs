//! File-format regression tests against committed fixtures. The fixture
//! bytes were generated once (see `examples/make_fixtures.rs`) and must
//! parse identically on every platform: the format is little-endian
//! binary64 with an FNV-1a checksum, so nothing in it may depend on the
//! host.

use std::path::PathBuf;
use wilson_cg::io::{
    self, fermion_payload, fnv1a64, gauge_payload, FieldFileHeader, FieldKind, IoError,
    HEADER_LEN, LAYOUT_INTERLEAVED, ORDERING_LEXICOGRAPHIC,
};
use wilson_cg::{FermionField, GaugeField, LatticeDims};

/// Frozen payload checksums of the committed fixtures.
const GAUGE_FIXTURE_CHECKSUM: u64 = 0x15ee_a70d_c6f2_44d4;
const FERMION_FIXTURE_CHECKSUM: u64 = 0x463a_7ca0_c087_4274;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn committed_gauge_fixture_parses_and_matches_its_generator() {
    let path = fixture("gauge_2x2x2x2_seed7.bin");
    let field = io::read_gauge(&path).unwrap();
    let dims = LatticeDims::new(2, 2).unwrap();
    assert_eq!(field.dims(), dims);

    // The payload must be byte-identical to what the generator produces
    // from the same seed today.
    let regenerated = GaugeField::random(dims, 7);
    assert_eq!(gauge_payload(&field), gauge_payload(&regenerated));
    assert_eq!(fnv1a64(&gauge_payload(&field)), GAUGE_FIXTURE_CHECKSUM);
}

#[test]
fn committed_fermion_fixture_parses_and_matches_its_generator() {
    let path = fixture("fermion_2x2x2x2_seed11.bin");
    let field = io::read_fermion(&path).unwrap();
    let dims = LatticeDims::new(2, 2).unwrap();
    assert_eq!(field.dims(), dims);

    let regenerated = FermionField::random(dims, 11);
    assert!(field.bits_equal(&regenerated));
    assert_eq!(fnv1a64(&fermion_payload(&field)), FERMION_FIXTURE_CHECKSUM);
}

#[test]
fn fixture_headers_carry_the_documented_fields() {
    let bytes = std::fs::read(fixture("gauge_2x2x2x2_seed7.bin")).unwrap();
    let header = FieldFileHeader::decode(&bytes).unwrap();
    assert_eq!(header.version, io::FORMAT_VERSION);
    assert_eq!(header.kind, FieldKind::Gauge);
    assert_eq!((header.l, header.t), (2, 2));
    assert_eq!(header.ordering, ORDERING_LEXICOGRAPHIC);
    assert_eq!(header.layout, LAYOUT_INTERLEAVED);
    assert_eq!(header.checksum, GAUGE_FIXTURE_CHECKSUM);
    assert_eq!(header.checksum, fnv1a64(&bytes[HEADER_LEN..]));
    assert_eq!(bytes.len(), HEADER_LEN + FieldKind::Gauge.payload_len(header.dims().unwrap()));
}

#[test]
fn fixtures_refuse_to_parse_as_the_wrong_kind() {
    assert!(matches!(
        io::read_fermion(&fixture("gauge_2x2x2x2_seed7.bin")),
        Err(IoError::WrongKind { found_tag: 0 })
    ));
    assert!(matches!(
        io::read_gauge(&fixture("fermion_2x2x2x2_seed11.bin")),
        Err(IoError::WrongKind { found_tag: 1 })
    ));
}

#[test]
fn roundtrip_identity_holds_across_supported_sizes() {
    let tmp = tempfile::tempdir().unwrap();
    for (l, t) in [(2, 2), (2, 4), (4, 2), (4, 8), (6, 8)] {
        let dims = LatticeDims::new(l, t).unwrap();
        let gauge = GaugeField::random(dims, (l * 100 + t) as u64);
        let gpath = tmp.path().join(format!("g_{l}_{t}.bin"));
        io::write_gauge(&gpath, &gauge).unwrap();
        assert_eq!(
            gauge_payload(&io::read_gauge(&gpath).unwrap()),
            gauge_payload(&gauge),
            "gauge {l}^3x{t}"
        );

        let fermion = FermionField::random(dims, (l * 100 + t + 1) as u64);
        let fpath = tmp.path().join(format!("f_{l}_{t}.bin"));
        io::write_fermion(&fpath, &fermion).unwrap();
        assert!(io::read_fermion(&fpath).unwrap().bits_equal(&fermion), "fermion {l}^3x{t}");
    }
}

#[test]
fn channel_split_of_the_fixture_recombines_to_the_same_payload() {
    let tmp = tempfile::tempdir().unwrap();
    let gauge = io::read_gauge(&fixture("gauge_2x2x2x2_seed7.bin")).unwrap();
    let re = tmp.path().join("fix.re.bin");
    let im = tmp.path().join("fix.im.bin");
    io::export_gauge_channels(&gauge, &re, &im).unwrap();
    let back = io::read_gauge_channels(&re, &im).unwrap();
    assert_eq!(gauge_payload(&back), gauge_payload(&gauge));
}

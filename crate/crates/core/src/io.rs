//! Binary file formats for gauge and fermion fields.
//!
//! Both field kinds share one container: a fixed 40-byte header followed
//! by a little-endian binary64 payload. The header is
//!
//! ```text
//! offset  size  field
//!      0     8  magic "WILSONCG"
//!      8     4  format version (u32, currently 1)
//!     12     4  field kind     (u32: 0 = gauge, 1 = fermion)
//!     16     4  spatial extent L (u32)
//!     20     4  temporal extent T (u32)
//!     24     4  site ordering  (u32: 0 = lexicographic, x fastest)
//!     28     4  payload layout (u32: 0 = interleaved re/im binary64,
//!                               1 = real channel, 2 = imaginary channel)
//!     32     8  FNV-1a 64-bit checksum of the payload (u64)
//! ```
//!
//! Gauge payloads run site-major in lexicographic order, then direction
//! μ = 0..3, then the 3×3 link matrix row-major, each complex entry as
//! (re, im); `V·4·18·8` bytes in total. Fermion payloads run site-major,
//! then spin 0..3, then color 0..3, same complex encoding; `V·24·8`
//! bytes. Multi-byte header fields are little-endian too.
//!
//! The channel-split export writes the same data as two files — one
//! holding every real part, one every imaginary part, in payload order —
//! for transports that move the two streams independently. Interleaving
//! the two split payloads byte-for-byte reproduces the canonical payload.
//!
//! Reads verify magic, version, tags, dimensions, payload length, and
//! checksum, each with its own error; gauge reads additionally validate
//! link unitarity (within 1e-10 by default), with a policy switch to
//! downgrade that to a warning so deliberately perturbed fixtures remain
//! readable.

use crate::field::{FermionField, GaugeField, UnitarityViolation};
use crate::lattice::{GeometryError, LatticeDims};
use crate::spinor::Spinor;
use crate::su3::{ColorMatrix, Complex, TOL_INPUT};
use std::fs;
use std::path::Path;
use thiserror::Error;

/// File identification bytes.
pub const MAGIC: [u8; 8] = *b"WILSONCG";
/// Current format version.
pub const FORMAT_VERSION: u32 = 1;
/// Encoded header size in bytes.
pub const HEADER_LEN: usize = 40;

/// Site ordering tag: lexicographic, x fastest.
pub const ORDERING_LEXICOGRAPHIC: u32 = 0;
/// Payload layout tags.
pub const LAYOUT_INTERLEAVED: u32 = 0;
pub const LAYOUT_REAL_CHANNEL: u32 = 1;
pub const LAYOUT_IMAG_CHANNEL: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Gauge,
    Fermion,
}

impl FieldKind {
    pub fn tag(self) -> u32 {
        match self {
            FieldKind::Gauge => 0,
            FieldKind::Fermion => 1,
        }
    }

    pub fn from_tag(tag: u32) -> Option<FieldKind> {
        match tag {
            0 => Some(FieldKind::Gauge),
            1 => Some(FieldKind::Fermion),
            _ => None,
        }
    }

    /// Real (f64) values per site for this kind.
    pub fn reals_per_site(self) -> usize {
        match self {
            FieldKind::Gauge => 4 * 9 * 2,
            FieldKind::Fermion => 4 * 3 * 2,
        }
    }

    /// Canonical (interleaved) payload size in bytes.
    pub fn payload_len(self, dims: LatticeDims) -> usize {
        dims.volume() * self.reals_per_site() * 8
    }
}

/// Whether a unitarity violation on read is fatal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UnitarityPolicy {
    #[default]
    Enforce,
    Warn,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a field file: magic {found:02x?}")]
    BadMagic { found: [u8; 8] },
    #[error("unsupported format version {found} (expected {expected})")]
    BadVersion { found: u32, expected: u32 },
    #[error("payload checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("file truncated or padded: expected {expected} payload bytes, found {found}")]
    WrongPayloadLength { expected: usize, found: usize },
    #[error("file holds a different field kind (tag {found_tag})")]
    WrongKind { found_tag: u32 },
    #[error("unknown field kind tag {tag}")]
    UnknownKind { tag: u32 },
    #[error("unknown site ordering tag {tag}")]
    BadOrdering { tag: u32 },
    #[error("unknown payload layout tag {tag}")]
    BadLayout { tag: u32 },
    #[error("file carries invalid dimensions L={l}, T={t}: {source}")]
    BadDims { l: u32, t: u32, source: GeometryError },
    #[error(
        "{count} non-unitary links (worst: site {worst_site}, direction {worst_mu}, \
         deviation {worst_deviation:.3e})"
    )]
    NonUnitary { count: usize, worst_site: usize, worst_mu: usize, worst_deviation: f64 },
    #[error("channel files disagree: {reason}")]
    ChannelMismatch { reason: String },
}

/// FNV-1a 64-bit hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET_BASIS;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

/// Decoded file header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldFileHeader {
    pub version: u32,
    pub kind: FieldKind,
    pub l: u32,
    pub t: u32,
    pub ordering: u32,
    pub layout: u32,
    pub checksum: u64,
}

impl FieldFileHeader {
    pub fn new(kind: FieldKind, dims: LatticeDims, layout: u32, checksum: u64) -> FieldFileHeader {
        FieldFileHeader {
            version: FORMAT_VERSION,
            kind,
            l: dims.l() as u32,
            t: dims.t() as u32,
            ordering: ORDERING_LEXICOGRAPHIC,
            layout,
            checksum,
        }
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut bytes = [0u8; HEADER_LEN];
        bytes[0..8].copy_from_slice(&MAGIC);
        bytes[8..12].copy_from_slice(&self.version.to_le_bytes());
        bytes[12..16].copy_from_slice(&self.kind.tag().to_le_bytes());
        bytes[16..20].copy_from_slice(&self.l.to_le_bytes());
        bytes[20..24].copy_from_slice(&self.t.to_le_bytes());
        bytes[24..28].copy_from_slice(&self.ordering.to_le_bytes());
        bytes[28..32].copy_from_slice(&self.layout.to_le_bytes());
        bytes[32..40].copy_from_slice(&self.checksum.to_le_bytes());
        bytes
    }

    pub fn decode(bytes: &[u8]) -> Result<FieldFileHeader, IoError> {
        if bytes.len() < HEADER_LEN {
            return Err(IoError::WrongPayloadLength { expected: HEADER_LEN, found: bytes.len() });
        }
        let mut magic = [0u8; 8];
        magic.copy_from_slice(&bytes[0..8]);
        if magic != MAGIC {
            return Err(IoError::BadMagic { found: magic });
        }
        let u32_at = |offset: usize| {
            u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("length checked"))
        };
        let version = u32_at(8);
        if version != FORMAT_VERSION {
            return Err(IoError::BadVersion { found: version, expected: FORMAT_VERSION });
        }
        let kind_tag = u32_at(12);
        let kind = FieldKind::from_tag(kind_tag).ok_or(IoError::UnknownKind { tag: kind_tag })?;
        let ordering = u32_at(24);
        if ordering != ORDERING_LEXICOGRAPHIC {
            return Err(IoError::BadOrdering { tag: ordering });
        }
        let layout = u32_at(28);
        if layout > LAYOUT_IMAG_CHANNEL {
            return Err(IoError::BadLayout { tag: layout });
        }
        Ok(FieldFileHeader {
            version,
            kind,
            l: u32_at(16),
            t: u32_at(20),
            ordering,
            layout,
            checksum: u64::from_le_bytes(bytes[32..40].try_into().expect("length checked")),
        })
    }

    pub fn dims(&self) -> Result<LatticeDims, IoError> {
        LatticeDims::new(self.l as usize, self.t as usize)
            .map_err(|source| IoError::BadDims { l: self.l, t: self.t, source })
    }
}

fn push_complex(out: &mut Vec<u8>, z: Complex) {
    out.extend_from_slice(&z.re.to_le_bytes());
    out.extend_from_slice(&z.im.to_le_bytes());
}

fn complex_at(bytes: &[u8], index: usize) -> Complex {
    let offset = index * 16;
    Complex {
        re: f64::from_le_bytes(bytes[offset..offset + 8].try_into().expect("bounds checked")),
        im: f64::from_le_bytes(bytes[offset + 8..offset + 16].try_into().expect("bounds checked")),
    }
}

/// Canonical interleaved payload of a gauge field.
pub fn gauge_payload(field: &GaugeField) -> Vec<u8> {
    let dims = field.dims();
    let mut out = Vec::with_capacity(FieldKind::Gauge.payload_len(dims));
    for site in 0..dims.volume() {
        for mu in 0..4 {
            let link = field.link(site, mu);
            for row in 0..3 {
                for col in 0..3 {
                    push_complex(&mut out, link.0[row][col]);
                }
            }
        }
    }
    out
}

fn gauge_from_payload(dims: LatticeDims, payload: &[u8]) -> GaugeField {
    let mut links = Vec::with_capacity(dims.volume() * 4);
    let mut index = 0;
    for _ in 0..dims.volume() * 4 {
        let mut m = ColorMatrix::ZERO;
        for row in 0..3 {
            for col in 0..3 {
                m.0[row][col] = complex_at(payload, index);
                index += 1;
            }
        }
        links.push(m);
    }
    GaugeField::from_links(dims, links)
}

/// Canonical interleaved payload of a fermion field.
pub fn fermion_payload(field: &FermionField) -> Vec<u8> {
    let dims = field.dims();
    let mut out = Vec::with_capacity(FieldKind::Fermion.payload_len(dims));
    for site in 0..dims.volume() {
        let spinor = field.site(site);
        for spin in 0..4 {
            for color in 0..3 {
                push_complex(&mut out, spinor.0[spin].0[color]);
            }
        }
    }
    out
}

fn fermion_from_payload(dims: LatticeDims, payload: &[u8]) -> FermionField {
    let mut sites = Vec::with_capacity(dims.volume());
    let mut index = 0;
    for _ in 0..dims.volume() {
        let mut s = Spinor::ZERO;
        for spin in 0..4 {
            for color in 0..3 {
                s.0[spin].0[color] = complex_at(payload, index);
                index += 1;
            }
        }
        sites.push(s);
    }
    FermionField::from_sites(dims, sites)
}

fn write_file(path: &Path, kind: FieldKind, dims: LatticeDims, layout: u32, payload: &[u8]) -> Result<(), IoError> {
    let header = FieldFileHeader::new(kind, dims, layout, fnv1a64(payload));
    let mut bytes = Vec::with_capacity(HEADER_LEN + payload.len());
    bytes.extend_from_slice(&header.encode());
    bytes.extend_from_slice(payload);
    fs::write(path, bytes)?;
    Ok(())
}

/// Read a file, verifying magic, version, tags, length and checksum, and
/// return its header and payload.
fn read_verified(path: &Path, expect_kind: FieldKind, expect_layout: u32) -> Result<(FieldFileHeader, Vec<u8>), IoError> {
    let bytes = fs::read(path)?;
    let header = FieldFileHeader::decode(&bytes)?;
    if header.kind != expect_kind {
        return Err(IoError::WrongKind { found_tag: header.kind.tag() });
    }
    if header.layout != expect_layout {
        return Err(IoError::BadLayout { tag: header.layout });
    }
    let dims = header.dims()?;
    let mut expected = expect_kind.payload_len(dims);
    if expect_layout != LAYOUT_INTERLEAVED {
        expected /= 2;
    }
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(IoError::WrongPayloadLength { expected, found: payload.len() });
    }
    let computed = fnv1a64(payload);
    if computed != header.checksum {
        return Err(IoError::ChecksumMismatch { stored: header.checksum, computed });
    }
    Ok((header, payload.to_vec()))
}

fn enforce_unitarity(
    field: &GaugeField,
    policy: UnitarityPolicy,
) -> Result<Vec<UnitarityViolation>, IoError> {
    let violations = field.unitarity_violations(TOL_INPUT);
    if violations.is_empty() || policy == UnitarityPolicy::Warn {
        return Ok(violations);
    }
    let worst = violations
        .iter()
        .max_by(|a, b| a.deviation.total_cmp(&b.deviation))
        .expect("nonempty");
    Err(IoError::NonUnitary {
        count: violations.len(),
        worst_site: worst.site,
        worst_mu: worst.mu,
        worst_deviation: worst.deviation,
    })
}

pub fn write_gauge(path: &Path, field: &GaugeField) -> Result<(), IoError> {
    write_file(path, FieldKind::Gauge, field.dims(), LAYOUT_INTERLEAVED, &gauge_payload(field))
}

/// Read a gauge field, rejecting non-unitary links.
pub fn read_gauge(path: &Path) -> Result<GaugeField, IoError> {
    let (field, _) = read_gauge_with_policy(path, UnitarityPolicy::Enforce)?;
    Ok(field)
}

/// Read a gauge field; under [`UnitarityPolicy::Warn`] non-unitary links
/// are returned for the caller to report instead of failing the read.
pub fn read_gauge_with_policy(
    path: &Path,
    policy: UnitarityPolicy,
) -> Result<(GaugeField, Vec<UnitarityViolation>), IoError> {
    let (header, payload) = read_verified(path, FieldKind::Gauge, LAYOUT_INTERLEAVED)?;
    let field = gauge_from_payload(header.dims()?, &payload);
    let violations = enforce_unitarity(&field, policy)?;
    Ok((field, violations))
}

pub fn write_fermion(path: &Path, field: &FermionField) -> Result<(), IoError> {
    write_file(path, FieldKind::Fermion, field.dims(), LAYOUT_INTERLEAVED, &fermion_payload(field))
}

pub fn read_fermion(path: &Path) -> Result<FermionField, IoError> {
    let (header, payload) = read_verified(path, FieldKind::Fermion, LAYOUT_INTERLEAVED)?;
    Ok(fermion_from_payload(header.dims()?, &payload))
}

/// Split an interleaved payload into its real and imaginary streams.
fn split_payload(payload: &[u8]) -> (Vec<u8>, Vec<u8>) {
    debug_assert_eq!(payload.len() % 16, 0);
    let half = payload.len() / 2;
    let mut re = Vec::with_capacity(half);
    let mut im = Vec::with_capacity(half);
    for pair in payload.chunks_exact(16) {
        re.extend_from_slice(&pair[0..8]);
        im.extend_from_slice(&pair[8..16]);
    }
    (re, im)
}

/// Interleave real and imaginary streams back into a canonical payload.
fn merge_payload(re: &[u8], im: &[u8]) -> Vec<u8> {
    debug_assert_eq!(re.len(), im.len());
    let mut out = Vec::with_capacity(re.len() * 2);
    for (re_word, im_word) in re.chunks_exact(8).zip(im.chunks_exact(8)) {
        out.extend_from_slice(re_word);
        out.extend_from_slice(im_word);
    }
    out
}

fn export_channels(
    kind: FieldKind,
    dims: LatticeDims,
    payload: &[u8],
    re_path: &Path,
    im_path: &Path,
) -> Result<(), IoError> {
    let (re, im) = split_payload(payload);
    write_file(re_path, kind, dims, LAYOUT_REAL_CHANNEL, &re)?;
    write_file(im_path, kind, dims, LAYOUT_IMAG_CHANNEL, &im)
}

/// Write a gauge field as separate real/imaginary channel files.
pub fn export_gauge_channels(field: &GaugeField, re_path: &Path, im_path: &Path) -> Result<(), IoError> {
    export_channels(FieldKind::Gauge, field.dims(), &gauge_payload(field), re_path, im_path)
}

/// Write a fermion field as separate real/imaginary channel files.
pub fn export_fermion_channels(field: &FermionField, re_path: &Path, im_path: &Path) -> Result<(), IoError> {
    export_channels(FieldKind::Fermion, field.dims(), &fermion_payload(field), re_path, im_path)
}

fn read_channels(
    kind: FieldKind,
    re_path: &Path,
    im_path: &Path,
) -> Result<(LatticeDims, Vec<u8>), IoError> {
    let (re_header, re_payload) = read_verified(re_path, kind, LAYOUT_REAL_CHANNEL)?;
    let (im_header, im_payload) = read_verified(im_path, kind, LAYOUT_IMAG_CHANNEL)?;
    if (re_header.l, re_header.t) != (im_header.l, im_header.t) {
        return Err(IoError::ChannelMismatch {
            reason: format!(
                "dimensions {}x{} vs {}x{}",
                re_header.l, re_header.t, im_header.l, im_header.t
            ),
        });
    }
    Ok((re_header.dims()?, merge_payload(&re_payload, &im_payload)))
}

/// Recombine channel files written by [`export_gauge_channels`].
pub fn read_gauge_channels(re_path: &Path, im_path: &Path) -> Result<GaugeField, IoError> {
    let (dims, payload) = read_channels(FieldKind::Gauge, re_path, im_path)?;
    let field = gauge_from_payload(dims, &payload);
    enforce_unitarity(&field, UnitarityPolicy::Enforce)?;
    Ok(field)
}

/// Recombine channel files written by [`export_fermion_channels`].
pub fn read_fermion_channels(re_path: &Path, im_path: &Path) -> Result<FermionField, IoError> {
    let (dims, payload) = read_channels(FieldKind::Fermion, re_path, im_path)?;
    Ok(fermion_from_payload(dims, &payload))
}

/// Gauge-field generators exposed to the file tooling and CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenerateKind {
    /// All links the identity ("cold" start).
    Unit,
    /// Independent random group elements from the documented generator.
    Random { seed: u64 },
}

pub fn generate(kind: GenerateKind, dims: LatticeDims) -> GaugeField {
    match kind {
        GenerateKind::Unit => GaugeField::unit(dims),
        GenerateKind::Random { seed } => GaugeField::random(dims, seed),
    }
}

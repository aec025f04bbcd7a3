//! Binary artifact and roadmap files.
//!
//! Artifact layout, all integers little endian:
//!
//! ```text
//! magic "GCVA" | version u16 | flags u16 (bit 0: incomplete)
//! fingerprint u64 | dim u32 | start i32 * dim
//! seed u64 | epsilon f64 | tiers_used u32 | planner_calls u32
//! reachability_runs u32 | subregions_before_pruning u32
//! tiers u32 | planner_failures u32 * tiers
//! subregions u32 | { attractor i32 * dim | radius f64 | depth u32 | path_index u32 }
//! invalid u32 | { center i32 * dim | radius f64 }
//! paths u32 | { len u32 | cost f64 | states i32 * dim * len }
//! orphans u32 | { state i32 * dim }
//! checksum u64 (first 8 bytes of SHA-256 over everything before it)
//! ```
//!
//! Wall-clock statistics are not stored, so a fixed seed gives identical
//! bytes. The roadmap file (`GCRM`) follows the same conventions.

use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::PersistError;
use crate::lattice::{Lattice, State};
use crate::path::PlannedPath;
use crate::planners::Roadmap;
use crate::preprocess::{InvalidSubregion, PathLibrary, PreprocessArtifact, PreprocessStats, Subregion};

pub const ARTIFACT_MAGIC: &[u8; 4] = b"GCVA";
pub const ROADMAP_MAGIC: &[u8; 4] = b"GCRM";
pub const FORMAT_VERSION: u16 = 1;

const FLAG_INCOMPLETE: u16 = 1;

fn checksum(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    let mut b = [0u8; 8];
    b.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(b)
}

#[derive(Default)]
struct Enc(Vec<u8>);

impl Enc {
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    fn len(&mut self, n: usize) {
        self.u32(u32::try_from(n).expect("table too large for the format"));
    }
    fn state(&mut self, s: &State) {
        for c in s.coords() {
            self.0.extend_from_slice(&c.to_le_bytes());
        }
    }
    fn seal(mut self) -> Vec<u8> {
        let sum = checksum(&self.0);
        self.u64(sum);
        self.0
    }
}

struct Dec<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Dec<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], PersistError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| PersistError::Malformed(format!("truncated at byte {}", self.pos)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u16(&mut self) -> Result<u16, PersistError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, PersistError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, PersistError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, PersistError> {
        Ok(f64::from_bits(self.u64()?))
    }
    /// A count, sanity-checked against the bytes left.
    fn count(&mut self, min_item_bytes: usize) -> Result<usize, PersistError> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_item_bytes.max(1)) > self.buf.len() - self.pos {
            return Err(PersistError::Malformed(format!("count {n} exceeds file size")));
        }
        Ok(n)
    }
    fn state(&mut self, dim: usize) -> Result<State, PersistError> {
        let raw = self.take(4 * dim)?;
        Ok(State::new(
            raw.chunks_exact(4)
                .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ))
    }
    fn done(&self) -> Result<(), PersistError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(PersistError::Malformed(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )))
        }
    }
}

/// Magic, version and checksum; returns the body without the checksum.
fn open_frame<'a>(bytes: &'a [u8], magic: &[u8; 4]) -> Result<&'a [u8], PersistError> {
    if bytes.len() < 4 || &bytes[..4] != magic {
        return Err(PersistError::BadMagic);
    }
    if bytes.len() < 4 + 2 + 8 {
        return Err(PersistError::Malformed("file too short".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(PersistError::VersionUnsupported(version));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    let computed = checksum(body);
    if stored != computed {
        return Err(PersistError::ChecksumMismatch { stored, computed });
    }
    Ok(body)
}

pub fn artifact_to_bytes(artifact: &PreprocessArtifact) -> Vec<u8> {
    let dim = artifact.start.dim();
    let mut e = Enc::default();
    e.0.extend_from_slice(ARTIFACT_MAGIC);
    e.u16(FORMAT_VERSION);
    e.u16(if artifact.is_complete() { 0 } else { FLAG_INCOMPLETE });
    e.u64(artifact.domain_fingerprint);
    e.len(dim);
    e.state(&artifact.start);
    let st = &artifact.stats;
    e.u64(st.seed);
    e.f64(st.epsilon);
    e.u32(st.tiers_used);
    e.u32(st.planner_calls);
    e.u32(st.reachability_runs);
    e.u32(st.subregions_before_pruning);
    e.len(st.planner_failures.len());
    for &f in &st.planner_failures {
        e.u32(f);
    }
    e.len(artifact.subregions.len());
    for r in &artifact.subregions {
        e.state(&r.attractor);
        e.f64(r.radius);
        e.u32(r.depth);
        e.u32(r.path_index);
    }
    e.len(artifact.invalid_subregions.len());
    for r in &artifact.invalid_subregions {
        e.state(&r.center);
        e.f64(r.radius);
    }
    e.len(artifact.library.paths.len());
    for p in &artifact.library.paths {
        e.len(p.states.len());
        e.f64(p.cost);
        for s in &p.states {
            e.state(s);
        }
    }
    e.len(artifact.orphans.len());
    for s in &artifact.orphans {
        e.state(s);
    }
    e.seal()
}

/// Decode and check internal consistency (checksum, radius order, path
/// endpoints, indices). Does not compare against a domain.
pub fn artifact_from_bytes(bytes: &[u8]) -> Result<PreprocessArtifact, PersistError> {
    let body = open_frame(bytes, ARTIFACT_MAGIC)?;
    let mut d = Dec { buf: body, pos: 6 };
    let flags = d.u16()?;
    let domain_fingerprint = d.u64()?;
    let dim = d.u32()? as usize;
    if dim == 0 {
        return Err(PersistError::Malformed("zero dimension".into()));
    }
    let start = d.state(dim)?;
    let mut stats = PreprocessStats {
        seed: d.u64()?,
        epsilon: d.f64()?,
        tiers_used: d.u32()?,
        planner_calls: d.u32()?,
        reachability_runs: d.u32()?,
        subregions_before_pruning: d.u32()?,
        ..Default::default()
    };
    let tiers = d.count(4)?;
    for _ in 0..tiers {
        stats.planner_failures.push(d.u32()?);
    }
    let n = d.count(4 * dim + 16)?;
    let mut subregions = Vec::with_capacity(n);
    for _ in 0..n {
        subregions.push(Subregion {
            attractor: d.state(dim)?,
            radius: d.f64()?,
            depth: d.u32()?,
            path_index: d.u32()?,
        });
    }
    let n = d.count(4 * dim + 8)?;
    let mut invalid_subregions = Vec::with_capacity(n);
    for _ in 0..n {
        invalid_subregions.push(InvalidSubregion {
            center: d.state(dim)?,
            radius: d.f64()?,
        });
    }
    let n = d.count(12)?;
    let mut paths = Vec::with_capacity(n);
    for _ in 0..n {
        let len = d.u32()? as usize;
        let cost = d.f64()?;
        if len.saturating_mul(4 * dim) > body.len() - d.pos {
            return Err(PersistError::Malformed("path length exceeds file size".into()));
        }
        let states = (0..len).map(|_| d.state(dim)).collect::<Result<_, _>>()?;
        paths.push(PlannedPath { states, cost });
    }
    let n = d.count(4 * dim)?;
    let orphans = (0..n).map(|_| d.state(dim)).collect::<Result<Vec<_>, _>>()?;
    d.done()?;

    if (flags & FLAG_INCOMPLETE != 0) == orphans.is_empty() {
        return Err(PersistError::Malformed("incomplete flag disagrees with orphan list".into()));
    }
    if subregions.windows(2).any(|w| w[0].radius < w[1].radius) {
        return Err(PersistError::Malformed("subregions not sorted by radius".into()));
    }
    for (i, r) in subregions.iter().enumerate() {
        let p = paths
            .get(r.path_index as usize)
            .ok_or_else(|| PersistError::Malformed(format!("subregion {i} points at missing path")))?;
        if p.first() != Some(&start) || p.last() != Some(&r.attractor) {
            return Err(PersistError::Malformed(format!(
                "path {} does not run from start to attractor {}",
                r.path_index, r.attractor
            )));
        }
    }
    Ok(PreprocessArtifact {
        subregions,
        invalid_subregions,
        library: PathLibrary { paths },
        start,
        domain_fingerprint,
        stats,
        orphans,
    })
}

pub fn save_artifact<W: Write>(artifact: &PreprocessArtifact, mut sink: W) -> Result<(), PersistError> {
    sink.write_all(&artifact_to_bytes(artifact))?;
    sink.flush()?;
    Ok(())
}

/// Read an artifact and make sure it was built for `domain`.
pub fn load_artifact<R: Read, L: Lattice + ?Sized>(
    mut source: R,
    domain: &L,
) -> Result<PreprocessArtifact, PersistError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let artifact = artifact_from_bytes(&bytes)?;
    let fp = domain.fingerprint();
    if artifact.domain_fingerprint != fp {
        return Err(PersistError::FingerprintMismatch {
            file: artifact.domain_fingerprint,
            domain: fp,
        });
    }
    if artifact.start.dim() != domain.dimension() {
        return Err(PersistError::Malformed("dimension differs from domain".into()));
    }
    Ok(artifact)
}

pub fn save_artifact_file(artifact: &PreprocessArtifact, path: impl AsRef<Path>) -> Result<(), PersistError> {
    std::fs::write(path, artifact_to_bytes(artifact))?;
    Ok(())
}

pub fn load_artifact_file<L: Lattice + ?Sized>(
    path: impl AsRef<Path>,
    domain: &L,
) -> Result<PreprocessArtifact, PersistError> {
    load_artifact(std::fs::File::open(path)?, domain)
}

/// Human-readable JSON rendering for debugging. The binary form is canonical.
pub fn artifact_to_json(artifact: &PreprocessArtifact) -> String {
    serde_json::to_string_pretty(artifact).expect("artifact serializes")
}

pub fn roadmap_to_bytes(roadmap: &Roadmap) -> Vec<u8> {
    let dim = roadmap.vertices.first().map_or(0, State::dim);
    let mut e = Enc::default();
    e.0.extend_from_slice(ROADMAP_MAGIC);
    e.u16(FORMAT_VERSION);
    e.u16(0);
    e.u64(roadmap.fingerprint);
    e.len(dim);
    e.len(roadmap.k);
    e.len(roadmap.vertices.len());
    for v in &roadmap.vertices {
        e.state(v);
    }
    e.len(roadmap.edges.len());
    for &(u, v, c) in &roadmap.edges {
        e.u32(u);
        e.u32(v);
        e.f64(c);
    }
    e.seal()
}

pub fn roadmap_from_bytes<L: Lattice + ?Sized>(bytes: &[u8], domain: &L) -> Result<Roadmap, PersistError> {
    let body = open_frame(bytes, ROADMAP_MAGIC)?;
    let mut d = Dec { buf: body, pos: 8 };
    let fingerprint = d.u64()?;
    if fingerprint != domain.fingerprint() {
        return Err(PersistError::FingerprintMismatch {
            file: fingerprint,
            domain: domain.fingerprint(),
        });
    }
    let dim = d.u32()? as usize;
    let k = d.u32()? as usize;
    let n = d.count(4 * dim)?;
    let vertices = (0..n).map(|_| d.state(dim)).collect::<Result<Vec<_>, _>>()?;
    let m = d.count(16)?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (u, v, c) = (d.u32()?, d.u32()?, d.f64()?);
        if u as usize >= n || v as usize >= n {
            return Err(PersistError::Malformed("edge endpoint out of range".into()));
        }
        edges.push((u, v, c));
    }
    d.done()?;
    let mut map = Roadmap {
        vertices,
        edges,
        k,
        fingerprint,
        parent: Vec::new(),
        dist: Vec::new(),
    };
    map.compute_tree();
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PreprocessArtifact {
        let start = State::new(vec![0, 0]);
        let a = State::new(vec![2, 1]);
        let mut art = PreprocessArtifact::empty(start.clone(), 0xfeed);
        art.subregions.push(Subregion {
            attractor: a.clone(),
            radius: 3.5,
            depth: 2,
            path_index: 0,
        });
        art.invalid_subregions.push(InvalidSubregion {
            center: State::new(vec![5, 5]),
            radius: 1.0,
        });
        art.library.paths.push(PlannedPath {
            states: vec![start, State::new(vec![1, 0]), State::new(vec![2, 1])],
            cost: 1.0 + 2f64.sqrt(),
        });
        art.stats.seed = 7;
        art.stats.planner_failures = vec![0, 0];
        art
    }

    #[test]
    fn round_trip_is_identity() {
        let art = sample();
        let bytes = artifact_to_bytes(&art);
        assert_eq!(artifact_from_bytes(&bytes).unwrap(), art);
        assert_eq!(artifact_to_bytes(&artifact_from_bytes(&bytes).unwrap()), bytes);
    }

    #[test]
    fn flipped_byte_fails_checksum() {
        let mut bytes = artifact_to_bytes(&sample());
        let i = bytes.len() - 20;
        bytes[i] ^= 0x40;
        assert!(matches!(
            artifact_from_bytes(&bytes),
            Err(PersistError::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn header_errors() {
        let bytes = artifact_to_bytes(&sample());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(artifact_from_bytes(&bad), Err(PersistError::BadMagic)));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(artifact_from_bytes(&bad), Err(PersistError::VersionUnsupported(9))));
        assert!(artifact_from_bytes(&bytes[..10]).is_err());
    }

    #[test]
    fn json_dump_mentions_the_tables() {
        let text = artifact_to_json(&sample());
        assert!(text.contains("\"subregions\""));
        assert!(text.contains("\"invalid_subregions\""));
    }
}

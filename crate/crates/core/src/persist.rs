//! On-disk rank vectors.
//!
//! Binary layout, all little-endian:
//!
//! | offset | size | field                   |
//! |--------|------|-------------------------|
//! | 0      | 4    | magic `WRNK`            |
//! | 4      | 4    | version (`u32`, = 1)    |
//! | 8      | 8    | `N` (`u64`)             |
//! | 16     | 8    | alpha (`f64`)           |
//! | 24     | 8    | tolerance (`f64`)       |
//! | 32     | 8    | iterations (`u64`)      |
//! | 40     | 8·N  | probabilities (`f64`)   |
//!
//! The text sidecar has one `id<TAB>rank<TAB>probability` line per node in
//! rank order. 2DRank tables use `id<TAB>rank<TAB>k2`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::graph::NodeId;
use crate::rank::{RankResult, Termination, TwoDRankResult};

pub const MAGIC: [u8; 4] = *b"WRNK";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 40;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a rank file (bad magic)")]
    BadMagic,
    #[error("unsupported rank file version {0}")]
    Version(u32),
    #[error("rank file truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankHeader {
    pub node_count: u64,
    pub alpha: f64,
    pub tolerance: f64,
    pub iterations: u64,
}

pub fn encode_rank(result: &RankResult, alpha: f64, tolerance: f64) -> Vec<u8> {
    let n = result.len();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * n);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend_from_slice(&alpha.to_le_bytes());
    buf.extend_from_slice(&tolerance.to_le_bytes());
    buf.extend_from_slice(&(result.iterations() as u64).to_le_bytes());
    for p in result.probabilities() {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    buf
}

pub fn decode_rank(bytes: &[u8]) -> Result<(RankHeader, Vec<f64>), PersistError> {
    if bytes.len() < HEADER_LEN {
        return Err(PersistError::Truncated {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    if bytes[0..4] != MAGIC {
        return Err(PersistError::BadMagic);
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(PersistError::Version(version));
    }
    let header = RankHeader {
        node_count: u64_at(8),
        alpha: f64_at(16),
        tolerance: f64_at(24),
        iterations: u64_at(32),
    };
    let expected = HEADER_LEN as u64 + 8 * header.node_count;
    if bytes.len() as u64 != expected {
        return Err(PersistError::Truncated {
            expected,
            found: bytes.len() as u64,
        });
    }
    let probs = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, probs))
}

pub fn write_rank_binary(
    path: &Path,
    result: &RankResult,
    alpha: f64,
    tolerance: f64,
) -> Result<(), PersistError> {
    std::fs::write(path, encode_rank(result, alpha, tolerance))?;
    Ok(())
}

/// Reads a binary rank file back into a [`RankResult`]. The residual is
/// not stored and comes back as NaN.
pub fn read_rank_binary(path: &Path) -> Result<(RankHeader, RankResult), PersistError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let (header, probs) = decode_rank(&bytes)?;
    let result = RankResult::from_probabilities(
        probs,
        header.iterations as usize,
        f64::NAN,
        Termination::Converged,
    );
    Ok((header, result))
}

pub fn write_rank_tsv<W: Write>(out: W, result: &RankResult) -> std::io::Result<()> {
    let mut w = BufWriter::new(out);
    for (pos, &node) in result.order().iter().enumerate() {
        writeln!(w, "{node}\t{}\t{:e}", pos + 1, result.probability(node))?;
    }
    w.flush()
}

pub fn write_two_d_rank_tsv<W: Write>(out: W, result: &TwoDRankResult) -> std::io::Result<()> {
    let mut w = BufWriter::new(out);
    for (pos, &node) in result.order().iter().enumerate() {
        writeln!(w, "{node}\t{}\t{}", pos + 1, result.k2(node))?;
    }
    w.flush()
}

/// Parses any of the sidecar tables into `(id, rank, value)` rows.
pub fn read_tsv_rows<R: Read>(input: R) -> Result<Vec<(NodeId, usize, f64)>, PersistError> {
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| PersistError::Parse {
            line: idx + 1,
            message: message.to_string(),
        };
        let mut f = line.split('\t');
        let id = f.next().and_then(|x| x.parse().ok()).ok_or_else(|| err("bad id"))?;
        let rank = f.next().and_then(|x| x.parse().ok()).ok_or_else(|| err("bad rank"))?;
        let value = f.next().and_then(|x| x.parse().ok()).ok_or_else(|| err("bad value"))?;
        rows.push((id, rank, value));
    }
    Ok(rows)
}

/// Rebuilds the 2DRank order from a sidecar table.
pub fn read_two_d_rank_order<R: Read>(input: R) -> Result<Vec<NodeId>, PersistError> {
    let mut rows = read_tsv_rows(input)?;
    rows.sort_by_key(|r| r.1);
    Ok(rows.into_iter().map(|r| r.0).collect())
}

//! Binary graph files.
//!
//! Layout (little-endian): magic `SAWG`, `u16` version, `u16` k, `u32`
//! feature bits, `u64` state count; then per state a `u8` allowance, a `u16`
//! step count and the direction codes from `B` packed four per byte (lowest
//! bits first); then per state three lists, each a `u32` length followed by
//! `u32` ids; finally a `u64` FNV-1a checksum of everything before it.

use std::fs;
use std::hash::Hasher;
use std::io;
use std::path::Path;

use fnv::FnvHasher;
use thiserror::Error;

use crate::automaton::{ChildLists, StateGraph};
use crate::geometry::Direction;
use crate::options::Features;
use crate::state::{AllowanceClass, StateId, StateKey, MAX_PACKED_STEPS};

pub const MAGIC: &[u8; 4] = b"SAWG";
pub const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a graph file (bad magic)")]
    BadMagic,
    #[error("unsupported graph file version {0}")]
    UnsupportedVersion(u16),
    #[error("graph file is truncated")]
    Truncated,
    #[error("graph file checksum mismatch")]
    ChecksumMismatch,
    #[error("malformed graph file: {0}")]
    Malformed(String),
}

fn checksum(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// Serializes the graph to bytes.
pub fn encode(g: &StateGraph) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + g.len() * 24 + g.transitions() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.k as u16).to_le_bytes());
    out.extend_from_slice(&g.features.to_bits().to_le_bytes());
    out.extend_from_slice(&(g.len() as u64).to_le_bytes());
    for id in 0..g.len() as StateId {
        let key = g.key(id);
        out.push(g.allowance(id) as u8);
        out.extend_from_slice(&(key.steps() as u16).to_le_bytes());
        let mut byte = 0u8;
        for (i, d) in key.directions().enumerate() {
            byte |= d.code() << (2 * (i % 4));
            if i % 4 == 3 {
                out.push(byte);
                byte = 0;
            }
        }
        if !key.steps().is_multiple_of(4) {
            out.push(byte);
        }
    }
    for id in 0..g.len() as StateId {
        for list in g.child_lists(id) {
            out.extend_from_slice(&(list.len() as u32).to_le_bytes());
            for &c in list {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
    }
    let sum = checksum(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], PersistError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(PersistError::Truncated)?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, PersistError> {
        Ok(self.take(1)?[0])
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
}

/// Parses bytes produced by [`encode`].
pub fn decode(bytes: &[u8]) -> Result<StateGraph, PersistError> {
    if bytes.len() < 4 {
        return Err(if MAGIC.starts_with(bytes) {
            PersistError::Truncated
        } else {
            PersistError::BadMagic
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(PersistError::BadMagic);
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.u16()?;
    if version != VERSION {
        return Err(PersistError::UnsupportedVersion(version));
    }
    if bytes.len() < 32 {
        return Err(PersistError::Truncated);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    if checksum(body) != u64::from_le_bytes(tail.try_into().unwrap()) {
        // A short file most likely lost its tail.
        return Err(truncation_or_checksum(body));
    }
    let r = &mut Reader {
        bytes: body,
        pos: 6,
    };
    let k = u32::from(r.u16()?);
    let features = Features::from_bits(r.u32()?)
        .ok_or_else(|| PersistError::Malformed("unknown feature bits".into()))?;
    let n = usize::try_from(r.u64()?).map_err(|_| PersistError::Malformed("state count".into()))?;
    if n > body.len() {
        return Err(PersistError::Malformed(
            "state count exceeds file size".into(),
        ));
    }
    let mut keys = Vec::with_capacity(n);
    let mut allowances = Vec::with_capacity(n);
    for _ in 0..n {
        let class = r.u8()?;
        allowances.push(
            AllowanceClass::from_code(class)
                .ok_or_else(|| PersistError::Malformed(format!("allowance {class}")))?,
        );
        let steps = usize::from(r.u16()?);
        if steps == 0 || steps > MAX_PACKED_STEPS {
            return Err(PersistError::Malformed(format!("step count {steps}")));
        }
        let packed = r.take(steps.div_ceil(4))?;
        let dirs = (0..steps).map(|i| Direction::from_code(packed[i / 4] >> (2 * (i % 4))));
        keys.push(StateKey::from_directions(dirs));
    }
    let mut children: Vec<ChildLists> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut lists: ChildLists = Default::default();
        for list in &mut lists {
            let len = r.u32()? as usize;
            if len > body.len() {
                return Err(PersistError::Malformed(
                    "list length exceeds file size".into(),
                ));
            }
            *list = (0..len).map(|_| r.u32()).collect::<Result<_, _>>()?;
        }
        children.push(lists);
    }
    if r.pos != body.len() {
        return Err(PersistError::Malformed("trailing bytes".into()));
    }
    StateGraph::from_parts(k, features, keys, allowances, children)
        .ok_or_else(|| PersistError::Malformed("inconsistent states or children".into()))
}

/// Distinguishes a file cut short from one with corrupted contents by
/// checking whether the declared sections fit in the available bytes.
fn truncation_or_checksum(body: &[u8]) -> PersistError {
    let mut r = Reader {
        bytes: body,
        pos: 6,
    };
    let scan = (|| -> Result<(), PersistError> {
        r.take(6)?;
        let n = r.u64()?;
        for _ in 0..n {
            r.u8()?;
            let steps = usize::from(r.u16()?);
            r.take(steps.div_ceil(4))?;
        }
        for _ in 0..n * 3 {
            let len = r.u32()? as usize;
            r.take(len.checked_mul(4).ok_or(PersistError::Truncated)?)?;
        }
        Ok(())
    })();
    match scan {
        Err(PersistError::Truncated) => PersistError::Truncated,
        _ => PersistError::ChecksumMismatch,
    }
}

pub fn save_graph(g: &StateGraph, path: &Path) -> Result<u64, PersistError> {
    let bytes = encode(g);
    fs::write(path, &bytes)?;
    Ok(bytes.len() as u64)
}

pub fn load_graph(path: &Path) -> Result<StateGraph, PersistError> {
    decode(&fs::read(path)?)
}

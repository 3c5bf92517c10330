//! Key trace files.
//!
//! ```text
//!   offset 0   8 bytes   magic "CPHTRACE"
//!   offset 8   u32 LE    version (1)
//!   offset 12  u32 LE    key width in bits
//!   offset 16  u64 LE    keys, packed, in visit order, duplicates allowed
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use cpht_core::{Key, KeyWidth};

use crate::error::{Error, Result};
use crate::keys;

pub const MAGIC: &[u8; 8] = b"CPHTRACE";
pub const VERSION: u32 = 1;
const HEADER_LEN: u64 = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub key_bits: u32,
    pub keys: Vec<Key>,
}

impl Trace {
    pub fn distinct(&self) -> usize {
        let mut k = self.keys.clone();
        k.sort_unstable();
        k.dedup();
        k.len()
    }
}

fn err(offset: u64, message: impl Into<String>) -> Error {
    Error::Trace { offset, message: message.into() }
}

pub fn write_trace<W: Write>(mut w: W, trace: &Trace) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&trace.key_bits.to_le_bytes())?;
    for k in &trace.keys {
        w.write_all(&k.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(mut r: R) -> Result<Trace> {
    let mut header = [0u8; HEADER_LEN as usize];
    let mut got = 0;
    while got < header.len() {
        match r.read(&mut header[got..])? {
            0 => return Err(err(got as u64, "truncated header")),
            n => got += n,
        }
    }
    if &header[..8] != MAGIC {
        return Err(err(0, "bad magic"));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(err(8, format!("unsupported version {version}")));
    }
    let key_bits = u32::from_le_bytes(header[12..16].try_into().unwrap());
    let width = KeyWidth::new(key_bits).map_err(|e| err(12, e.to_string()))?;

    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % 8 != 0 {
        let offset = HEADER_LEN + (body.len() / 8 * 8) as u64;
        return Err(err(offset, "trailing partial key"));
    }
    let mut keys = Vec::with_capacity(body.len() / 8);
    for (i, chunk) in body.chunks_exact(8).enumerate() {
        let k = u64::from_le_bytes(chunk.try_into().unwrap());
        if !width.contains(k) {
            return Err(err(HEADER_LEN + 8 * i as u64, format!("key {k:#x} exceeds {key_bits} bits")));
        }
        keys.push(k);
    }
    Ok(Trace { key_bits, keys })
}

pub fn read_trace_file(path: &Path) -> Result<Trace> {
    read_trace(BufReader::new(File::open(path)?))
}

pub fn write_trace_file(path: &Path, trace: &Trace) -> Result<()> {
    write_trace(BufWriter::new(File::create(path)?), trace)
}

/// A trace over `distinct` keys with `total` entries; every distinct key
/// occurs at least once.
pub fn synthetic(distinct: usize, total: usize, key_bits: u32, seed: u64) -> Result<Trace> {
    if total < distinct {
        return Err(Error::Config("trace length below distinct-key count".into()));
    }
    let width = KeyWidth::new(key_bits)?;
    let base = keys::unique_keys(distinct, width, seed)?;
    Ok(Trace { key_bits, keys: keys::with_duplicates(&base, total, seed.wrapping_add(1)) })
}

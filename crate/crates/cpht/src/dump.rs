//! Line-oriented iceberg table dumps.
//!
//! ```text
//!   # cpht-dump key_bits=30 primary_addr_bits=15 secondary_addr_bits=13 primary_bucket_slots=32 seed=7 primary_width=16 secondary_width=32
//!   <level> <bucket> <slot> <raw word, hex> <decoded key or ->
//! ```
//!
//! Level is `0` for the primary level and `1` for the secondary level. Only
//! non-empty slots are listed, so a dump plus its header line rebuilds the
//! table exactly.

use std::io::{BufRead, Write};

use cpht_core::iceberg::{IcebergConfig, IcebergTable, Level, SlotRef};
use cpht_core::{AtomicSlot, Key, SlotWidth};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DumpRecord {
    pub at: SlotRef,
    pub word: u64,
    pub key: Option<Key>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dump {
    pub config: IcebergConfig,
    pub primary_width: SlotWidth,
    pub secondary_width: SlotWidth,
    pub records: Vec<DumpRecord>,
}

impl Dump {
    pub fn of<P: AtomicSlot, S: AtomicSlot>(table: &IcebergTable<P, S>) -> Self {
        let b0 = table.primary_bucket_slots();
        let b1 = table.secondary_bucket_slots();
        let mut records = Vec::new();
        let levels = [
            (Level::Primary, b0, table.primary_words().collect::<Vec<_>>()),
            (Level::Secondary, b1, table.secondary_words().collect::<Vec<_>>()),
        ];
        for (level, b, words) in levels {
            for (i, w) in words.into_iter().enumerate() {
                if w != cpht_core::EMPTY {
                    let at = SlotRef { level, bucket: i / b, slot: i % b };
                    let key = table.decode_key(level, at.bucket, w).map(|(k, _)| k);
                    records.push(DumpRecord { at, word: w, key });
                }
            }
        }
        Dump { config: *table.config(), primary_width: P::WIDTH, secondary_width: S::WIDTH, records }
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let c = &self.config;
        writeln!(
            w,
            "# cpht-dump key_bits={} primary_addr_bits={} secondary_addr_bits={} primary_bucket_slots={} seed={} primary_width={} secondary_width={}",
            c.key_bits,
            c.primary_addr_bits,
            c.secondary_addr_bits,
            c.primary_bucket_slots,
            c.seed,
            self.primary_width.bits(),
            self.secondary_width.bits()
        )?;
        for r in &self.records {
            let level = match r.at.level {
                Level::Primary => 0,
                Level::Secondary => 1,
            };
            match r.key {
                Some(k) => writeln!(w, "{level} {} {} {:#x} {k}", r.at.bucket, r.at.slot, r.word)?,
                None => writeln!(w, "{level} {} {} {:#x} -", r.at.bucket, r.at.slot, r.word)?,
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Dump { line: 1, message: "empty dump".into() })?;
        let header = header?;
        let bad = |line: usize, message: &str| Error::Dump { line, message: message.into() };
        let fields = header
            .strip_prefix("# cpht-dump ")
            .ok_or_else(|| bad(1, "missing header"))?;
        let get = |name: &str| -> Result<u64> {
            fields
                .split_whitespace()
                .find_map(|f| f.strip_prefix(name).and_then(|v| v.strip_prefix('=')))
                .ok_or_else(|| bad(1, &format!("missing {name}")))?
                .parse()
                .map_err(|_| bad(1, &format!("bad {name}")))
        };
        let config = IcebergConfig::new(get("key_bits")? as u32, get("primary_addr_bits")? as u32, get("primary_bucket_slots")? as usize)
            .with_secondary_addr_bits(get("secondary_addr_bits")? as u32)
            .with_seed(get("seed")?);
        let primary_width = SlotWidth::from_bits(get("primary_width")? as u32)?;
        let secondary_width = SlotWidth::from_bits(get("secondary_width")? as u32)?;

        let mut records = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let n = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 5 {
                return Err(bad(n, "expected 5 fields"));
            }
            let level = match parts[0] {
                "0" => Level::Primary,
                "1" => Level::Secondary,
                _ => return Err(bad(n, "level must be 0 or 1")),
            };
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad(n, "bad number"));
            let word = parts[3]
                .strip_prefix("0x")
                .and_then(|h| u64::from_str_radix(h, 16).ok())
                .ok_or_else(|| bad(n, "bad raw word"))?;
            let key = match parts[4] {
                "-" => None,
                s => Some(s.parse().map_err(|_| bad(n, "bad key"))?),
            };
            records.push(DumpRecord { at: SlotRef { level, bucket: num(parts[1])?, slot: num(parts[2])? }, word, key });
        }
        Ok(Dump { config, primary_width, secondary_width, records })
    }

    /// Rebuilds the table. `P` and `S` must match the recorded widths.
    pub fn rebuild<P: AtomicSlot, S: AtomicSlot>(&self) -> Result<IcebergTable<P, S>> {
        if P::WIDTH != self.primary_width || S::WIDTH != self.secondary_width {
            return Err(Error::Config("slot widths differ from the dump".into()));
        }
        let c = &self.config;
        let b0 = c.primary_bucket_slots;
        let b1 = c.secondary_bucket_slots();
        let mut primary = vec![0u64; c.primary_slots()];
        let mut secondary = vec![0u64; c.secondary_slots()];
        for (i, r) in self.records.iter().enumerate() {
            let (words, b) = match r.at.level {
                Level::Primary => (&mut primary, b0),
                Level::Secondary => (&mut secondary, b1),
            };
            let idx = r.at.bucket * b + r.at.slot;
            if r.at.slot >= b || idx >= words.len() {
                return Err(Error::Dump { line: i + 2, message: "slot outside geometry".into() });
            }
            words[idx] = r.word;
        }
        Ok(IcebergTable::from_words(*c, &primary, &secondary)?)
    }
}

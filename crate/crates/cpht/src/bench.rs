//! Throughput benchmarks: put, find, find-or-put and trace replay against
//! either table, one CSV row per (fill, ratio, trial).
//!
//! Only the measured phase is timed. Filling a table up to the starting
//! point of a find or find-or-put run is not.

use std::collections::HashSet;
use std::io::Write;
use std::sync::atomic::{AtomicU16, AtomicU32, AtomicU64};
use std::time::Instant;

use rand::seq::{IndexedRandom, SliceRandom};
use serde::Serialize;

use cpht_core::cuckoo::{CuckooBuilder, CuckooConfig, CuckooTable, PutResult};
use cpht_core::iceberg::{IcebergConfig, IcebergTable, OpResult};
use cpht_core::slot::{admissible, SlotWidth};
use cpht_core::verify;
use cpht_core::{AtomicSlot, Key, KeyWidth};

use crate::batch::{self, OpCounts};
use crate::error::{Error, Result};
use crate::keys;
use crate::stress::trial_seed;
use crate::trace::Trace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Cuckoo,
    Iceberg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Workload {
    Put,
    Find,
    Fop,
    Trace,
}

/// Everything a benchmark run needs besides the trace itself.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub scheme: Scheme,
    /// Address bits of the cuckoo table or of the iceberg primary level.
    pub addr_bits: u32,
    pub bucket_slots: usize,
    pub slot_width: SlotWidth,
    /// Iceberg only. `None` sizes the secondary level to 1/8 of the primary.
    pub secondary_addr_bits: Option<u32>,
    pub secondary_slot_width: SlotWidth,
    pub key_bits: u32,
    /// Cuckoo hash functions.
    pub hashes: u32,
    pub max_chain: Option<usize>,
    /// Target fills for put and find, and the after-fills for fop.
    pub fills: Vec<f64>,
    /// Starting fill for fop.
    pub before: f64,
    /// Present-key ratios for find, prefix fractions for trace replay.
    pub ratios: Vec<f64>,
    /// Trace replays per table; passes after the first must be all FOUND.
    pub passes: usize,
    pub parallelism: usize,
    pub trials: usize,
    pub seed: u64,
    pub verify: bool,
}

impl BenchSpec {
    /// Desk-scale default: 2^20 slots (primary slots for iceberg), 30-bit
    /// keys, 16/32-bit iceberg slots and 32-bit cuckoo slots.
    pub fn new(scheme: Scheme, bucket_slots: usize) -> Self {
        let log_b = bucket_slots.max(1).trailing_zeros();
        BenchSpec {
            scheme,
            addr_bits: 20u32.saturating_sub(log_b),
            bucket_slots,
            slot_width: match scheme {
                Scheme::Cuckoo => SlotWidth::W32,
                Scheme::Iceberg => SlotWidth::W16,
            },
            secondary_addr_bits: None,
            secondary_slot_width: SlotWidth::W32,
            key_bits: 30,
            hashes: 3,
            max_chain: None,
            fills: vec![0.5, 0.6, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95],
            before: 0.0,
            ratios: vec![1.0],
            passes: 2,
            parallelism: 1,
            trials: 1,
            seed: 0,
            verify: false,
        }
    }

    pub fn iceberg_config(&self, seed: u64) -> IcebergConfig {
        let mut c = IcebergConfig::new(self.key_bits, self.addr_bits, self.bucket_slots).with_seed(seed);
        if let Some(n1) = self.secondary_addr_bits {
            c = c.with_secondary_addr_bits(n1);
        }
        c.with_skip_filled_rereads(true)
    }

    pub fn cuckoo_config(&self, seed: u64) -> CuckooConfig {
        let mut c = CuckooConfig::new(self.key_bits, self.addr_bits, self.bucket_slots)
            .with_hashes(self.hashes)
            .with_seed(seed);
        if let Some(m) = self.max_chain {
            c = c.with_max_chain(m);
        }
        c
    }

    pub fn capacity(&self) -> usize {
        match self.scheme {
            Scheme::Cuckoo => self.cuckoo_config(0).capacity(),
            Scheme::Iceberg => self.iceberg_config(0).capacity(),
        }
    }

    /// Builds one table to surface geometry and width errors up front.
    pub fn validate(&self) -> Result<()> {
        for f in self.fills.iter().chain(&self.ratios).chain([&self.before]) {
            if !(0.0..=1.0).contains(f) {
                return Err(Error::Config(format!("fraction {f} outside [0, 1]")));
            }
        }
        if self.scheme == Scheme::Iceberg {
            let c = self.iceberg_config(0);
            let (p, s) = (self.slot_width, self.secondary_slot_width);
            if !admissible(p, c.key_bits, c.primary_addr_bits, 0) {
                return Err(Error::Config(format!(
                    "{}-bit primary slots cannot hold {} - {} = {} remainder bits plus the occupancy bit",
                    p.bits(),
                    c.key_bits,
                    c.primary_addr_bits,
                    c.key_bits.saturating_sub(c.primary_addr_bits)
                )));
            }
            if !admissible(s, c.key_bits, c.secondary_addr_bits, 1) {
                return Err(Error::Config(format!(
                    "{}-bit secondary slots cannot hold {} - {} = {} remainder bits, the bucket bit and the occupancy bit",
                    s.bits(),
                    c.key_bits,
                    c.secondary_addr_bits,
                    c.key_bits.saturating_sub(c.secondary_addr_bits)
                )));
            }
        }
        make_table(self, 0).map(|_| ())
    }

    fn width(&self) -> Result<KeyWidth> {
        Ok(KeyWidth::new(self.key_bits)?)
    }

    fn slots_for(&self, fill: f64) -> usize {
        (fill * self.capacity() as f64).round() as usize
    }
}

/// One CSV line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub scheme: Scheme,
    pub addr_bits: u32,
    pub bucket_slots: usize,
    pub slot_width: u32,
    pub secondary_addr_bits: Option<u32>,
    pub secondary_slot_width: Option<u32>,
    pub key_bits: u32,
    pub workload: Workload,
    pub fill_before: f64,
    pub fill_after: f64,
    pub ratio: Option<f64>,
    pub trial: usize,
    pub seed: u64,
    pub ops: usize,
    pub seconds: f64,
    pub throughput: f64,
}

/// A row plus the bookkeeping behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub row: Row,
    pub counts: OpCounts,
    /// PUT count the workload was constructed to produce.
    pub expected_put: Option<usize>,
    /// Find answers that disagree with the reference set.
    pub wrong_answers: usize,
    /// Results of trace passes after the first.
    pub later_passes: Vec<OpCounts>,
    pub problems: Vec<String>,
}

impl Record {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Result of pushing a batch through a table.
struct Batch {
    results: Vec<OpResult>,
    /// Keys not in the table afterwards although the batch asked for them.
    dropped: Vec<Key>,
}

trait BenchTable {
    fn fill(&self) -> f64;
    /// Plain insertion of distinct keys.
    fn put(&mut self, keys: &[Key], par: usize) -> Batch;
    fn fop(&mut self, keys: &[Key], par: usize) -> Batch;
    fn find(&mut self, keys: &[Key], par: usize) -> Vec<bool>;
    /// Structural checks plus comparison of the stored key set.
    fn audit(&mut self, expected: &HashSet<Key>) -> Vec<String>;
}

struct Iceberg<P: AtomicSlot, S: AtomicSlot>(IcebergTable<P, S>);

impl<P: AtomicSlot, S: AtomicSlot> BenchTable for Iceberg<P, S> {
    fn fill(&self) -> f64 {
        self.0.level_fill().combined
    }

    fn put(&mut self, keys: &[Key], par: usize) -> Batch {
        self.fop(keys, par)
    }

    fn fop(&mut self, keys: &[Key], par: usize) -> Batch {
        let results = batch::fop_batch(&self.0, keys, par);
        let dropped = keys.iter().zip(&results).filter(|(_, r)| **r == OpResult::Full).map(|(&k, _)| k).collect();
        Batch { results, dropped }
    }

    fn find(&mut self, keys: &[Key], par: usize) -> Vec<bool> {
        batch::iceberg_find_batch(&self.0, keys, par)
    }

    fn audit(&mut self, expected: &HashSet<Key>) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(v) = verify::check_well_formed(&self.0) {
            out.push(format!("{} well-formedness violations, first {:?}", v.len(), v[0]));
        }
        let stored: Vec<Key> = verify::iceberg_keys(&self.0).into_iter().map(|(_, k)| k).collect();
        out.extend(compare_sets(&stored, expected));
        out
    }
}

enum Cuckoo<A: AtomicSlot> {
    Build(CuckooBuilder<A>),
    Query(CuckooTable<A>),
    Moving,
}

impl<A: AtomicSlot> Cuckoo<A> {
    fn builder(&mut self) -> &CuckooBuilder<A> {
        if let Cuckoo::Query(_) = self {
            let Cuckoo::Query(t) = std::mem::replace(self, Cuckoo::Moving) else { unreachable!() };
            *self = Cuckoo::Build(t.into_builder());
        }
        match self {
            Cuckoo::Build(b) => b,
            _ => unreachable!(),
        }
    }

    fn table(&mut self) -> &CuckooTable<A> {
        if let Cuckoo::Build(_) = self {
            let Cuckoo::Build(b) = std::mem::replace(self, Cuckoo::Moving) else { unreachable!() };
            *self = Cuckoo::Query(b.finish());
        }
        match self {
            Cuckoo::Query(t) => t,
            _ => unreachable!(),
        }
    }
}

impl<A: AtomicSlot> BenchTable for Cuckoo<A> {
    fn fill(&self) -> f64 {
        match self {
            Cuckoo::Build(b) => b.fill_factor(),
            Cuckoo::Query(t) => t.fill_factor(),
            Cuckoo::Moving => unreachable!(),
        }
    }

    fn put(&mut self, keys: &[Key], par: usize) -> Batch {
        let put = batch::put_batch(self.builder(), keys, par);
        let mut dropped = Vec::new();
        let results = put
            .iter()
            .map(|r| match r {
                PutResult::Put => OpResult::Put,
                PutResult::Full { dropped: d } => {
                    dropped.push(*d);
                    OpResult::Full
                }
            })
            .collect();
        Batch { results, dropped }
    }

    fn fop(&mut self, keys: &[Key], par: usize) -> Batch {
        self.table();
        let Cuckoo::Query(t) = std::mem::replace(self, Cuckoo::Moving) else { unreachable!() };
        let out = batch::cuckoo_fop_batch(t, keys, par);
        *self = Cuckoo::Build(out.builder);
        Batch { results: out.results, dropped: out.dropped }
    }

    fn find(&mut self, keys: &[Key], par: usize) -> Vec<bool> {
        batch::cuckoo_find_batch(self.table(), keys, par)
    }

    fn audit(&mut self, expected: &HashSet<Key>) -> Vec<String> {
        let t = self.table();
        let mut out = Vec::new();
        if let Err(v) = verify::check_cuckoo_order(t) {
            out.push(format!("{} entries behind a non-full earlier bucket, first {:?}", v.len(), v[0]));
        }
        out.extend(compare_sets(&verify::cuckoo_keys(t), expected));
        out
    }
}

fn compare_sets(stored: &[Key], expected: &HashSet<Key>) -> Vec<String> {
    let mut out = Vec::new();
    let set: HashSet<Key> = stored.iter().copied().collect();
    if set.len() != stored.len() {
        out.push(format!("{} duplicate entries", stored.len() - set.len()));
    }
    let missing = expected.difference(&set).count();
    let extra = set.difference(expected).count();
    if missing + extra > 0 {
        out.push(format!("stored keys differ from reference: {missing} missing, {extra} unexpected"));
    }
    out
}

macro_rules! dispatch_iceberg {
    ($p:expr, $s:expr, $cfg:expr, $($w:ident => $t:ty),*) => {
        dispatch_iceberg!(@outer $p, $s, $cfg, [$($w => $t),*], [$($w => $t),*])
    };
    (@outer $p:expr, $s:expr, $cfg:expr, [$($w:ident => $t:ty),*], $inner:tt) => {
        match $p {
            $(SlotWidth::$w => dispatch_iceberg!(@inner $s, $cfg, $t, $inner),)*
        }
    };
    (@inner $s:expr, $cfg:expr, $pt:ty, [$($w:ident => $t:ty),*]) => {
        match $s {
            $(SlotWidth::$w => Box::new(Iceberg(IcebergTable::<$pt, $t>::new($cfg)?)) as Box<dyn BenchTable>,)*
        }
    };
}

fn make_table(spec: &BenchSpec, seed: u64) -> Result<Box<dyn BenchTable>> {
    Ok(match spec.scheme {
        Scheme::Iceberg => dispatch_iceberg!(
            spec.slot_width,
            spec.secondary_slot_width,
            spec.iceberg_config(seed),
            W16 => AtomicU16,
            W32 => AtomicU32,
            W64 => AtomicU64
        ),
        Scheme::Cuckoo => {
            let c = spec.cuckoo_config(seed);
            match spec.slot_width {
                SlotWidth::W16 => Box::new(Cuckoo::Build(CuckooBuilder::<AtomicU16>::new(c)?)),
                SlotWidth::W32 => Box::new(Cuckoo::Build(CuckooBuilder::<AtomicU32>::new(c)?)),
                SlotWidth::W64 => Box::new(Cuckoo::Build(CuckooBuilder::<AtomicU64>::new(c)?)),
            }
        }
    })
}

/// Keys the table should hold, maintained from batch results.
#[derive(Default)]
struct Reference(HashSet<Key>);

impl Reference {
    fn apply(&mut self, keys: &[Key], batch: &Batch) {
        self.0.extend(keys.iter().copied());
        for k in &batch.dropped {
            self.0.remove(k);
        }
    }
}

struct Timed<T> {
    value: T,
    seconds: f64,
}

fn timed<T>(f: impl FnOnce() -> T) -> Timed<T> {
    let start = Instant::now();
    let value = f();
    Timed { value, seconds: start.elapsed().as_secs_f64() }
}

impl BenchSpec {
    fn row(&self, workload: Workload, trial: usize, seed: u64) -> Row {
        let iceberg = self.scheme == Scheme::Iceberg;
        Row {
            scheme: self.scheme,
            addr_bits: self.addr_bits,
            bucket_slots: self.bucket_slots,
            slot_width: self.slot_width.bits(),
            secondary_addr_bits: iceberg.then(|| self.iceberg_config(0).secondary_addr_bits),
            secondary_slot_width: iceberg.then(|| self.secondary_slot_width.bits()),
            key_bits: self.key_bits,
            workload,
            fill_before: 0.0,
            fill_after: 0.0,
            ratio: None,
            trial,
            seed,
            ops: 0,
            seconds: 0.0,
            throughput: 0.0,
        }
    }
}

fn finish(
    spec: &BenchSpec,
    mut row: Row,
    table: &mut dyn BenchTable,
    reference: &Reference,
    ops: usize,
    seconds: f64,
    counts: OpCounts,
) -> Record {
    row.fill_after = table.fill();
    row.ops = ops;
    row.seconds = seconds;
    row.throughput = if seconds > 0.0 { ops as f64 / seconds } else { 0.0 };
    let problems = if spec.verify { table.audit(&reference.0) } else { Vec::new() };
    Record { row, counts, expected_put: None, wrong_answers: 0, later_passes: Vec::new(), problems }
}

/// Inserts fresh unique keys up to each target fill.
pub fn bench_put(spec: &BenchSpec) -> Result<Vec<Record>> {
    spec.validate()?;
    let mut out = Vec::new();
    for &fill in &spec.fills {
        for trial in 0..spec.trials {
            let seed = trial_seed(spec.seed, trial);
            let mut table = make_table(spec, seed)?;
            let keys = keys::unique_keys(spec.slots_for(fill), spec.width()?, seed)?;
            let t = timed(|| table.put(&keys, spec.parallelism));
            let mut reference = Reference::default();
            reference.apply(&keys, &t.value);
            let counts = OpCounts::tally(&t.value.results);
            let mut rec = finish(spec, spec.row(Workload::Put, trial, seed), &mut *table, &reference, keys.len(), t.seconds, counts);
            rec.expected_put = Some(keys.len());
            out.push(rec);
        }
    }
    Ok(out)
}

/// Fills to each target, then looks up half as many unique keys as the
/// table has slots, with the given fraction of them present.
pub fn bench_find(spec: &BenchSpec) -> Result<Vec<Record>> {
    spec.validate()?;
    let queries = spec.capacity() / 2;
    let mut out = Vec::new();
    for &fill in &spec.fills {
        for trial in 0..spec.trials {
            let seed = trial_seed(spec.seed, trial);
            let mut table = make_table(spec, seed)?;
            let n = spec.slots_for(fill);
            let pool = keys::unique_keys(n + queries, spec.width()?, seed)?;
            let (inserted, absent) = pool.split_at(n);
            let batch = table.put(inserted, spec.parallelism);
            let mut reference = Reference::default();
            reference.apply(inserted, &batch);
            let fill_before = table.fill();

            let mut rng = keys::rng(seed ^ 0xF1D);
            for &ratio in &spec.ratios {
                let present = ((ratio * queries as f64).round() as usize).min(n);
                let mut q: Vec<Key> = inserted.choose_multiple(&mut rng, present).copied().collect();
                q.extend_from_slice(&absent[..queries - present]);
                q.shuffle(&mut rng);
                let t = timed(|| table.find(&q, spec.parallelism));
                let wrong = q.iter().zip(&t.value).filter(|(k, &f)| reference.0.contains(k) != f).count();
                let mut row = spec.row(Workload::Find, trial, seed);
                row.fill_before = fill_before;
                row.ratio = Some(ratio);
                let mut rec = finish(spec, row, &mut *table, &reference, q.len(), t.seconds, OpCounts::default());
                rec.wrong_answers = wrong;
                if wrong > 0 {
                    rec.problems.push(format!("{wrong} of {} lookups disagree with the reference set", q.len()));
                }
                out.push(rec);
            }
        }
    }
    Ok(out)
}

/// Fills to `before`, then runs one find-or-put batch that contains exactly
/// enough new distinct keys to reach each after-fill, padded with repeats of
/// old and new keys.
pub fn bench_fop(spec: &BenchSpec) -> Result<Vec<Record>> {
    spec.validate()?;
    let cap = spec.capacity();
    let mut out = Vec::new();
    for &after in &spec.fills {
        if spec.before > after {
            return Err(Error::Config(format!("before fill {} exceeds after fill {after}", spec.before)));
        }
        for trial in 0..spec.trials {
            let seed = trial_seed(spec.seed, trial);
            let mut table = make_table(spec, seed)?;
            let base_n = spec.slots_for(spec.before);
            let new_n = spec.slots_for(after) - base_n;
            let pool = keys::unique_keys(base_n + new_n, spec.width()?, seed)?;
            let (old, new) = pool.split_at(base_n);
            let mut reference = Reference::default();
            let batch = table.put(old, spec.parallelism);
            reference.apply(old, &batch);
            let fill_before = table.fill();

            let mut rng = keys::rng(seed ^ 0xF0B);
            let mut input = new.to_vec();
            if !pool.is_empty() {
                let len = (cap / 2).max(new_n);
                while input.len() < len {
                    input.push(*pool.choose(&mut rng).expect("pool is not empty"));
                }
            }
            input.shuffle(&mut rng);

            let t = timed(|| table.fop(&input, spec.parallelism));
            reference.apply(&input, &t.value);
            let counts = OpCounts::tally(&t.value.results);
            let mut row = spec.row(Workload::Fop, trial, seed);
            row.fill_before = fill_before;
            let mut rec = finish(spec, row, &mut *table, &reference, input.len(), t.seconds, counts);
            rec.expected_put = Some(new_n);
            if counts.full == 0 && batch.dropped.is_empty() && counts.put != new_n {
                rec.problems.push(format!("{} PUT results for {new_n} new keys", counts.put));
            }
            out.push(rec);
        }
    }
    Ok(out)
}

/// Replays trace prefixes, one fresh table per prefix and trial.
pub fn bench_trace(spec: &BenchSpec, trace: &Trace) -> Result<Vec<Record>> {
    spec.validate()?;
    let width = spec.width()?;
    if let Some(i) = trace.keys.iter().position(|&k| !width.contains(k)) {
        return Err(Error::Trace {
            offset: 16 + 8 * i as u64,
            message: format!("key {:#x} outside the {}-bit key domain of the table", trace.keys[i], spec.key_bits),
        });
    }
    let mut out = Vec::new();
    for &ratio in &spec.ratios {
        let prefix = &trace.keys[..(ratio * trace.keys.len() as f64).round() as usize];
        if prefix.is_empty() {
            continue;
        }
        let distinct = prefix.iter().collect::<HashSet<_>>().len();
        for trial in 0..spec.trials {
            let seed = trial_seed(spec.seed, trial);
            let mut table = make_table(spec, seed)?;
            let t = timed(|| table.fop(prefix, spec.parallelism));
            let mut reference = Reference::default();
            reference.apply(prefix, &t.value);
            let counts = OpCounts::tally(&t.value.results);

            let mut later = Vec::new();
            for _ in 1..spec.passes {
                let again = table.fop(prefix, spec.parallelism);
                reference.apply(prefix, &again);
                later.push(OpCounts::tally(&again.results));
            }
            let mut row = spec.row(Workload::Trace, trial, seed);
            row.ratio = Some(ratio);
            let mut rec = finish(spec, row, &mut *table, &reference, prefix.len(), t.seconds, counts);
            rec.expected_put = Some(distinct);
            if counts.full == 0 {
                if counts.put != distinct {
                    rec.problems.push(format!("{} PUT results for {distinct} distinct keys", counts.put));
                }
                if let Some(p) = later.iter().position(|c| c.found != prefix.len()) {
                    rec.problems.push(format!("pass {} is not all FOUND: {:?}", p + 2, later[p]));
                }
            }
            rec.later_passes = later;
            out.push(rec);
        }
    }
    Ok(out)
}

pub fn write_csv<W: Write>(w: W, rows: impl IntoIterator<Item = Row>) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scheme: Scheme, b: usize) -> BenchSpec {
        let mut s = BenchSpec::new(scheme, b);
        s.addr_bits = 12 - b.trailing_zeros();
        s.key_bits = 22;
        s.verify = true;
        s.parallelism = 3;
        s
    }

    #[test]
    fn put_rows_are_deterministic_in_fill() {
        let mut s = small(Scheme::Cuckoo, 16);
        s.fills = vec![0.5, 0.9];
        s.trials = 2;
        let a = bench_put(&s).unwrap();
        let b = bench_put(&s).unwrap();
        assert_eq!(a.len(), 4);
        for (x, y) in a.iter().zip(&b) {
            assert!(x.is_ok(), "{:?}", x.problems);
            assert_eq!(x.row.fill_after, y.row.fill_after);
            assert_eq!(x.row.seed, y.row.seed);
        }
        assert_eq!(a[2].row.fill_after, (0.9f64 * 4096.0).round() / 4096.0);
    }

    #[test]
    fn find_has_no_wrong_answers() {
        for scheme in [Scheme::Cuckoo, Scheme::Iceberg] {
            let mut s = small(scheme, 16);
            s.fills = vec![0.85];
            s.ratios = vec![0.0, 0.5, 1.0];
            let r = bench_find(&s).unwrap();
            assert_eq!(r.len(), 3);
            for rec in r {
                assert!(rec.is_ok(), "{scheme:?} {:?}", rec.problems);
                assert_eq!(rec.row.ops, s.capacity() / 2);
            }
        }
    }

    #[test]
    fn fop_reaches_after_fill_exactly() {
        for scheme in [Scheme::Cuckoo, Scheme::Iceberg] {
            let mut s = small(scheme, 32);
            s.before = 0.4;
            s.fills = vec![0.4, 0.8];
            let r = bench_fop(&s).unwrap();
            let cap = s.capacity() as f64;
            assert_eq!(r[0].counts.put, 0);
            assert_eq!(r[0].counts.found, r[0].row.ops);
            assert_eq!(r[1].counts.put, r[1].expected_put.unwrap());
            assert!((r[1].row.fill_after - 0.8).abs() * cap <= 1.0);
            assert!(r.iter().all(|x| x.is_ok()));
        }
        let mut s = small(Scheme::Iceberg, 32);
        s.before = 0.9;
        s.fills = vec![0.5];
        assert!(matches!(bench_fop(&s), Err(Error::Config(_))));
    }

    #[test]
    fn trace_second_pass_all_found() {
        let s = small(Scheme::Iceberg, 8);
        let trace = crate::trace::synthetic(2000, 5000, 22, 9).unwrap();
        let r = bench_trace(&s, &trace).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].counts.put, 2000);
        assert_eq!(r[0].later_passes[0].found, 5000);
        assert!(r[0].is_ok());
        let empty = Trace { key_bits: 22, keys: vec![] };
        assert!(bench_trace(&s, &empty).unwrap().is_empty());
        let wide = Trace { key_bits: 30, keys: vec![1, 1 << 29] };
        assert!(matches!(bench_trace(&s, &wide), Err(Error::Trace { offset: 24, .. })));
    }

    #[test]
    fn inadmissible_width_is_explained() {
        let mut s = small(Scheme::Iceberg, 8);
        s.addr_bits = 6;
        let e = s.validate().unwrap_err().to_string();
        assert!(e.contains("16 remainder bits"), "{e}");
    }

    #[test]
    fn csv_header() {
        let s = small(Scheme::Cuckoo, 16);
        let mut buf = Vec::new();
        write_csv(&mut buf, [s.row(Workload::Put, 0, 1)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "scheme,addr_bits,bucket_slots,slot_width,secondary_addr_bits,secondary_slot_width,key_bits,\
             workload,fill_before,fill_after,ratio,trial,seed,ops,seconds,throughput\ncuckoo,8,16,32,,,22,put,"
        ));
    }
}

//! Concurrent find-or-put stress harness.
//!
//! Each trial builds a fresh iceberg table, runs a key multiset through
//! `fop` on several threads, joins, and then checks the final table and the
//! returned results:
//!
//! * the table is well-formed;
//! * no key got more than one `PUT`, and every key present got exactly one;
//! * every key with a `FOUND` or `PUT` result is present;
//! * every key with a `FULL` result is absent and all three of its buckets
//!   are full (buckets never empty out, so the end state is a sound witness);
//! * the insertion log shows each slot written once, from `EMPTY`, with the
//!   value it still holds, and one write per `PUT`;
//! * an optional monitor thread sees no occupied slot change while the
//!   workers run;
//! * no call needed more retries than its three buckets have slots.
//!
//! With `parallelism == 1` the result sequence must also equal the
//! sequential reference model exactly.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicBool, Ordering};
use std::thread;

use cpht_core::iceberg::{FopOutcome, IcebergConfig, IcebergTable, Level, OpResult, SlotObserver, SlotRef};
use cpht_core::quotient::splitmix64;
use cpht_core::verify::{self, oracle};
use cpht_core::{AtomicSlot, Key, KeyWidth, EMPTY};

use crate::error::Result;
use crate::keys;

#[derive(Clone, Debug, PartialEq)]
pub enum KeyMix {
    /// `ops` operations over `distinct` random keys, each appearing at least
    /// once.
    Random { ops: usize, distinct: usize },
    /// Every key of the domain, `copies` times each.
    Domain { copies: usize },
}

#[derive(Clone, Debug)]
pub struct StressConfig {
    pub table: IcebergConfig,
    pub parallelism: usize,
    pub keys: KeyMix,
    pub trials: usize,
    pub seed: u64,
    /// Scan the table concurrently and flag any occupied slot that changes.
    pub monitor: bool,
    /// Randomly yield between snapshot and CAS to widen race windows.
    pub yield_before_cas: bool,
}

impl StressConfig {
    pub fn new(table: IcebergConfig, parallelism: usize, keys: KeyMix, trials: usize) -> Self {
        StressConfig { table, parallelism, keys, trials, seed: 0, monitor: true, yield_before_cas: true }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StressViolation {
    pub trial: usize,
    /// Table and key seed of the trial, for replay.
    pub seed: u64,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct StressReport {
    pub trials: usize,
    pub ops: usize,
    pub found: usize,
    pub put: usize,
    pub full: usize,
    pub max_rounds: usize,
    pub violations: Vec<StressViolation>,
}

impl StressReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

struct WorkerObserver {
    log: RefCell<Vec<(SlotRef, u64)>>,
    rng: Cell<u64>,
    jitter: bool,
}

impl SlotObserver for WorkerObserver {
    fn inserted(&self, at: SlotRef, word: u64) {
        self.log.borrow_mut().push((at, word));
    }

    fn before_cas(&self, _at: SlotRef) {
        if self.jitter {
            let mut s = self.rng.get();
            let r = splitmix64(&mut s);
            self.rng.set(s);
            if r.is_multiple_of(4) {
                thread::yield_now();
            }
        }
    }
}

pub fn trial_seed(base: u64, trial: usize) -> u64 {
    let mut s = base ^ (trial as u64).wrapping_mul(0xA076_1D64_78BD_642F);
    splitmix64(&mut s)
}

fn trial_ops(cfg: &StressConfig, seed: u64) -> Result<Vec<Key>> {
    let width = KeyWidth::new(cfg.table.key_bits)?;
    Ok(match cfg.keys {
        KeyMix::Random { ops, distinct } => {
            let base = keys::unique_keys(distinct, width, seed)?;
            keys::with_duplicates(&base, ops, seed ^ 1)
        }
        KeyMix::Domain { copies } => {
            let base: Vec<Key> = (0..=width.max_key()).collect();
            keys::with_duplicates(&base, base.len() * copies, seed ^ 1)
        }
    })
}

pub fn run<P: AtomicSlot, S: AtomicSlot>(cfg: &StressConfig) -> Result<StressReport> {
    let mut report = StressReport { trials: cfg.trials, ..Default::default() };
    for trial in 0..cfg.trials {
        let seed = trial_seed(cfg.seed, trial);
        let problems = run_trial::<P, S>(cfg, seed, &mut report)?;
        report
            .violations
            .extend(problems.into_iter().map(|message| StressViolation { trial, seed, message }));
    }
    Ok(report)
}

/// Runs one trial and returns every problem found.
fn run_trial<P: AtomicSlot, S: AtomicSlot>(
    cfg: &StressConfig,
    seed: u64,
    report: &mut StressReport,
) -> Result<Vec<String>> {
    let table_cfg = cfg.table.with_seed(seed);
    let table = IcebergTable::<P, S>::new(table_cfg)?;
    let ops = trial_ops(cfg, seed)?;
    let par = cfg.parallelism.max(1);
    let chunk = ops.len().div_ceil(par).max(1);
    let done = AtomicBool::new(false);

    let (outcomes, log, monitor_problems) = thread::scope(|s| {
        let monitor = cfg.monitor.then(|| s.spawn(|| monitor_slots(&table, &done)));
        let workers: Vec<_> = ops
            .chunks(chunk)
            .enumerate()
            .map(|(w, part)| {
                let table = &table;
                let jitter = cfg.yield_before_cas && par > 1;
                s.spawn(move || {
                    let obs = WorkerObserver {
                        log: RefCell::new(Vec::new()),
                        rng: Cell::new(seed ^ w as u64),
                        jitter,
                    };
                    let out: Vec<FopOutcome> = part.iter().map(|&k| table.fop_traced(k, &obs)).collect();
                    (out, obs.log.into_inner())
                })
            })
            .collect();
        let mut outcomes = Vec::with_capacity(ops.len());
        let mut log = Vec::new();
        for h in workers {
            let (o, l) = h.join().expect("stress worker panicked");
            outcomes.extend(o);
            log.extend(l);
        }
        done.store(true, Ordering::SeqCst);
        let monitor_problems = monitor.map(|m| m.join().expect("monitor panicked")).unwrap_or_default();
        (outcomes, log, monitor_problems)
    });

    let mut problems = monitor_problems;
    let results: Vec<OpResult> = outcomes.iter().map(|o| o.result).collect();
    report.ops += ops.len();
    for r in &results {
        match r {
            OpResult::Found => report.found += 1,
            OpResult::Put => report.put += 1,
            OpResult::Full => report.full += 1,
        }
    }

    // Termination bound.
    let slots = table.primary_bucket_slots() + 2 * table.secondary_bucket_slots();
    for (o, &k) in outcomes.iter().zip(&ops) {
        report.max_rounds = report.max_rounds.max(o.rounds);
        if o.rounds > slots + 1 {
            problems.push(format!("fop({k}) took {} rounds, bound is {}", o.rounds, slots + 1));
        }
    }

    if let Err(v) = verify::check_well_formed(&table) {
        problems.push(format!("table not well-formed: {} violations, first {:?}", v.len(), v[0]));
    }

    let stored: BTreeSet<Key> = verify::iceberg_keys(&table).into_iter().map(|(_, k)| k).collect();
    let mut per_key: HashMap<Key, [usize; 3]> = HashMap::new();
    for (&k, r) in ops.iter().zip(&results) {
        let e = per_key.entry(k).or_default();
        match r {
            OpResult::Found => e[0] += 1,
            OpResult::Put => e[1] += 1,
            OpResult::Full => e[2] += 1,
        }
    }
    for (&k, &[found, put, full]) in &per_key {
        let present = stored.contains(&k);
        if put > 1 {
            problems.push(format!("key {k} returned PUT {put} times"));
        }
        if present && put != 1 {
            problems.push(format!("key {k} present but returned PUT {put} times"));
        }
        if (found > 0 || put > 0) && !present {
            problems.push(format!("key {k} returned FOUND/PUT but is absent"));
        }
        if full > 0 && (present || !verify::buckets_full_without(&table, k)) {
            problems.push(format!("key {k} returned FULL but its buckets are not full without it"));
        }
        if present != table.find(k) {
            problems.push(format!("find({k}) disagrees with the table contents"));
        }
    }
    // Insertion log.
    let mut written = BTreeSet::new();
    for &(at, word) in &log {
        if !written.insert(at) {
            problems.push(format!("slot {at:?} written twice"));
        }
        let now = table.word(at);
        if now != word {
            problems.push(format!("slot {at:?} holds {now:#x}, log says {word:#x}"));
        }
    }
    let occupied = table.level_fill();
    let occupied = occupied.primary_occupied + occupied.secondary_occupied;
    if log.len() != report_puts(&results) || occupied != log.len() {
        problems.push(format!(
            "{} PUT results, {} logged writes, {} occupied slots",
            report_puts(&results),
            log.len(),
            occupied
        ));
    }

    if par == 1 {
        let expected = oracle::oracle_run(table_cfg, &ops)?;
        if expected.results != results {
            let i = expected.results.iter().zip(&results).position(|(a, b)| a != b).unwrap_or(0);
            problems.push(format!(
                "sequential run differs from the reference model at op {i}: {:?} vs {:?}",
                results.get(i),
                expected.results.get(i)
            ));
        }
        if expected.keys != stored {
            problems.push("sequential run ends with a different key set than the reference model".into());
        }
    }
    Ok(problems)
}

fn report_puts(results: &[OpResult]) -> usize {
    results.iter().filter(|&&r| r == OpResult::Put).count()
}

/// Watches every slot until `done`; an occupied slot must never change.
fn monitor_slots<P: AtomicSlot, S: AtomicSlot>(table: &IcebergTable<P, S>, done: &AtomicBool) -> Vec<String> {
    let b0 = table.primary_bucket_slots();
    let b1 = table.secondary_bucket_slots();
    let mut shadow_p = vec![EMPTY; table.config().primary_slots()];
    let mut shadow_s = vec![EMPTY; table.config().secondary_slots()];
    let mut problems = Vec::new();
    loop {
        let finished = done.load(Ordering::SeqCst);
        for (level, b, shadow) in [(Level::Primary, b0, &mut shadow_p), (Level::Secondary, b1, &mut shadow_s)] {
            for (i, old) in shadow.iter_mut().enumerate() {
                let at = SlotRef { level, bucket: i / b, slot: i % b };
                let now = table.word(at);
                if *old != EMPTY && now != *old {
                    problems.push(format!("monitor: slot {at:?} changed {:#x} -> {now:#x}", *old));
                }
                *old = now;
            }
        }
        if finished || problems.len() > 16 {
            return problems;
        }
        thread::yield_now();
    }
}

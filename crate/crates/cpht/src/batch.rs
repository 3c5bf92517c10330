//! Batch operations spread over threads.
//!
//! Each thread takes one contiguous slice of the input and runs the
//! single-key operation on every element of it. Results come back in input
//! order.

use std::thread;

use cpht_core::cuckoo::{CuckooBuilder, CuckooTable, PutResult};
use cpht_core::iceberg::{IcebergTable, OpResult};
use cpht_core::{AtomicSlot, Key};

/// Maps `f` over `items` on up to `parallelism` threads.
pub fn parallel_map<T, R, F>(items: &[T], parallelism: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if parallelism <= 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(parallelism);
    let f = &f;
    thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(f).collect::<Vec<R>>()))
            .collect();
        let mut out = Vec::with_capacity(items.len());
        for h in handles {
            out.extend(h.join().expect("batch worker panicked"));
        }
        out
    })
}

pub fn put_batch<A: AtomicSlot>(builder: &CuckooBuilder<A>, keys: &[Key], parallelism: usize) -> Vec<PutResult> {
    parallel_map(keys, parallelism, |&k| builder.put(k))
}

pub fn cuckoo_find_batch<A: AtomicSlot>(table: &CuckooTable<A>, keys: &[Key], parallelism: usize) -> Vec<bool> {
    parallel_map(keys, parallelism, |&k| table.find(k))
}

pub fn fop_batch<P: AtomicSlot, S: AtomicSlot>(
    table: &IcebergTable<P, S>,
    keys: &[Key],
    parallelism: usize,
) -> Vec<OpResult> {
    parallel_map(keys, parallelism, |&k| table.fop(k))
}

pub fn iceberg_find_batch<P: AtomicSlot, S: AtomicSlot>(
    table: &IcebergTable<P, S>,
    keys: &[Key],
    parallelism: usize,
) -> Vec<bool> {
    parallel_map(keys, parallelism, |&k| table.find(k))
}

/// Counts of each find-or-put outcome.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub found: usize,
    pub put: usize,
    pub full: usize,
}

impl OpCounts {
    pub fn tally(results: &[OpResult]) -> Self {
        let mut c = OpCounts::default();
        for r in results {
            match r {
                OpResult::Found => c.found += 1,
                OpResult::Put => c.put += 1,
                OpResult::Full => c.full += 1,
            }
        }
        c
    }
}

pub struct CuckooFop<A: AtomicSlot> {
    /// Per-input results.
    pub results: Vec<OpResult>,
    /// Keys left homeless by puts that hit the chain bound. They may be
    /// keys that were present before the batch.
    pub dropped: Vec<Key>,
    pub builder: CuckooBuilder<A>,
}

/// Cuckoo find-or-put by batch: dedupe the input, look every distinct key
/// up, then put the missing ones.
pub fn cuckoo_fop_batch<A: AtomicSlot>(table: CuckooTable<A>, keys: &[Key], parallelism: usize) -> CuckooFop<A> {
    let mut unique = keys.to_vec();
    unique.sort_unstable();
    unique.dedup();
    let present = cuckoo_find_batch(&table, &unique, parallelism);
    let missing: Vec<Key> = unique.iter().zip(&present).filter(|(_, &p)| !p).map(|(&k, _)| k).collect();
    let builder = table.into_builder();
    let put = put_batch(&builder, &missing, parallelism);

    let lookup = |k: Key| -> OpResult {
        let i = unique.binary_search(&k).expect("key came from the input");
        if present[i] {
            OpResult::Found
        } else {
            let m = missing.binary_search(&k).expect("missing keys are sorted");
            match put[m] {
                PutResult::Put => OpResult::Put,
                PutResult::Full { .. } => OpResult::Full,
            }
        }
    };
    // Only the first occurrence of a newly put key reports PUT.
    let mut reported = vec![false; missing.len()];
    let results = keys
        .iter()
        .map(|&k| match lookup(k) {
            OpResult::Put => {
                let m = missing.binary_search(&k).unwrap();
                if std::mem::replace(&mut reported[m], true) {
                    OpResult::Found
                } else {
                    OpResult::Put
                }
            }
            r => r,
        })
        .collect();
    let dropped = put
        .iter()
        .filter_map(|r| match r {
            PutResult::Full { dropped } => Some(*dropped),
            PutResult::Put => None,
        })
        .collect();
    CuckooFop { results, dropped, builder }
}

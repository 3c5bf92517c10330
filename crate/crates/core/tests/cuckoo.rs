use std::collections::HashSet;
use std::sync::atomic::{AtomicU16, AtomicU32};

use cpht_core::cuckoo::{CuckooBuilder, CuckooConfig, PutResult};
use cpht_core::quotient::splitmix64;
use cpht_core::verify::{check_cuckoo_order, cuckoo_keys};
use cpht_core::Key;

fn distinct_keys(n: usize, bits: u32, seed: u64) -> Vec<Key> {
    let mut s = seed;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    while out.len() < n {
        let k = splitmix64(&mut s) & ((1 << bits) - 1);
        if seen.insert(k) {
            out.push(k);
        }
    }
    out
}

#[test]
fn build_to_high_fill_and_audit() {
    for (b, seed) in [(8usize, 1u64), (16, 2), (32, 3)] {
        let cfg = CuckooConfig::new(28, 14 - b.trailing_zeros(), b).with_seed(seed);
        let builder = CuckooBuilder::<AtomicU32>::new(cfg).unwrap();
        let keys = distinct_keys(cfg.capacity() * 9 / 10, 28, seed);
        let mut evictions = 0;
        let mut dropped = HashSet::new();
        for &k in &keys {
            let out = builder.put_traced(k, &mut |_| evictions += 1);
            if let PutResult::Full { dropped: d } = out.result {
                dropped.insert(d);
            }
        }
        assert!(evictions > 0, "B={b}: no eviction chains exercised");
        let table = builder.finish();
        check_cuckoo_order(&table).unwrap();
        let stored: HashSet<Key> = cuckoo_keys(&table).into_iter().collect();
        let expected: HashSet<Key> = keys.iter().copied().filter(|k| !dropped.contains(k)).collect();
        assert_eq!(stored, expected, "B={b}");
        for &k in &keys {
            assert_eq!(table.find(k), expected.contains(&k));
        }
        for k in distinct_keys(20_000, 28, seed ^ 0xABC) {
            assert_eq!(table.find(k), expected.contains(&k));
        }
    }
}

#[test]
fn evicted_keys_stay_findable() {
    // One hash function per bucket pair and tiny buckets force long chains.
    let cfg = CuckooConfig::new(20, 6, 2).with_hashes(2).with_seed(9);
    let b = CuckooBuilder::<AtomicU16>::new(cfg).unwrap();
    let keys = distinct_keys(100, 20, 4);
    let mut moved = Vec::new();
    let mut dropped = HashSet::new();
    for &k in &keys {
        if let PutResult::Full { dropped: d } = b.put_traced(k, &mut |e| moved.push(e.key)).result {
            dropped.insert(d);
        }
    }
    let t = b.finish();
    assert!(!moved.is_empty());
    for k in moved {
        assert_eq!(t.find(k), !dropped.contains(&k));
    }
}

#[test]
fn hash_index_recovery_matches_stored_tag() {
    let cfg = CuckooConfig::new(24, 8, 8).with_seed(1);
    let b = CuckooBuilder::<AtomicU32>::new(cfg).unwrap();
    for k in distinct_keys(1800, 24, 6) {
        b.put(k);
    }
    let t = b.finish();
    for a in 0..t.buckets() {
        for w in t.bucket_words(a) {
            if let Some((k, j)) = t.decode(a, w) {
                let first = t.recover_hash_index(k, a).unwrap();
                assert!(first <= j);
                assert_eq!(t.locate(k, j).0, a);
            }
        }
    }
}

#[test]
fn concurrent_build() {
    let cfg = CuckooConfig::new(26, 10, 16).with_seed(12);
    let b = CuckooBuilder::<AtomicU32>::new(cfg).unwrap();
    let keys = distinct_keys(cfg.capacity() * 85 / 100, 26, 12);
    let dropped: Vec<Key> = std::thread::scope(|s| {
        let hs: Vec<_> = keys
            .chunks(keys.len() / 4 + 1)
            .map(|part| {
                let b = &b;
                s.spawn(move || {
                    part.iter()
                        .filter_map(|&k| match b.put(k) {
                            PutResult::Full { dropped } => Some(dropped),
                            PutResult::Put => None,
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        hs.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    let t = b.finish();
    let stored: HashSet<Key> = cuckoo_keys(&t).into_iter().collect();
    assert_eq!(stored.len() + dropped.len(), keys.len());
    check_cuckoo_order(&t).unwrap();
}

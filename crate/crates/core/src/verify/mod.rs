//! Checkers for the iceberg correctness argument and the cuckoo build.
//!
//! Everything here runs single-threaded on a quiescent table.

pub mod oracle;
pub mod order;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::cuckoo::CuckooTable;
use crate::iceberg::{IcebergTable, Level, SlotRef};
use crate::quotient::Key;
use crate::slot::{AtomicSlot, EMPTY};
use order::{SlotCoord, SlotOrder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// A non-empty word that is not a valid entry for its level.
    BadEncoding,
    /// A key sits behind a slot that is empty or holds the same key.
    OrderProperty,
    /// A key is stored more than once.
    DuplicateKey,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub at: SlotRef,
    pub word: u64,
    /// Key decoded from `at`, if any.
    pub key: Option<Key>,
    /// The earlier slot that breaks the order property, or the other copy of
    /// a duplicate.
    pub other: Option<SlotRef>,
}

/// The physical slot behind coordinate `c` of key slots `ks`.
fn physical(ks: &crate::iceberg::KeySlots, c: SlotCoord) -> (SlotRef, u64) {
    match c.x {
        0 => (
            SlotRef { level: Level::Primary, bucket: ks.primary_bucket, slot: c.y },
            ks.primary_word,
        ),
        x => {
            let i = (x - 1) as usize;
            (
                SlotRef { level: Level::Secondary, bucket: ks.secondary_buckets[i], slot: c.y },
                ks.secondary_words[i],
            )
        }
    }
}

/// Checks that every slot is empty or a valid entry, and that every stored
/// key has all its `≺`-earlier slots occupied by other keys. Also reports
/// duplicates directly, independent of the order property.
pub fn check_well_formed<P: AtomicSlot, S: AtomicSlot>(table: &IcebergTable<P, S>) -> Result<(), Vec<Violation>> {
    let order = SlotOrder::new(table.primary_bucket_slots(), table.secondary_bucket_slots()).sorted();
    let mut violations = Vec::new();
    let mut seen: BTreeMap<Key, SlotRef> = BTreeMap::new();

    let levels = [
        (Level::Primary, table.primary_bucket_slots(), table.primary_words().collect::<Vec<_>>()),
        (Level::Secondary, table.secondary_bucket_slots(), table.secondary_words().collect::<Vec<_>>()),
    ];
    for (level, b, words) in &levels {
        for (idx, &word) in words.iter().enumerate() {
            if word == EMPTY {
                continue;
            }
            let at = SlotRef { level: *level, bucket: idx / b, slot: idx % b };
            let Some((key, x)) = table.decode_key(*level, at.bucket, word) else {
                violations.push(Violation { kind: ViolationKind::BadEncoding, at, word, key: None, other: None });
                continue;
            };
            if let Some(&first) = seen.get(&key) {
                violations.push(Violation {
                    kind: ViolationKind::DuplicateKey,
                    at,
                    word,
                    key: Some(key),
                    other: Some(first),
                });
            } else {
                seen.insert(key, at);
            }
            let ks = table.key_slots(key);
            let here = SlotCoord::new(x, at.slot);
            for &earlier in order.iter().take_while(|&&c| c != here) {
                let (slot, mine) = physical(&ks, earlier);
                let w = table.word(slot);
                if w == EMPTY || w == mine {
                    violations.push(Violation {
                        kind: ViolationKind::OrderProperty,
                        at,
                        word,
                        key: Some(key),
                        other: Some(slot),
                    });
                    break;
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Every key stored in an iceberg table, by slot.
pub fn iceberg_keys<P: AtomicSlot, S: AtomicSlot>(table: &IcebergTable<P, S>) -> Vec<(SlotRef, Key)> {
    let mut out = Vec::new();
    let b0 = table.primary_bucket_slots();
    let b1 = table.secondary_bucket_slots();
    for (idx, w) in table.primary_words().enumerate() {
        if let Some((k, _)) = table.decode_key(Level::Primary, idx / b0, w) {
            out.push((SlotRef { level: Level::Primary, bucket: idx / b0, slot: idx % b0 }, k));
        }
    }
    for (idx, w) in table.secondary_words().enumerate() {
        if let Some((k, _)) = table.decode_key(Level::Secondary, idx / b1, w) {
            out.push((SlotRef { level: Level::Secondary, bucket: idx / b1, slot: idx % b1 }, k));
        }
    }
    out
}

/// True iff all three buckets of `k` are full and none holds `k`.
pub fn buckets_full_without<P: AtomicSlot, S: AtomicSlot>(table: &IcebergTable<P, S>, k: Key) -> bool {
    let ks = table.key_slots(k);
    let order = SlotOrder::new(table.primary_bucket_slots(), table.secondary_bucket_slots());
    order.sorted().into_iter().all(|c| {
        let (slot, mine) = physical(&ks, c);
        let w = table.word(slot);
        w != EMPTY && w != mine
    })
}

/// A cuckoo entry that sits in bucket `a_j(k)` although some earlier bucket
/// `a_i(k)`, `i < j`, has a free slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CuckooOrderViolation {
    pub key: Key,
    pub bucket: usize,
    pub hash_index: u32,
    pub non_full_bucket: usize,
}

/// Decodes every slot back to its key.
pub fn cuckoo_keys<A: AtomicSlot>(table: &CuckooTable<A>) -> Vec<Key> {
    (0..table.buckets())
        .flat_map(|a| table.bucket_words(a).filter_map(move |w| table.decode(a, w)).map(|(k, _)| k))
        .collect()
}

/// Checks that buckets fill in hash order, which early-stopping lookups
/// rely on.
pub fn check_cuckoo_order<A: AtomicSlot>(table: &CuckooTable<A>) -> Result<(), Vec<CuckooOrderViolation>> {
    let mut bad = Vec::new();
    for a in 0..table.buckets() {
        for w in table.bucket_words(a) {
            let Some((key, j)) = table.decode(a, w) else { continue };
            for i in 0..j {
                let (earlier, _) = table.locate(key, i);
                if table.bucket_words(earlier).any(|w| w == EMPTY) {
                    bad.push(CuckooOrderViolation { key, bucket: a, hash_index: j, non_full_bucket: earlier });
                    break;
                }
            }
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iceberg::{IcebergConfig, OpResult};
    use alloc::vec;
    use core::sync::atomic::AtomicU32;

    type Table = IcebergTable<AtomicU32, AtomicU32>;

    fn cfg() -> IcebergConfig {
        IcebergConfig::new(20, 4, 4).with_secondary_addr_bits(2).with_seed(11)
    }

    #[test]
    fn empty_table_is_well_formed() {
        assert_eq!(check_well_formed(&Table::new(cfg()).unwrap()), Ok(()));
    }

    #[test]
    fn sequential_fops_stay_well_formed() {
        let t = Table::new(cfg()).unwrap();
        let mut state = 1u64;
        for _ in 0..10_000 {
            t.fop(crate::quotient::splitmix64(&mut state) % 300);
        }
        assert_eq!(check_well_formed(&t), Ok(()));
    }

    #[test]
    fn key_in_secondary_with_empty_primary_slot_is_reported() {
        let t = Table::new(cfg()).unwrap();
        let ks = t.key_slots(5);
        let mut sec = vec![0u64; cfg().secondary_slots()];
        sec[ks.secondary_buckets[0] * 2] = ks.secondary_words[0];
        let prim = vec![0u64; cfg().primary_slots()];
        let bad = Table::from_words(cfg(), &prim, &sec).unwrap();
        let v = check_well_formed(&bad).unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::OrderProperty);
        assert_eq!(v[0].key, Some(5));
        assert_eq!(v[0].other, Some(SlotRef { level: Level::Primary, bucket: ks.primary_bucket, slot: 0 }));
    }

    #[test]
    fn duplicate_and_garbage_are_reported() {
        let t = Table::new(cfg()).unwrap();
        let ks = t.key_slots(9);
        let mut prim = vec![0u64; cfg().primary_slots()];
        let base = ks.primary_bucket * 4;
        prim[base] = ks.primary_word;
        prim[base + 1] = ks.primary_word;
        let len = prim.len();
        prim[(base + 4) % len] = 0x1234; // occupancy bit clear
        let sec = vec![0u64; cfg().secondary_slots()];
        let bad = Table::from_words(cfg(), &prim, &sec).unwrap();
        let kinds: Vec<_> = check_well_formed(&bad).unwrap_err().iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::DuplicateKey));
        assert!(kinds.contains(&ViolationKind::OrderProperty));
        assert!(kinds.contains(&ViolationKind::BadEncoding));
    }

    #[test]
    fn full_buckets_detected() {
        let c = IcebergConfig::new(10, 0, 2).with_secondary_addr_bits(0);
        let t = Table::new(c).unwrap();
        let mut results = Vec::new();
        for k in 0..10 {
            results.push((k, t.fop(k)));
        }
        // 2 primary + 1 secondary slot.
        assert_eq!(results.iter().filter(|r| r.1 == OpResult::Put).count(), 3);
        for (k, r) in results {
            if r == OpResult::Full {
                assert!(buckets_full_without(&t, k));
            } else {
                assert!(!buckets_full_without(&t, k));
            }
        }
    }
}

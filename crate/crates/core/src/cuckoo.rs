//! Static compact bucketed cuckoo table.
//!
//! The table is built once from a batch of unique keys and queried afterwards.
//! [`CuckooBuilder`] accepts concurrent [`CuckooBuilder::put`] calls;
//! [`CuckooBuilder::finish`] consumes it and yields the read-only
//! [`CuckooTable`]. Lookups during a build could miss keys that are in the
//! middle of an eviction chain, so the two phases never overlap.
//!
//! There is deliberately no find-or-put here:
//!
//! ```compile_fail
//! use core::sync::atomic::AtomicU32;
//! use cpht_core::cuckoo::{CuckooBuilder, CuckooConfig};
//! let b = CuckooBuilder::<AtomicU32>::new(CuckooConfig::new(30, 10, 32)).unwrap();
//! b.fop(1);
//! ```

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::Error;
use crate::quotient::{Key, KeyWidth, Permutation};
use crate::slot::{alloc_slots, check_bucket_layout, AtomicSlot, SlotCodec, EMPTY};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CuckooConfig {
    pub key_bits: u32,
    pub addr_bits: u32,
    pub bucket_slots: usize,
    pub hashes: u32,
    /// Longest eviction chain before a put gives up. `None` picks
    /// `32 * addr_bits`.
    pub max_chain: Option<usize>,
    pub seed: u64,
}

impl CuckooConfig {
    pub fn new(key_bits: u32, addr_bits: u32, bucket_slots: usize) -> Self {
        CuckooConfig { key_bits, addr_bits, bucket_slots, hashes: 3, max_chain: None, seed: 0 }
    }

    pub fn with_hashes(mut self, hashes: u32) -> Self {
        self.hashes = hashes;
        self
    }

    pub fn with_max_chain(mut self, c: usize) -> Self {
        self.max_chain = Some(c);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn chain_bound(&self) -> usize {
        self.max_chain.unwrap_or(32 * self.addr_bits.max(1) as usize)
    }

    pub fn buckets(&self) -> usize {
        1 << self.addr_bits
    }

    pub fn capacity(&self) -> usize {
        self.buckets() * self.bucket_slots
    }

    pub fn permutations(&self) -> Result<Vec<Permutation>, Error> {
        Ok(Permutation::family(KeyWidth::new(self.key_bits)?, self.seed, self.hashes as usize))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PutResult {
    Put,
    /// The eviction chain hit its bound. `dropped` is the key left homeless:
    /// the input itself or a key it displaced.
    Full { dropped: Key },
}

/// One displacement in an eviction chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Eviction {
    /// The key pushed out.
    pub key: Key,
    pub bucket: usize,
    pub slot: usize,
    /// Hash index it was stored under.
    pub hash_index: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PutOutcome {
    pub result: PutResult,
    /// Loop iterations used, at most the chain bound.
    pub chain: usize,
}

struct Slots<A: AtomicSlot> {
    config: CuckooConfig,
    width: KeyWidth,
    perms: Vec<Permutation>,
    codec: SlotCodec,
    chain_bound: usize,
    b: usize,
    slots: Box<[A]>,
}

impl<A: AtomicSlot> Slots<A> {
    fn new(config: CuckooConfig) -> Result<Self, Error> {
        let width = KeyWidth::new(config.key_bits)?;
        if config.addr_bits > config.key_bits {
            return Err(Error::AddressBits { addr_bits: config.addr_bits, width });
        }
        if config.addr_bits > 40 {
            return Err(Error::Geometry("address bits above 40 are not supported"));
        }
        if config.hashes == 0 {
            return Err(Error::Geometry("at least one hash function is required"));
        }
        check_bucket_layout(config.bucket_slots, A::WIDTH)?;
        let codec = SlotCodec::cuckoo(A::WIDTH, config.key_bits - config.addr_bits, config.hashes)?;
        Ok(Slots {
            config,
            width,
            perms: config.permutations()?,
            codec,
            chain_bound: config.chain_bound(),
            b: config.bucket_slots,
            slots: alloc_slots(config.capacity()),
        })
    }

    #[inline]
    fn bucket(&self, a: usize) -> &[A] {
        &self.slots[a * self.b..(a + 1) * self.b]
    }

    #[inline]
    fn locate(&self, k: Key, j: u32) -> (usize, u64) {
        let s = self.perms[j as usize].split_unchecked(k, self.config.addr_bits);
        (s.address as usize, self.codec.encode_unchecked(s.remainder, j as u64))
    }

    fn check_key(&self, k: Key) {
        assert!(self.width.contains(k), "key {k:#x} outside {} domain", self.width);
    }

    fn put(&self, k: Key, on_evict: &mut dyn FnMut(Eviction)) -> PutOutcome {
        self.check_key(k);
        let h = self.config.hashes;
        let mut key = k;
        let mut j = 0u32;
        for c in 1..=self.chain_bound {
            let (a, word) = self.locate(key, j);
            let bucket = self.bucket(a);
            if let Some(i) = bucket.iter().position(|s| s.load_word() == EMPTY) {
                if bucket[i].cas_word(EMPTY, word).is_ok() {
                    return PutOutcome { result: PutResult::Put, chain: c };
                }
            } else {
                let i = (key.wrapping_add((c as u64).wrapping_mul(0x9E37_79B9)) % self.b as u64) as usize;
                let old = bucket[i].swap_word(word);
                let Some(p) = self.codec.decode_cuckoo(old) else {
                    // Occupied slots never empty out; nothing was displaced.
                    debug_assert_eq!(old, EMPTY);
                    return PutOutcome { result: PutResult::Put, chain: c };
                };
                key = self.perms[p.hash_index as usize].reconstruct_unchecked(
                    a as u64,
                    p.remainder,
                    self.config.addr_bits,
                );
                on_evict(Eviction { key, bucket: a, slot: i, hash_index: p.hash_index });
                j = (p.hash_index + 1) % h;
            }
        }
        PutOutcome { result: PutResult::Full { dropped: key }, chain: self.chain_bound }
    }

    fn find(&self, k: Key) -> bool {
        self.check_key(k);
        for j in 0..self.config.hashes {
            let (a, word) = self.locate(k, j);
            let mut full = true;
            for s in self.bucket(a) {
                match s.load_word() {
                    w if w == word => return true,
                    EMPTY => full = false,
                    _ => {}
                }
            }
            if !full {
                return false;
            }
        }
        false
    }

    fn occupied(&self) -> usize {
        self.slots.iter().filter(|s| s.load_word() != EMPTY).count()
    }

    fn fill_factor(&self) -> f64 {
        self.occupied() as f64 / self.slots.len() as f64
    }
}

/// Build phase: concurrent puts, no lookups.
pub struct CuckooBuilder<A: AtomicSlot> {
    inner: Slots<A>,
}

impl<A: AtomicSlot> CuckooBuilder<A> {
    pub fn new(config: CuckooConfig) -> Result<Self, Error> {
        Ok(CuckooBuilder { inner: Slots::new(config)? })
    }

    pub fn config(&self) -> &CuckooConfig {
        &self.inner.config
    }

    /// Inserts `k`, which must not already be in the table.
    pub fn put(&self, k: Key) -> PutResult {
        self.inner.put(k, &mut |_| {}).result
    }

    /// Like [`put`](Self::put), calling `on_evict` for every displaced key.
    pub fn put_traced(&self, k: Key, on_evict: &mut dyn FnMut(Eviction)) -> PutOutcome {
        self.inner.put(k, on_evict)
    }

    pub fn fill_factor(&self) -> f64 {
        self.inner.fill_factor()
    }

    pub fn finish(self) -> CuckooTable<A> {
        CuckooTable { inner: self.inner }
    }
}

/// Query phase: read-only.
pub struct CuckooTable<A: AtomicSlot> {
    inner: Slots<A>,
}

impl<A: AtomicSlot> CuckooTable<A> {
    /// Inspects `a_0(k), a_1(k), ...` in order and stops at the first bucket
    /// that holds `k` or has a free slot.
    pub fn find(&self, k: Key) -> bool {
        self.inner.find(k)
    }

    pub fn fill_factor(&self) -> f64 {
        self.inner.fill_factor()
    }

    pub fn occupied(&self) -> usize {
        self.inner.occupied()
    }

    pub fn config(&self) -> &CuckooConfig {
        &self.inner.config
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.inner.perms
    }

    pub fn codec(&self) -> &SlotCodec {
        &self.inner.codec
    }

    pub fn buckets(&self) -> usize {
        self.inner.config.buckets()
    }

    pub fn bucket_words(&self, a: usize) -> impl Iterator<Item = u64> + '_ {
        self.inner.bucket(a).iter().map(AtomicSlot::load_word)
    }

    /// Bucket and encoded slot word of `k` under hash index `j`.
    pub fn locate(&self, k: Key, j: u32) -> (usize, u64) {
        self.inner.check_key(k);
        self.inner.locate(k, j)
    }

    /// Key and hash index held by `word` in bucket `a`.
    pub fn decode(&self, a: usize, word: u64) -> Option<(Key, u32)> {
        let p = self.inner.codec.decode_cuckoo(word)?;
        let k = self.inner.perms[p.hash_index as usize].reconstruct_unchecked(
            a as u64,
            p.remainder,
            self.inner.config.addr_bits,
        );
        Some((k, p.hash_index))
    }

    /// The first `j` with `a_j(k) = bucket`, for layouts that do not store
    /// the hash index next to a full key.
    pub fn recover_hash_index(&self, k: Key, bucket: usize) -> Option<u32> {
        (0..self.inner.config.hashes).find(|&j| self.locate(k, j).0 == bucket)
    }

    /// Back to the build phase.
    pub fn into_builder(self) -> CuckooBuilder<A> {
        CuckooBuilder { inner: self.inner }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use core::sync::atomic::AtomicU32;

    type Builder = CuckooBuilder<AtomicU32>;

    #[test]
    fn empty_table() {
        let t = Builder::new(CuckooConfig::new(30, 8, 8)).unwrap().finish();
        assert_eq!(t.fill_factor(), 0.0);
        for k in 0..1000 {
            assert!(!t.find(k));
        }
    }

    #[test]
    fn first_put_lands_in_first_slot_of_first_bucket() {
        let b = Builder::new(CuckooConfig::new(30, 8, 8).with_seed(9)).unwrap();
        assert_eq!(b.put(4242), PutResult::Put);
        let t = b.finish();
        let (a, w) = t.locate(4242, 0);
        assert_eq!(t.bucket_words(a).next(), Some(w));
        assert!(t.find(4242));
    }

    #[test]
    fn forced_eviction_recovers_the_displaced_key() {
        let b = Builder::new(CuckooConfig::new(30, 6, 8).with_seed(5)).unwrap();
        let perms = b.config().permutations().unwrap();
        let target = perms[0].split_unchecked(1, 6).address;
        let same: alloc::vec::Vec<Key> = (1..)
            .filter(|&k| perms[0].split_unchecked(k, 6).address == target)
            .take(9)
            .collect();
        for &k in &same[..8] {
            assert_eq!(b.put(k), PutResult::Put);
        }
        let mut evicted = alloc::vec::Vec::new();
        let out = b.put_traced(same[8], &mut |e| evicted.push(e));
        assert_eq!(out.result, PutResult::Put);
        assert_eq!(evicted.len(), 1);
        assert!(same[..8].contains(&evicted[0].key));
        assert_eq!(evicted[0].bucket as u64, target);
        assert_eq!(evicted[0].hash_index, 0);
        let t = b.finish();
        for &k in &same {
            assert!(t.find(k));
        }
    }

    #[test]
    fn full_reports_dropped_key_and_keeps_others() {
        // One bucket, one hash: the ninth key must fail.
        let cfg = CuckooConfig::new(12, 0, 8).with_hashes(1).with_max_chain(4);
        let b = Builder::new(cfg).unwrap();
        for k in 0..8 {
            assert_eq!(b.put(k), PutResult::Put);
        }
        let out = b.put_traced(8, &mut |_| {});
        assert_eq!(out.chain, 4);
        let PutResult::Full { dropped } = out.result else { panic!("expected FULL") };
        let t = b.finish();
        let stored: BTreeSet<Key> =
            t.bucket_words(0).filter_map(|w| t.decode(0, w)).map(|(k, _)| k).collect();
        let mut expect: BTreeSet<Key> = (0..=8).collect();
        expect.remove(&dropped);
        assert_eq!(stored, expect);
    }

    #[test]
    fn recover_hash_index_finds_first_match() {
        let t = Builder::new(CuckooConfig::new(30, 8, 8).with_seed(1)).unwrap().finish();
        for k in [3, 99, 12345] {
            for j in 0..3 {
                let (a, _) = t.locate(k, j);
                let r = t.recover_hash_index(k, a).unwrap();
                assert!(r <= j);
                assert_eq!(t.locate(k, r).0, a);
            }
        }
    }

    #[test]
    fn geometry_checks() {
        assert!(Builder::new(CuckooConfig::new(30, 8, 12)).is_err());
        assert!(Builder::new(CuckooConfig::new(30, 8, 6)).is_err());
        assert!(Builder::new(CuckooConfig::new(30, 31, 8)).is_err());
        assert!(CuckooBuilder::<core::sync::atomic::AtomicU16>::new(CuckooConfig::new(30, 15, 32)).is_err());
        assert!(Builder::new(CuckooConfig::new(30, 8, 8).with_hashes(0)).is_err());
        assert_eq!(CuckooConfig::new(30, 15, 32).chain_bound(), 480);
    }
}

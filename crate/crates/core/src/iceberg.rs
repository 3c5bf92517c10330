//! Compact two-level iceberg table with lockless find-or-put.
//!
//! Each key has one primary bucket `T0[a0(k)]` of `B0` slots and two secondary
//! buckets `T1[a1(k)]`, `T1[a2(k)]` of `B1 = B0 / 2` slots. The levels are
//! quotiented separately: `T0` stores `r0(k)`, `T1` stores `(r1(k), 0)` in the
//! first secondary bucket or `(r2(k), 1)` in the second.
//!
//! Slots only ever go from `EMPTY` to occupied, and an insert always targets
//! the first empty slot of the chosen bucket after having seen every earlier
//! slot occupied. That is what makes concurrent find-or-put on equal keys
//! safe without locks.

use alloc::boxed::Box;

use crate::error::Error;
use crate::quotient::{Key, KeyWidth, Permutation};
use crate::slot::{alloc_slots, check_bucket_layout, AtomicSlot, SlotCodec, EMPTY};
use crate::verify::order::SlotCoord;

/// Largest supported primary bucket.
pub const MAX_BUCKET_SLOTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpResult {
    Found,
    Put,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Primary,
    Secondary,
}

/// Physical slot position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlotRef {
    pub level: Level,
    pub bucket: usize,
    pub slot: usize,
}

/// Hooks into the insertion path of [`IcebergTable::fop_traced`].
pub trait SlotObserver {
    /// Called after every successful insertion CAS.
    fn inserted(&self, at: SlotRef, word: u64);

    /// Called between taking a snapshot and the CAS it leads to.
    #[inline]
    fn before_cas(&self, _at: SlotRef) {}
}

impl SlotObserver for () {
    #[inline]
    fn inserted(&self, _: SlotRef, _: u64) {}
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IcebergConfig {
    pub key_bits: u32,
    pub primary_addr_bits: u32,
    pub secondary_addr_bits: u32,
    pub primary_bucket_slots: usize,
    pub seed: u64,
    /// Keep slots already seen occupied in the local snapshot instead of
    /// reading them again on retry.
    pub skip_filled_rereads: bool,
}

impl IcebergConfig {
    /// Secondary level defaults to one eighth of the primary slot count.
    pub fn new(key_bits: u32, primary_addr_bits: u32, primary_bucket_slots: usize) -> Self {
        // 2^n1 * B0/2 = 2^n0 * B0 / 8  =>  n1 = n0 - 2
        IcebergConfig {
            key_bits,
            primary_addr_bits,
            secondary_addr_bits: primary_addr_bits.saturating_sub(2),
            primary_bucket_slots,
            seed: 0,
            skip_filled_rereads: false,
        }
    }

    pub fn with_secondary_addr_bits(mut self, bits: u32) -> Self {
        self.secondary_addr_bits = bits;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_skip_filled_rereads(mut self, on: bool) -> Self {
        self.skip_filled_rereads = on;
        self
    }

    pub fn secondary_bucket_slots(&self) -> usize {
        self.primary_bucket_slots / 2
    }

    pub fn primary_buckets(&self) -> usize {
        1 << self.primary_addr_bits
    }

    pub fn secondary_buckets(&self) -> usize {
        1 << self.secondary_addr_bits
    }

    pub fn primary_slots(&self) -> usize {
        self.primary_buckets() * self.primary_bucket_slots
    }

    pub fn secondary_slots(&self) -> usize {
        self.secondary_buckets() * self.secondary_bucket_slots()
    }

    pub fn capacity(&self) -> usize {
        self.primary_slots() + self.secondary_slots()
    }

    /// The three permutations `π0, π1, π2`.
    pub fn permutations(&self) -> Result<[Permutation; 3], Error> {
        let w = KeyWidth::new(self.key_bits)?;
        let fam = Permutation::family(w, self.seed, 3);
        Ok([fam[0], fam[1], fam[2]])
    }

    fn validate(&self) -> Result<(), Error> {
        KeyWidth::new(self.key_bits)?;
        let b0 = self.primary_bucket_slots;
        if !(2..=MAX_BUCKET_SLOTS).contains(&b0) || !b0.is_power_of_two() {
            return Err(Error::Geometry("primary bucket size must be a power of two in 2..=64"));
        }
        for bits in [self.primary_addr_bits, self.secondary_addr_bits] {
            if bits > self.key_bits {
                return Err(Error::AddressBits { addr_bits: bits, width: KeyWidth::new(self.key_bits)? });
            }
            if bits > 40 {
                return Err(Error::Geometry("address bits above 40 are not supported"));
            }
        }
        Ok(())
    }
}

/// Result of one traced find-or-put.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FopOutcome {
    pub result: OpResult,
    /// Where the key was found or put.
    pub coord: Option<SlotCoord>,
    /// Failed insertion attempts plus one.
    pub rounds: usize,
}

/// Occupancy per level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelFill {
    pub primary_occupied: usize,
    pub secondary_occupied: usize,
    pub primary: f64,
    pub secondary: f64,
    pub combined: f64,
}

/// Bucket addresses and slot words for one key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeySlots {
    pub primary_bucket: usize,
    pub primary_word: u64,
    pub secondary_buckets: [usize; 2],
    pub secondary_words: [u64; 2],
}

pub struct IcebergTable<P: AtomicSlot, S: AtomicSlot> {
    config: IcebergConfig,
    width: KeyWidth,
    perms: [Permutation; 3],
    primary_codec: SlotCodec,
    secondary_codec: SlotCodec,
    b0: usize,
    b1: usize,
    primary: Box<[P]>,
    secondary: Box<[S]>,
}

impl<P: AtomicSlot, S: AtomicSlot> IcebergTable<P, S> {
    pub fn new(config: IcebergConfig) -> Result<Self, Error> {
        config.validate()?;
        let b0 = config.primary_bucket_slots;
        let b1 = config.secondary_bucket_slots();
        check_bucket_layout(b0, P::WIDTH)?;
        check_bucket_layout(b1, S::WIDTH)?;
        let primary_codec = SlotCodec::primary(P::WIDTH, config.key_bits - config.primary_addr_bits)?;
        let secondary_codec =
            SlotCodec::secondary(S::WIDTH, config.key_bits - config.secondary_addr_bits)?;
        Ok(IcebergTable {
            config,
            width: KeyWidth::new(config.key_bits)?,
            perms: config.permutations()?,
            primary_codec,
            secondary_codec,
            b0,
            b1,
            primary: alloc_slots(config.primary_slots()),
            secondary: alloc_slots(config.secondary_slots()),
        })
    }

    /// Rebuilds a table from raw slot words, e.g. a dump. No validation of
    /// the contents is done; see `verify::check_well_formed`.
    pub fn from_words(config: IcebergConfig, primary: &[u64], secondary: &[u64]) -> Result<Self, Error> {
        let table = Self::new(config)?;
        if primary.len() != table.primary.len() || secondary.len() != table.secondary.len() {
            return Err(Error::Geometry("raw word count does not match geometry"));
        }
        for (slot, &w) in table.primary.iter().zip(primary) {
            slot.store_word(w);
        }
        for (slot, &w) in table.secondary.iter().zip(secondary) {
            slot.store_word(w);
        }
        Ok(table)
    }

    pub fn config(&self) -> &IcebergConfig {
        &self.config
    }

    pub fn key_width(&self) -> KeyWidth {
        self.width
    }

    pub fn permutations(&self) -> &[Permutation; 3] {
        &self.perms
    }

    pub fn primary_codec(&self) -> &SlotCodec {
        &self.primary_codec
    }

    pub fn secondary_codec(&self) -> &SlotCodec {
        &self.secondary_codec
    }

    pub fn primary_bucket_slots(&self) -> usize {
        self.b0
    }

    pub fn secondary_bucket_slots(&self) -> usize {
        self.b1
    }

    pub fn capacity(&self) -> usize {
        self.primary.len() + self.secondary.len()
    }

    pub fn word(&self, at: SlotRef) -> u64 {
        match at.level {
            Level::Primary => self.primary[at.bucket * self.b0 + at.slot].load_word(),
            Level::Secondary => self.secondary[at.bucket * self.b1 + at.slot].load_word(),
        }
    }

    pub fn primary_words(&self) -> impl Iterator<Item = u64> + '_ {
        self.primary.iter().map(AtomicSlot::load_word)
    }

    pub fn secondary_words(&self) -> impl Iterator<Item = u64> + '_ {
        self.secondary.iter().map(AtomicSlot::load_word)
    }

    /// Buckets and encoded entries for `k`.
    pub fn key_slots(&self, k: Key) -> KeySlots {
        assert!(self.width.contains(k), "key {k:#x} outside {} domain", self.width);
        let n0 = self.config.primary_addr_bits;
        let n1 = self.config.secondary_addr_bits;
        let p0 = self.perms[0].split_unchecked(k, n0);
        let p1 = self.perms[1].split_unchecked(k, n1);
        let p2 = self.perms[2].split_unchecked(k, n1);
        KeySlots {
            primary_bucket: p0.address as usize,
            primary_word: self.primary_codec.encode_unchecked(p0.remainder, 0),
            secondary_buckets: [p1.address as usize, p2.address as usize],
            secondary_words: [
                self.secondary_codec.encode_unchecked(p1.remainder, 0),
                self.secondary_codec.encode_unchecked(p2.remainder, 1),
            ],
        }
    }

    /// Key stored in `word` at `bucket` of `level`, if the word is valid.
    pub fn decode_key(&self, level: Level, bucket: usize, word: u64) -> Option<(Key, u8)> {
        match level {
            Level::Primary => {
                let r = self.primary_codec.decode_primary(word)?;
                let k = self.perms[0].reconstruct_unchecked(bucket as u64, r, self.config.primary_addr_bits);
                Some((k, 0))
            }
            Level::Secondary => {
                let p = self.secondary_codec.decode_secondary(word)?;
                let k = self.perms[1 + p.bucket_bit as usize].reconstruct_unchecked(
                    bucket as u64,
                    p.remainder,
                    self.config.secondary_addr_bits,
                );
                Some((k, 1 + p.bucket_bit as u8))
            }
        }
    }

    #[inline]
    fn primary_bucket(&self, a: usize) -> &[P] {
        &self.primary[a * self.b0..(a + 1) * self.b0]
    }

    #[inline]
    fn secondary_bucket(&self, a: usize) -> &[S] {
        &self.secondary[a * self.b1..(a + 1) * self.b1]
    }

    pub fn fop(&self, k: Key) -> OpResult {
        self.fop_traced(k, &()).result
    }

    /// Find-or-put, reporting the slot used and the retry count, and telling
    /// `observer` about the insertion if one happens.
    pub fn fop_traced<O: SlotObserver + ?Sized>(&self, k: Key, observer: &O) -> FopOutcome {
        let ks = self.key_slots(k);
        let skip = self.config.skip_filled_rereads;
        let mut rounds = 1;

        // Level 1.
        let bucket = self.primary_bucket(ks.primary_bucket);
        let mut buf = [EMPTY; MAX_BUCKET_SLOTS];
        let snap = &mut buf[..self.b0];
        loop {
            snapshot(bucket, snap, skip);
            if let Some(y) = snap.iter().position(|&w| w == ks.primary_word) {
                return FopOutcome { result: OpResult::Found, coord: Some(SlotCoord::new(0, y)), rounds };
            }
            let Some(y) = snap.iter().position(|&w| w == EMPTY) else {
                break;
            };
            observer.before_cas(SlotRef { level: Level::Primary, bucket: ks.primary_bucket, slot: y });
            match bucket[y].cas_word(EMPTY, ks.primary_word) {
                Ok(_) => {
                    observer.inserted(
                        SlotRef { level: Level::Primary, bucket: ks.primary_bucket, slot: y },
                        ks.primary_word,
                    );
                    return FopOutcome { result: OpResult::Put, coord: Some(SlotCoord::new(0, y)), rounds };
                }
                Err(seen) => {
                    snap[y] = seen;
                    rounds += 1;
                }
            }
        }

        // Level 2.
        let buckets = [
            self.secondary_bucket(ks.secondary_buckets[0]),
            self.secondary_bucket(ks.secondary_buckets[1]),
        ];
        let mut buf1 = [EMPTY; MAX_BUCKET_SLOTS / 2];
        let mut buf2 = [EMPTY; MAX_BUCKET_SLOTS / 2];
        let snap1 = &mut buf1[..self.b1];
        let snap2 = &mut buf2[..self.b1];
        loop {
            snapshot(buckets[0], snap1, skip);
            if let Some(y) = snap1.iter().position(|&w| w == ks.secondary_words[0]) {
                return FopOutcome { result: OpResult::Found, coord: Some(SlotCoord::new(1, y)), rounds };
            }
            snapshot(buckets[1], snap2, skip);
            if let Some(y) = snap2.iter().position(|&w| w == ks.secondary_words[1]) {
                return FopOutcome { result: OpResult::Found, coord: Some(SlotCoord::new(2, y)), rounds };
            }
            let load1 = snap1.iter().filter(|&&w| w != EMPTY).count();
            let load2 = snap2.iter().filter(|&&w| w != EMPTY).count();
            // Ties go to the second bucket.
            let i = if load1 < load2 { 0 } else { 1 };
            let snap: &mut [u64] = if i == 0 { &mut *snap1 } else { &mut *snap2 };
            let Some(y) = snap.iter().position(|&w| w == EMPTY) else {
                return FopOutcome { result: OpResult::Full, coord: None, rounds };
            };
            let word = ks.secondary_words[i];
            observer.before_cas(SlotRef { level: Level::Secondary, bucket: ks.secondary_buckets[i], slot: y });
            match buckets[i][y].cas_word(EMPTY, word) {
                Ok(_) => {
                    observer.inserted(
                        SlotRef { level: Level::Secondary, bucket: ks.secondary_buckets[i], slot: y },
                        word,
                    );
                    return FopOutcome {
                        result: OpResult::Put,
                        coord: Some(SlotCoord::new(1 + i as u8, y)),
                        rounds,
                    };
                }
                Err(seen) => {
                    snap[y] = seen;
                    rounds += 1;
                }
            }
        }
    }

    /// Membership. The secondary buckets are only read when the primary
    /// bucket is full and does not hold `k`.
    pub fn find(&self, k: Key) -> bool {
        let ks = self.key_slots(k);
        let mut primary_full = true;
        for slot in self.primary_bucket(ks.primary_bucket) {
            match slot.load_word() {
                w if w == ks.primary_word => return true,
                EMPTY => primary_full = false,
                _ => {}
            }
        }
        if !primary_full {
            return false;
        }
        (0..2).any(|i| {
            self.secondary_bucket(ks.secondary_buckets[i])
                .iter()
                .any(|s| s.load_word() == ks.secondary_words[i])
        })
    }

    pub fn level_fill(&self) -> LevelFill {
        let p = self.primary.iter().filter(|s| s.load_word() != EMPTY).count();
        let s = self.secondary.iter().filter(|s| s.load_word() != EMPTY).count();
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        LevelFill {
            primary_occupied: p,
            secondary_occupied: s,
            primary: ratio(p, self.primary.len()),
            secondary: ratio(s, self.secondary.len()),
            combined: ratio(p + s, self.capacity()),
        }
    }
}

#[inline]
fn snapshot<A: AtomicSlot>(bucket: &[A], snap: &mut [u64], skip_filled: bool) {
    for (s, slot) in snap.iter_mut().zip(bucket) {
        if !skip_filled || *s == EMPTY {
            *s = slot.load_word();
        }
    }
}

//! Slot words and their bit layout.
//!
//! A slot is one atomic word. The all-zero word is `EMPTY`; every occupied
//! slot has its top bit set, so a zero remainder is still distinguishable
//! from an unoccupied slot and zeroed memory is an empty table.
//!
//! ```text
//!   bit  w-1            rem_bits+tag_bits   rem_bits            0
//!        [occupied=1] [ unused ... ] [ tag ] [    remainder     ]
//! ```
//!
//! The tag is absent for primary iceberg slots, is the hash index `j < H` for
//! cuckoo slots, and is the secondary bucket bit for iceberg level-2 slots.

use core::sync::atomic::{AtomicU16, AtomicU32, AtomicU64, Ordering};

use crate::error::Error;
use crate::quotient::mask;

pub const EMPTY: u64 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlotWidth {
    W16,
    W32,
    W64,
}

impl SlotWidth {
    pub fn from_bits(bits: u32) -> Result<Self, Error> {
        match bits {
            16 => Ok(SlotWidth::W16),
            32 => Ok(SlotWidth::W32),
            64 => Ok(SlotWidth::W64),
            _ => Err(Error::Geometry("slot width must be 16, 32 or 64 bits")),
        }
    }

    #[inline]
    pub const fn bits(self) -> u32 {
        match self {
            SlotWidth::W16 => 16,
            SlotWidth::W32 => 32,
            SlotWidth::W64 => 64,
        }
    }

    #[inline]
    pub const fn bytes(self) -> usize {
        self.bits() as usize / 8
    }
}

/// Whether a `width`-bit slot can hold a remainder of `key_bits - addr_bits`
/// bits, `tag_bits` of tag, and the occupancy bit.
pub fn admissible(width: SlotWidth, key_bits: u32, addr_bits: u32, tag_bits: u32) -> bool {
    addr_bits <= key_bits && (key_bits - addr_bits) + tag_bits < width.bits()
}

/// Buckets must tile 128-byte cache lines: either several buckets share a
/// line or one bucket spans whole lines.
pub fn check_bucket_layout(slots: usize, width: SlotWidth) -> Result<(), Error> {
    let bytes = slots * width.bytes();
    if slots.is_power_of_two() && (128 % bytes == 0 || bytes.is_multiple_of(128)) {
        Ok(())
    } else {
        Err(Error::BucketLayout { slots, width: width.bits() })
    }
}

pub(crate) fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Remainder and hash index stored in a cuckoo slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CuckooPayload {
    pub remainder: u64,
    pub hash_index: u32,
}

/// Remainder and bucket bit stored in a secondary iceberg slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SecondaryPayload {
    pub remainder: u64,
    pub bucket_bit: u32,
}

/// Encoder/decoder for one slot layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotCodec {
    width: SlotWidth,
    rem_bits: u32,
    tag_bits: u32,
    tags: u64,
}

impl SlotCodec {
    /// A layout with `tags` distinct tag values.
    pub fn new(width: SlotWidth, rem_bits: u32, tags: u64) -> Result<Self, Error> {
        let tag_bits = ceil_log2(tags);
        if tags == 0 || rem_bits + tag_bits >= width.bits() {
            return Err(Error::SlotWidth { width: width.bits(), rem_bits, tag_bits });
        }
        Ok(SlotCodec { width, rem_bits, tag_bits, tags })
    }

    pub fn primary(width: SlotWidth, rem_bits: u32) -> Result<Self, Error> {
        Self::new(width, rem_bits, 1)
    }

    pub fn secondary(width: SlotWidth, rem_bits: u32) -> Result<Self, Error> {
        Self::new(width, rem_bits, 2)
    }

    pub fn cuckoo(width: SlotWidth, rem_bits: u32, hashes: u32) -> Result<Self, Error> {
        Self::new(width, rem_bits, hashes as u64)
    }

    #[inline]
    pub fn width(&self) -> SlotWidth {
        self.width
    }

    #[inline]
    pub fn remainder_bits(&self) -> u32 {
        self.rem_bits
    }

    #[inline]
    pub fn tag_bits(&self) -> u32 {
        self.tag_bits
    }

    #[inline]
    fn occupied_bit(&self) -> u64 {
        1u64 << (self.width.bits() - 1)
    }

    pub fn encode(&self, remainder: u64, tag: u64) -> Result<u64, Error> {
        if remainder > mask(self.rem_bits) {
            return Err(Error::RemainderRange { remainder, rem_bits: self.rem_bits });
        }
        if tag >= self.tags {
            return Err(Error::TagRange { tag, tag_bits: self.tag_bits });
        }
        Ok(self.encode_unchecked(remainder, tag))
    }

    #[inline]
    pub fn encode_unchecked(&self, remainder: u64, tag: u64) -> u64 {
        self.occupied_bit() | (tag << self.rem_bits) | remainder
    }

    /// `None` for `EMPTY` and for words outside this layout.
    #[inline]
    pub fn decode(&self, word: u64) -> Option<(u64, u64)> {
        if self.is_valid(word) {
            Some((word & mask(self.rem_bits), (word >> self.rem_bits) & mask(self.tag_bits)))
        } else {
            None
        }
    }

    /// True iff `word` is a well-formed occupied slot of this layout.
    #[inline]
    pub fn is_valid(&self, word: u64) -> bool {
        let occ = self.occupied_bit();
        let payload = word & !occ;
        word & occ != 0
            && payload >> (self.rem_bits + self.tag_bits) == 0
            && (payload >> self.rem_bits) < self.tags
    }

    pub fn encode_primary(&self, remainder: u64) -> Result<u64, Error> {
        self.encode(remainder, 0)
    }

    pub fn decode_primary(&self, word: u64) -> Option<u64> {
        self.decode(word).map(|(r, _)| r)
    }

    pub fn encode_cuckoo(&self, remainder: u64, hash_index: u32) -> Result<u64, Error> {
        self.encode(remainder, hash_index as u64)
    }

    pub fn decode_cuckoo(&self, word: u64) -> Option<CuckooPayload> {
        self.decode(word)
            .map(|(remainder, j)| CuckooPayload { remainder, hash_index: j as u32 })
    }

    pub fn encode_secondary(&self, remainder: u64, bucket_bit: u32) -> Result<u64, Error> {
        self.encode(remainder, bucket_bit as u64)
    }

    pub fn decode_secondary(&self, word: u64) -> Option<SecondaryPayload> {
        self.decode(word)
            .map(|(remainder, b)| SecondaryPayload { remainder, bucket_bit: b as u32 })
    }
}

/// An atomic slot word of one of the supported widths.
///
/// Values cross this interface as `u64`; only the low `WIDTH` bits are used.
/// All accesses are sequentially consistent.
pub trait AtomicSlot: Default + Send + Sync + 'static {
    const WIDTH: SlotWidth;

    fn load_word(&self) -> u64;

    /// Compare-and-swap; `Err` carries the value actually found.
    fn cas_word(&self, current: u64, new: u64) -> Result<u64, u64>;

    fn swap_word(&self, new: u64) -> u64;

    fn store_word(&self, word: u64);
}

macro_rules! atomic_slot {
    ($atomic:ty, $int:ty, $width:expr) => {
        impl AtomicSlot for $atomic {
            const WIDTH: SlotWidth = $width;

            #[inline]
            fn load_word(&self) -> u64 {
                self.load(Ordering::SeqCst) as u64
            }

            #[inline]
            fn cas_word(&self, current: u64, new: u64) -> Result<u64, u64> {
                self.compare_exchange(current as $int, new as $int, Ordering::SeqCst, Ordering::SeqCst)
                    .map(|v| v as u64)
                    .map_err(|v| v as u64)
            }

            #[inline]
            fn swap_word(&self, new: u64) -> u64 {
                self.swap(new as $int, Ordering::SeqCst) as u64
            }

            #[inline]
            fn store_word(&self, word: u64) {
                self.store(word as $int, Ordering::SeqCst)
            }
        }
    };
}

atomic_slot!(AtomicU16, u16, SlotWidth::W16);
atomic_slot!(AtomicU32, u32, SlotWidth::W32);
atomic_slot!(AtomicU64, u64, SlotWidth::W64);

pub(crate) fn alloc_slots<A: AtomicSlot>(n: usize) -> alloc::boxed::Box<[A]> {
    (0..n).map(|_| A::default()).collect()
}

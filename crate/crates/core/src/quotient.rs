//! Invertible key permutations and the address/remainder split.
//!
//! A key `k` of width `M` is permuted to `π(k)`; the high `N` bits of `π(k)`
//! select the bucket (the *address*), the low `M - N` bits are what actually
//! gets stored in a slot (the *remainder*). Because `π` is a bijection the
//! key is recovered as `π⁻¹(address ‖ remainder)`.
//!
//! The permutation is a single unbalanced Feistel round:
//!
//! ```text
//!   k = L ‖ R            |L| = ceil(M/2), |R| = floor(M/2)
//!   π(k) = (L ^ F(R)) ‖ R
//!   F(R) = ((R * mul + add) mod 2^64) >> (64 - |L|)
//! ```
//!
//! The high half of the output mixes both input halves, so the address bits
//! depend on the whole key whenever `N <= |L|`.

use core::fmt;

use crate::error::Error;

pub type Key = u64;

/// Number of bits in the key domain, `1..=64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeyWidth(u32);

impl KeyWidth {
    pub fn new(bits: u32) -> Result<Self, Error> {
        if (1..=64).contains(&bits) {
            Ok(KeyWidth(bits))
        } else {
            Err(Error::KeyWidth { bits })
        }
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    /// Largest key in the domain.
    #[inline]
    pub fn max_key(self) -> Key {
        mask(self.0)
    }

    #[inline]
    pub fn contains(self, k: Key) -> bool {
        k <= self.max_key()
    }
}

impl fmt::Display for KeyWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

/// Low `bits` bits set. `bits` may be 0 or 64.
#[inline]
pub(crate) const fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// SplitMix64 step: advances `state` and returns the next output.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One-round Feistel permutation on `width`-bit keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Permutation {
    width: KeyWidth,
    mul: u64,
    add: u64,
    shift: u32,
    left_bits: u32,
    right_bits: u32,
}

impl Permutation {
    /// Round function constants drawn from `seed`; the multiplier is forced odd.
    pub fn from_seed(width: KeyWidth, seed: u64) -> Self {
        let mut state = seed;
        let mul = splitmix64(&mut state) | 1;
        let add = splitmix64(&mut state);
        Self::with_constants(width, mul, add)
    }

    /// `count` independent permutations, the `i`-th differing only by its
    /// position in the seed stream.
    pub fn family(width: KeyWidth, seed: u64, count: usize) -> alloc::vec::Vec<Self> {
        let mut state = seed;
        (0..count)
            .map(|_| Self::from_seed(width, splitmix64(&mut state)))
            .collect()
    }

    pub fn with_constants(width: KeyWidth, mul: u64, add: u64) -> Self {
        let left_bits = width.bits().div_ceil(2);
        let right_bits = width.bits() - left_bits;
        Permutation {
            width,
            mul,
            add,
            shift: 64 - left_bits,
            left_bits,
            right_bits,
        }
    }

    /// The permutation whose round function is constantly zero.
    pub fn identity(width: KeyWidth) -> Self {
        Self::with_constants(width, 0, 0)
    }

    #[inline]
    pub fn width(&self) -> KeyWidth {
        self.width
    }

    #[inline]
    fn round(&self, right: u64) -> u64 {
        (right.wrapping_mul(self.mul).wrapping_add(self.add) >> self.shift) & mask(self.left_bits)
    }

    /// `π(k)` without the domain check.
    #[inline]
    pub fn permute_unchecked(&self, k: Key) -> Key {
        let right = k & mask(self.right_bits);
        let left = (k >> self.right_bits) & mask(self.left_bits);
        ((left ^ self.round(right)) << self.right_bits) | right
    }

    /// `π⁻¹(y)` without the domain check. The round function is applied to
    /// the retained half, exactly as in the forward direction.
    #[inline]
    pub fn inverse_unchecked(&self, y: Key) -> Key {
        // A one-round Feistel network is an involution.
        self.permute_unchecked(y)
    }

    pub fn permute(&self, k: Key) -> Result<Key, Error> {
        self.check_key(k)?;
        Ok(self.permute_unchecked(k))
    }

    pub fn inverse(&self, y: Key) -> Result<Key, Error> {
        self.check_key(y)?;
        Ok(self.inverse_unchecked(y))
    }

    /// Splits `π(k)` into its high `addr_bits` and the remaining low bits.
    pub fn split(&self, k: Key, addr_bits: u32) -> Result<AddressedKey, Error> {
        self.check_addr_bits(addr_bits)?;
        self.check_key(k)?;
        Ok(self.split_unchecked(k, addr_bits))
    }

    #[inline]
    pub fn split_unchecked(&self, k: Key, addr_bits: u32) -> AddressedKey {
        let rem_bits = self.width.bits() - addr_bits;
        let y = self.permute_unchecked(k);
        AddressedKey {
            address: if rem_bits >= 64 { 0 } else { y >> rem_bits },
            remainder: y & mask(rem_bits),
        }
    }

    /// `π⁻¹(address ‖ remainder)`.
    pub fn reconstruct(&self, address: u64, remainder: u64, addr_bits: u32) -> Result<Key, Error> {
        self.check_addr_bits(addr_bits)?;
        let rem_bits = self.width.bits() - addr_bits;
        if address > mask(addr_bits) {
            return Err(Error::AddressRange { address, addr_bits });
        }
        if remainder > mask(rem_bits) {
            return Err(Error::RemainderRange { remainder, rem_bits });
        }
        Ok(self.reconstruct_unchecked(address, remainder, addr_bits))
    }

    #[inline]
    pub fn reconstruct_unchecked(&self, address: u64, remainder: u64, addr_bits: u32) -> Key {
        let rem_bits = self.width.bits() - addr_bits;
        let y = if rem_bits >= 64 { remainder } else { (address << rem_bits) | remainder };
        self.inverse_unchecked(y)
    }

    fn check_key(&self, k: Key) -> Result<(), Error> {
        if self.width.contains(k) {
            Ok(())
        } else {
            Err(Error::KeyDomain { key: k, width: self.width })
        }
    }

    fn check_addr_bits(&self, addr_bits: u32) -> Result<(), Error> {
        if addr_bits <= self.width.bits() {
            Ok(())
        } else {
            Err(Error::AddressBits { addr_bits, width: self.width })
        }
    }
}

/// Bucket address and stored remainder of a permuted key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AddressedKey {
    pub address: u64,
    pub remainder: u64,
}

use core::fmt;

use crate::quotient::{Key, KeyWidth};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    KeyWidth { bits: u32 },
    KeyDomain { key: Key, width: KeyWidth },
    AddressBits { addr_bits: u32, width: KeyWidth },
    AddressRange { address: u64, addr_bits: u32 },
    RemainderRange { remainder: u64, rem_bits: u32 },
    /// A slot of `width` bits cannot hold `rem_bits + tag_bits + 1` bits.
    SlotWidth { width: u32, rem_bits: u32, tag_bits: u32 },
    TagRange { tag: u64, tag_bits: u32 },
    /// Bucket size is not a power of two or does not tile cache lines.
    BucketLayout { slots: usize, width: u32 },
    Geometry(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::KeyWidth { bits } => write!(f, "key width {bits} outside 1..=64"),
            Error::KeyDomain { key, width } => write!(f, "key {key:#x} outside {width} domain"),
            Error::AddressBits { addr_bits, width } => {
                write!(f, "{addr_bits} address bits exceed key width of {width}")
            }
            Error::AddressRange { address, addr_bits } => {
                write!(f, "address {address:#x} does not fit {addr_bits} bits")
            }
            Error::RemainderRange { remainder, rem_bits } => {
                write!(f, "remainder {remainder:#x} does not fit {rem_bits} bits")
            }
            Error::SlotWidth { width, rem_bits, tag_bits } => write!(
                f,
                "{width}-bit slot too narrow: {rem_bits} remainder + {tag_bits} tag + 1 occupancy bits = {} bits",
                rem_bits + tag_bits + 1
            ),
            Error::TagRange { tag, tag_bits } => write!(f, "tag {tag} does not fit {tag_bits} bits"),
            Error::BucketLayout { slots, width } => write!(
                f,
                "bucket of {slots} x {width}-bit slots does not tile 128-byte cache lines"
            ),
            Error::Geometry(msg) => f.write_str(msg),
        }
    }
}

impl core::error::Error for Error {}

//! Compact lockless hash tables.
//!
//! Two bucketed schemes share one quotienting layer: a key is permuted, the
//! high bits of the result pick the bucket and only the low bits are stored.
//!
//! * [`cuckoo`]: static bucketed cuckoo table, concurrent build with
//!   atomic-exchange eviction chains, early-stopping lookups.
//! * [`iceberg`]: two-level iceberg table with a lockless concurrent
//!   find-or-put.
//! * [`verify`]: the slot well-order, a well-formedness checker and a
//!   sequential reference model for the iceberg table.
//!
//! The crate is `no_std` and needs `alloc` for the slot arrays.

#![no_std]

extern crate alloc;

pub mod cuckoo;
pub mod error;
pub mod iceberg;
pub mod quotient;
pub mod slot;
pub mod verify;

pub use error::Error;
pub use quotient::{AddressedKey, Key, KeyWidth, Permutation};
pub use slot::{AtomicSlot, SlotCodec, SlotWidth, EMPTY};

//! Std companion for `cpht-core`: parallel batch drivers, key generation,
//! trace and dump file formats, the concurrent stress harness and the
//! benchmark runner behind the `cpht` binary.

pub mod batch;
pub mod bench;
pub mod dump;
pub mod error;
pub mod keys;
pub mod stress;
pub mod trace;

pub use cpht_core as core;
pub use error::{Error, Result};

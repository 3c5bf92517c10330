use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::sync::atomic::{AtomicU16, AtomicU32};

use cpht::core::iceberg::{IcebergConfig, IcebergTable, OpResult};
use cpht::core::verify;
use cpht::dump::Dump;
use cpht::trace::{self, Trace};
use proptest::prelude::*;

#[test]
fn dump_round_trip_through_file() {
    let cfg = IcebergConfig::new(21, 6, 8).with_secondary_addr_bits(4).with_seed(31);
    let t = IcebergTable::<AtomicU16, AtomicU32>::new(cfg).unwrap();
    for k in 0..700u64 {
        t.fop(k * 13);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.dump");
    Dump::of(&t).write(BufWriter::new(File::create(&path).unwrap())).unwrap();
    let back = Dump::read(BufReader::new(File::open(&path).unwrap())).unwrap();
    assert_eq!(back, Dump::of(&t));
    let rebuilt = back.rebuild::<AtomicU16, AtomicU32>().unwrap();
    verify::check_well_formed(&rebuilt).unwrap();
    assert!(t.primary_words().eq(rebuilt.primary_words()));
    assert!(t.secondary_words().eq(rebuilt.secondary_words()));
    for k in 0..700u64 {
        assert_eq!(rebuilt.fop(k * 13), if t.find(k * 13) { OpResult::Found } else { OpResult::Full });
    }
}

#[test]
fn trace_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.bin");
    let t = trace::synthetic(500, 1500, 40, 2).unwrap();
    trace::write_trace_file(&path, &t).unwrap();
    let back = trace::read_trace_file(&path).unwrap();
    assert_eq!(back, t);
    assert_eq!(back.distinct(), 500);
}

proptest! {
    #[test]
    fn trace_bytes_round_trip(bits in 1u32..=64, raw in prop::collection::vec(any::<u64>(), 0..200)) {
        let mask = if bits == 64 { u64::MAX } else { (1 << bits) - 1 };
        let t = Trace { key_bits: bits, keys: raw.into_iter().map(|k| k & mask).collect() };
        let mut buf = Vec::new();
        trace::write_trace(&mut buf, &t).unwrap();
        prop_assert_eq!(buf.len(), 16 + 8 * t.keys.len());
        prop_assert_eq!(trace::read_trace(&buf[..]).unwrap(), t);
    }

    #[test]
    fn truncated_traces_rejected(keys in prop::collection::vec(0u64..1000, 1..50), cut in 1usize..8) {
        let t = Trace { key_bits: 10, keys };
        let mut buf = Vec::new();
        trace::write_trace(&mut buf, &t).unwrap();
        buf.truncate(buf.len() - cut);
        prop_assert!(trace::read_trace(&buf[..]).is_err());
    }
}

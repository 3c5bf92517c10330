//! Sequential reference model of iceberg find-or-put.
//!
//! Keys are kept whole (no remainders, no slot words) and placement follows
//! the merged-loop formulation directly: look for `k` anywhere among its
//! slots, otherwise take the `≺`-least empty one, otherwise report full.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::order::{SlotCoord, SlotOrder};
use crate::error::Error;
use crate::iceberg::{IcebergConfig, OpResult};
use crate::quotient::{Key, Permutation};

pub struct IcebergOracle {
    config: IcebergConfig,
    perms: [Permutation; 3],
    order: Vec<SlotCoord>,
    b0: usize,
    b1: usize,
    primary: Vec<Option<Key>>,
    secondary: Vec<Option<(Key, u8)>>,
}

impl IcebergOracle {
    pub fn new(config: IcebergConfig) -> Result<Self, Error> {
        let b0 = config.primary_bucket_slots;
        let b1 = config.secondary_bucket_slots();
        Ok(IcebergOracle {
            config,
            perms: config.permutations()?,
            order: SlotOrder::new(b0, b1).sorted(),
            b0,
            b1,
            primary: vec![None; config.primary_slots()],
            secondary: vec![None; config.secondary_slots()],
        })
    }

    fn index(&self, k: Key, c: SlotCoord) -> usize {
        match c.x {
            0 => {
                let a = self.perms[0].split_unchecked(k, self.config.primary_addr_bits).address;
                a as usize * self.b0 + c.y
            }
            x => {
                let a = self.perms[x as usize].split_unchecked(k, self.config.secondary_addr_bits).address;
                a as usize * self.b1 + c.y
            }
        }
    }

    fn holds(&self, k: Key, c: SlotCoord) -> bool {
        let i = self.index(k, c);
        match c.x {
            0 => self.primary[i] == Some(k),
            x => self.secondary[i] == Some((k, x)),
        }
    }

    fn is_empty(&self, k: Key, c: SlotCoord) -> bool {
        let i = self.index(k, c);
        match c.x {
            0 => self.primary[i].is_none(),
            _ => self.secondary[i].is_none(),
        }
    }

    pub fn fop(&mut self, k: Key) -> (OpResult, Option<SlotCoord>) {
        if let Some(&c) = self.order.iter().find(|&&c| self.holds(k, c)) {
            return (OpResult::Found, Some(c));
        }
        let Some(&c) = self.order.iter().find(|&&c| self.is_empty(k, c)) else {
            return (OpResult::Full, None);
        };
        let i = self.index(k, c);
        match c.x {
            0 => self.primary[i] = Some(k),
            x => self.secondary[i] = Some((k, x)),
        }
        (OpResult::Put, Some(c))
    }

    pub fn keys(&self) -> BTreeSet<Key> {
        self.primary
            .iter()
            .flatten()
            .copied()
            .chain(self.secondary.iter().flatten().map(|&(k, _)| k))
            .collect()
    }
}

/// Expected outcome of a sequential run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleRun {
    pub results: Vec<OpResult>,
    pub coords: Vec<Option<SlotCoord>>,
    pub keys: BTreeSet<Key>,
}

pub fn oracle_run(config: IcebergConfig, ops: &[Key]) -> Result<OracleRun, Error> {
    let mut oracle = IcebergOracle::new(config)?;
    let (results, coords) = ops.iter().map(|&k| oracle.fop(k)).unzip();
    Ok(OracleRun { results, coords, keys: oracle.keys() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iceberg::IcebergTable;
    use core::sync::atomic::AtomicU32;

    #[test]
    fn repeat_key() {
        let run = oracle_run(IcebergConfig::new(20, 4, 4), &[7, 7]).unwrap();
        assert_eq!(run.results, vec![OpResult::Put, OpResult::Found]);
        assert_eq!(run.coords[0], Some(SlotCoord::new(0, 0)));
    }

    #[test]
    fn saturation_ends_in_full() {
        // 1 primary bucket of 2, 1 secondary bucket of 1: three keys fit.
        let c = IcebergConfig::new(12, 0, 2).with_secondary_addr_bits(0);
        let run = oracle_run(c, &[1, 2, 3, 4, 1]).unwrap();
        assert_eq!(
            run.results,
            vec![OpResult::Put, OpResult::Put, OpResult::Put, OpResult::Full, OpResult::Found]
        );
        // Both secondary buckets are the same one and equally full: the
        // second bucket wins the tie.
        assert_eq!(run.coords[2], Some(SlotCoord::new(2, 0)));
    }

    #[test]
    fn matches_table_on_random_sequences() {
        for (b0, seed) in [(4usize, 1u64), (8, 2), (32, 3)] {
            let c = IcebergConfig::new(22, 3, b0).with_secondary_addr_bits(2).with_seed(seed);
            let mut state = seed;
            let universe = (c.capacity() as u64) * 5 / 4;
            let ops: Vec<Key> =
                (0..4000).map(|_| crate::quotient::splitmix64(&mut state) % universe).collect();
            let expected = oracle_run(c, &ops).unwrap();
            let t = IcebergTable::<AtomicU32, AtomicU32>::new(c.with_skip_filled_rereads(seed % 2 == 0)).unwrap();
            for (i, &k) in ops.iter().enumerate() {
                let out = t.fop_traced(k, &());
                assert_eq!((out.result, out.coord), (expected.results[i], expected.coords[i]), "op {i}");
            }
        }
    }
}

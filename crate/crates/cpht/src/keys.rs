//! Deterministic key sets for benchmarks and stress runs.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cpht_core::{Key, KeyWidth};

use crate::error::{Error, Result};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` distinct keys drawn uniformly from the `width` domain.
pub fn unique_keys(count: usize, width: KeyWidth, seed: u64) -> Result<Vec<Key>> {
    let domain = width.max_key() as u128 + 1;
    if count as u128 > domain {
        return Err(Error::Config(format!("cannot draw {count} distinct keys from a {width} domain")));
    }
    let mut rng = rng(seed);
    if count as u128 * 2 > domain {
        // Dense: shuffle the whole domain.
        let mut all: Vec<Key> = (0..=width.max_key()).collect();
        all.shuffle(&mut rng);
        all.truncate(count);
        return Ok(all);
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = rng.random::<u64>() & width.max_key();
        if seen.insert(k) {
            out.push(k);
        }
    }
    Ok(out)
}

/// A shuffled multiset of `len` keys over `distinct`, containing every key of
/// `distinct` at least once (when `len >= distinct.len()`).
pub fn with_duplicates(distinct: &[Key], len: usize, seed: u64) -> Vec<Key> {
    let mut rng = rng(seed);
    let mut out: Vec<Key> = distinct.iter().copied().take(len).collect();
    if !distinct.is_empty() {
        while out.len() < len {
            out.push(distinct[rng.random_range(0..distinct.len())]);
        }
    }
    out.shuffle(&mut rng);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unique_and_in_domain() {
        let w = KeyWidth::new(20).unwrap();
        let k = unique_keys(10_000, w, 1).unwrap();
        assert_eq!(k.iter().collect::<HashSet<_>>().len(), 10_000);
        assert!(k.iter().all(|&x| w.contains(x)));
        assert_eq!(k, unique_keys(10_000, w, 1).unwrap());
        let dense = unique_keys(200, KeyWidth::new(8).unwrap(), 3).unwrap();
        assert_eq!(dense.iter().collect::<HashSet<_>>().len(), 200);
        assert!(unique_keys(257, KeyWidth::new(8).unwrap(), 3).is_err());
    }

    #[test]
    fn duplicates_cover_every_key() {
        let d: Vec<Key> = (0..100).collect();
        let m = with_duplicates(&d, 250, 5);
        assert_eq!(m.len(), 250);
        assert_eq!(m.iter().collect::<HashSet<_>>().len(), 100);
        assert!(with_duplicates(&[], 10, 1).is_empty());
    }
}

use cpht_core::{KeyWidth, Permutation};
use proptest::prelude::*;

fn check_bijective(bits: u32, seed: u64) {
    let w = KeyWidth::new(bits).unwrap();
    let p = Permutation::from_seed(w, seed);
    let n = 1usize << bits;
    let mut seen = vec![false; n];
    for k in 0..n as u64 {
        let y = p.permute(k).unwrap();
        assert!(w.contains(y));
        assert!(!std::mem::replace(&mut seen[y as usize], true), "m={bits} seed={seed}: collision at {k}");
        assert_eq!(p.inverse(y).unwrap(), k);
    }
}

#[test]
fn exhaustive_bijection_small_widths() {
    for bits in 1..=20 {
        for seed in 0..3 {
            check_bijective(bits, seed * 7919 + bits as u64);
        }
    }
}

#[test]
fn address_depends_on_both_halves() {
    // Flipping a low bit must move the address for most keys.
    let w = KeyWidth::new(32).unwrap();
    let p = Permutation::from_seed(w, 5);
    let moved = (0..1000u64)
        .filter(|&k| p.split(k, 12).unwrap().address != p.split(k ^ 1, 12).unwrap().address)
        .count();
    assert!(moved > 900, "{moved}");
}

#[test]
fn out_of_domain_rejected() {
    let p = Permutation::from_seed(KeyWidth::new(10).unwrap(), 0);
    assert!(p.permute(1 << 10).is_err());
    assert!(p.split(3, 11).is_err());
    assert!(p.reconstruct(1 << 4, 0, 4).is_err());
    assert!(p.reconstruct(0, 1 << 6, 4).is_err());
}

proptest! {
    #[test]
    fn split_reconstruct_round_trip(bits in 1u32..=64, addr in 0u32..=64, seed: u64, raw: u64) {
        let addr = addr.min(bits);
        let w = KeyWidth::new(bits).unwrap();
        let k = raw & w.max_key();
        let p = Permutation::from_seed(w, seed);
        let q = p.split(k, addr).unwrap();
        prop_assert!(addr == 64 || q.address >> addr == 0);
        prop_assert_eq!(p.reconstruct(q.address, q.remainder, addr).unwrap(), k);
    }

    #[test]
    fn inverse_of_permute(bits in 1u32..=64, seed: u64, raw: u64) {
        let w = KeyWidth::new(bits).unwrap();
        let p = Permutation::from_seed(w, seed);
        let k = raw & w.max_key();
        prop_assert_eq!(p.inverse(p.permute(k).unwrap()).unwrap(), k);
    }
}

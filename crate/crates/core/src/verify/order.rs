//! The well-order on a key's iceberg slots.
//!
//! For one key, `S = {0} x [0, B0)  ∪  {1, 2} x [0, B1)`. Coordinate `(0, y)`
//! is slot `y` of the primary bucket, `(1, y)` and `(2, y)` are slot `y` of
//! the first and second secondary bucket. Primary slots come first; the two
//! secondary buckets interleave, second bucket first at each depth:
//!
//! ```text
//!   B0 = 3, B1 = 2:   (0,0) (0,1) (0,2) (2,0) (1,0) (2,1) (1,1)
//! ```

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlotCoord {
    pub x: u8,
    pub y: usize,
}

impl SlotCoord {
    pub const fn new(x: u8, y: usize) -> Self {
        SlotCoord { x, y }
    }
}

/// The set `S` of slot coordinates for bucket sizes `b0` and `b1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotOrder {
    b0: usize,
    b1: usize,
}

impl SlotOrder {
    pub fn new(b0: usize, b1: usize) -> Self {
        SlotOrder { b0, b1 }
    }

    pub fn contains(&self, c: SlotCoord) -> bool {
        match c.x {
            0 => c.y < self.b0,
            1 | 2 => c.y < self.b1,
            _ => false,
        }
    }

    /// `a ≺ b`.
    pub fn precedes(&self, a: SlotCoord, b: SlotCoord) -> Result<bool, Error> {
        if !self.contains(a) || !self.contains(b) {
            return Err(Error::Geometry("slot coordinate outside S"));
        }
        Ok(precedes_unchecked(a, b))
    }

    /// All of `S`, sorted by `≺`. Built by comparison sort on `precedes`.
    pub fn sorted(&self) -> Vec<SlotCoord> {
        let mut all: Vec<SlotCoord> = (0..self.b0)
            .map(|y| SlotCoord::new(0, y))
            .chain((1..=2).flat_map(|x| (0..self.b1).map(move |y| SlotCoord::new(x, y))))
            .collect();
        all.sort_by(|&a, &b| {
            if a == b {
                Ordering::Equal
            } else if precedes_unchecked(a, b) {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        });
        all
    }

    pub fn len(&self) -> usize {
        self.b0 + 2 * self.b1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn precedes_unchecked(a: SlotCoord, b: SlotCoord) -> bool {
    match (a.x, b.x) {
        (0, 0) => a.y < b.y,
        (0, _) => true,
        (_, 0) => false,
        (xa, xb) if xa == xb => a.y < b.y,
        (1, 2) => a.y < b.y,
        // (2, y) ≺ (1, x) iff not (1, x) ≺ (2, y)
        _ => a.y <= b.y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(x: u8, y: usize) -> SlotCoord {
        SlotCoord::new(x, y)
    }

    #[test]
    fn primary_before_secondary() {
        let o = SlotOrder::new(4, 2);
        assert!(o.precedes(c(0, 3), c(1, 0)).unwrap());
        assert!(o.precedes(c(0, 3), c(2, 0)).unwrap());
        assert!(!o.precedes(c(2, 0), c(0, 0)).unwrap());
    }

    #[test]
    fn figure_ordering() {
        let o = SlotOrder::new(3, 2);
        assert_eq!(
            o.sorted(),
            vec![c(0, 0), c(0, 1), c(0, 2), c(2, 0), c(1, 0), c(2, 1), c(1, 1)]
        );
    }

    #[test]
    fn irreflexive() {
        let o = SlotOrder::new(3, 2);
        for a in o.sorted() {
            assert!(!o.precedes(a, a).unwrap());
        }
    }

    #[test]
    fn out_of_domain() {
        let o = SlotOrder::new(2, 1);
        assert!(o.precedes(c(0, 2), c(1, 0)).is_err());
        assert!(o.precedes(c(1, 1), c(1, 0)).is_err());
        assert!(o.precedes(c(3, 0), c(1, 0)).is_err());
    }

    #[test]
    fn strict_total_order_exhaustive() {
        for b0 in 1..=8 {
            for b1 in 0..=b0 {
                let o = SlotOrder::new(b0, b1);
                let all = o.sorted();
                assert_eq!(all.len(), o.len());
                for &a in &all {
                    for &b in &all {
                        let ab = o.precedes(a, b).unwrap();
                        let ba = o.precedes(b, a).unwrap();
                        assert_eq!([ab, ba, a == b].iter().filter(|&&t| t).count(), 1);
                        for &d in &all {
                            if ab && o.precedes(b, d).unwrap() {
                                assert!(o.precedes(a, d).unwrap());
                            }
                        }
                    }
                }
            }
        }
    }
}

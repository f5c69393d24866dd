//! Byte sets and byte equivalence classes.
//!
//! Every automaton in this crate is defined over the full 256-value byte
//! alphabet. Transition tables are stored per equivalence class of bytes,
//! where two bytes share a class when no transition label distinguishes them.
//! Lookups through [`ByteClasses`] keep the 256-byte semantics intact.

use std::fmt;

/// A set of bytes, stored as a 256-bit bitmap.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ByteSet {
    bits: [u64; 4],
}

impl ByteSet {
    pub const fn empty() -> ByteSet {
        ByteSet { bits: [0; 4] }
    }

    pub const fn full() -> ByteSet {
        ByteSet { bits: [u64::MAX; 4] }
    }

    pub fn singleton(byte: u8) -> ByteSet {
        let mut set = ByteSet::empty();
        set.insert(byte);
        set
    }

    /// The inclusive range `lo..=hi`. Empty when `lo > hi`.
    pub fn range(lo: u8, hi: u8) -> ByteSet {
        let mut set = ByteSet::empty();
        if lo <= hi {
            for b in lo..=hi {
                set.insert(b);
            }
        }
        set
    }

    pub fn from_bytes(bytes: &[u8]) -> ByteSet {
        let mut set = ByteSet::empty();
        for &b in bytes {
            set.insert(b);
        }
        set
    }

    #[inline]
    pub fn insert(&mut self, byte: u8) {
        self.bits[(byte >> 6) as usize] |= 1 << (byte & 63);
    }

    #[inline]
    pub fn remove(&mut self, byte: u8) {
        self.bits[(byte >> 6) as usize] &= !(1 << (byte & 63));
    }

    #[inline]
    pub fn contains(&self, byte: u8) -> bool {
        self.bits[(byte >> 6) as usize] & (1 << (byte & 63)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.bits == [0; 4]
    }

    pub fn is_full(&self) -> bool {
        self.bits == [u64::MAX; 4]
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union(&self, other: &ByteSet) -> ByteSet {
        let mut bits = self.bits;
        for (w, o) in bits.iter_mut().zip(other.bits) {
            *w |= o;
        }
        ByteSet { bits }
    }

    pub fn intersection(&self, other: &ByteSet) -> ByteSet {
        let mut bits = self.bits;
        for (w, o) in bits.iter_mut().zip(other.bits) {
            *w &= o;
        }
        ByteSet { bits }
    }

    pub fn complement(&self) -> ByteSet {
        ByteSet {
            bits: self.bits.map(|w| !w),
        }
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..=255u8).filter(move |&b| self.contains(b))
    }

    /// Maximal runs of consecutive members, as inclusive `(lo, hi)` pairs.
    pub fn ranges(&self) -> Vec<(u8, u8)> {
        let mut out = Vec::new();
        let mut start: Option<u8> = None;
        for b in 0..=255u8 {
            match (self.contains(b), start) {
                (true, None) => start = Some(b),
                (false, Some(lo)) => {
                    out.push((lo, b - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(lo) = start {
            out.push((lo, 255));
        }
        out
    }
}

impl fmt::Debug for ByteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ByteSet(")?;
        for (i, (lo, hi)) in self.ranges().into_iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if lo == hi {
                write!(f, "{:?}", lo as char)?;
            } else {
                write!(f, "{:?}-{:?}", lo as char, hi as char)?;
            }
        }
        write!(f, ")")
    }
}

/// Partition of the 256 bytes into equivalence classes.
///
/// Class ids are assigned in order of each class's smallest byte, so class 0
/// always contains byte 0 and iterating classes in id order visits their
/// representatives in ascending byte order.
#[derive(Clone, PartialEq, Eq)]
pub struct ByteClasses {
    map: [u8; 256],
    count: usize,
}

impl ByteClasses {
    /// Every byte in its own class.
    pub fn singletons() -> ByteClasses {
        let mut map = [0u8; 256];
        for (i, slot) in map.iter_mut().enumerate() {
            *slot = i as u8;
        }
        ByteClasses { map, count: 256 }
    }

    /// The coarsest partition in which each of `sets` is a union of classes.
    pub fn from_sets<'a, I>(sets: I) -> ByteClasses
    where
        I: IntoIterator<Item = &'a ByteSet>,
    {
        // Refine by membership signature one set at a time.
        let mut ids = [0u16; 256];
        for set in sets {
            let mut remap = rustc_hash::FxHashMap::default();
            for b in 0..=255u8 {
                let key = (ids[b as usize], set.contains(b));
                let next = remap.len() as u16;
                ids[b as usize] = *remap.entry(key).or_insert(next);
            }
        }
        Self::canonical(&ids)
    }

    /// Build from an arbitrary class labelling, renumbering classes by
    /// smallest member.
    pub fn from_labels(labels: &[u16; 256]) -> ByteClasses {
        Self::canonical(labels)
    }

    fn canonical(labels: &[u16; 256]) -> ByteClasses {
        let mut remap = rustc_hash::FxHashMap::default();
        let mut map = [0u8; 256];
        for b in 0..256 {
            let next = remap.len();
            let id = *remap.entry(labels[b]).or_insert(next);
            map[b] = id as u8;
        }
        ByteClasses {
            map,
            count: remap.len(),
        }
    }

    #[inline(always)]
    pub fn get(&self, byte: u8) -> usize {
        self.map[byte as usize] as usize
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// The smallest byte in each class, indexed by class id.
    pub fn representatives(&self) -> Vec<u8> {
        let mut reps = vec![None; self.count];
        for b in 0..=255u8 {
            let c = self.get(b);
            if reps[c].is_none() {
                reps[c] = Some(b);
            }
        }
        reps.into_iter().map(|r| r.expect("every class is inhabited")).collect()
    }

    /// Class ids in the order breadth-first constructions visit them:
    /// ascending by largest member. The catch-all class of a pattern usually
    /// holds 0xFF, so it comes last and the pattern's own bytes first.
    pub fn visit_order(&self) -> Vec<usize> {
        let mut last = vec![0u8; self.count];
        for b in 0..=255u8 {
            last[self.get(b)] = b;
        }
        let mut order: Vec<usize> = (0..self.count).collect();
        order.sort_by_key(|&c| last[c]);
        order
    }

    /// The members of class `class`.
    pub fn members(&self, class: usize) -> ByteSet {
        let mut set = ByteSet::empty();
        for b in 0..=255u8 {
            if self.get(b) == class {
                set.insert(b);
            }
        }
        set
    }
}

impl fmt::Debug for ByteClasses {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let classes: Vec<ByteSet> = (0..self.count).map(|c| self.members(c)).collect();
        f.debug_tuple("ByteClasses").field(&classes).finish()
    }
}

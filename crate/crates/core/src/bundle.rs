//! Packed indicator vectors over the item set.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A bundle of items, stored as packed bits (item `j` is bit `j % 64` of word `j / 64`).
///
/// The textual form lists items in order, so `"101"` holds items 0 and 2.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bundle {
    len: usize,
    words: SmallVec<[u64; 1]>,
}

impl Bundle {
    pub fn empty(items: usize) -> Self {
        Bundle {
            len: items,
            words: SmallVec::from_elem(0, items.div_ceil(WORD).max(1)),
        }
    }

    pub fn full(items: usize) -> Self {
        let mut b = Bundle::empty(items);
        for j in 0..items {
            b.insert(j);
        }
        b
    }

    /// Builds the bundle whose item `j` is bit `j` of `index`. Requires `items <= 64`.
    pub fn from_index(items: usize, index: u64) -> Self {
        assert!(items <= WORD, "from_index supports at most 64 items");
        let mut b = Bundle::empty(items);
        let mask = if items == WORD { u64::MAX } else { (1u64 << items) - 1 };
        b.words[0] = index & mask;
        b
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut b = Bundle::empty(bits.len());
        for (j, &on) in bits.iter().enumerate() {
            if on {
                b.insert(j);
            }
        }
        b
    }

    /// Integer index of a bundle with at most 64 items (inverse of [`Bundle::from_index`]).
    pub fn index(&self) -> u64 {
        debug_assert!(self.len <= WORD);
        self.words[0]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, item: usize) -> bool {
        debug_assert!(item < self.len);
        self.words[item / WORD] >> (item % WORD) & 1 == 1
    }

    pub fn insert(&mut self, item: usize) {
        assert!(item < self.len, "item {item} out of range for {} items", self.len);
        self.words[item / WORD] |= 1 << (item % WORD);
    }

    pub fn remove(&mut self, item: usize) {
        assert!(item < self.len, "item {item} out of range for {} items", self.len);
        self.words[item / WORD] &= !(1 << (item % WORD));
    }

    pub fn set(&mut self, item: usize, on: bool) {
        if on {
            self.insert(item)
        } else {
            self.remove(item)
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_subset(&self, other: &Bundle) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &Bundle) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn union(&self, other: &Bundle) -> Bundle {
        debug_assert_eq!(self.len, other.len);
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        out
    }

    /// Items contained in the bundle, ascending.
    pub fn items(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * WORD + bit)
            })
        })
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.len)
            .map(|j| if self.contains(j) { 1.0 } else { 0.0 })
            .collect()
    }

    pub(crate) fn check_len(&self, items: usize) -> Result<()> {
        if self.len != items {
            return Err(Error::Dimension {
                expected: items,
                found: self.len,
            });
        }
        Ok(())
    }
}

/// Bundles order as unsigned integers (item 0 least significant), so every strict
/// superset sorts after its subsets.
impl Ord for Bundle {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| {
            self.words
                .iter()
                .rev()
                .cmp(other.words.iter().rev())
        })
    }
}

impl PartialOrd for Bundle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len {
            f.write_str(if self.contains(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bundle({self})")
    }
}

impl FromStr for Bundle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut b = Bundle::empty(s.len());
        for (j, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => b.insert(j),
                other => {
                    return Err(Error::Data(format!(
                        "bundle bits must be 0 or 1, found {other:?} in {s:?}"
                    )))
                }
            }
        }
        Ok(b)
    }
}

impl Serialize for Bundle {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bundle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All `2^items` bundles in index order.
pub fn all_bundles(items: usize) -> impl Iterator<Item = Bundle> {
    assert!(items < WORD, "enumeration limited to fewer than 64 items");
    (0..1u64 << items).map(move |i| Bundle::from_index(items, i))
}

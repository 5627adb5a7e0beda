use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

/// A subset of the points `0..len` of a finite space, stored as a bit mask.
///
/// Ordering compares the masks as unsigned integers (point 0 is the least
/// significant bit), which is the enumeration order of open-set families.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    len: usize,
    words: Vec<u64>,
}

impl PointSet {
    pub fn empty(len: usize) -> Self {
        PointSet {
            len,
            words: vec![0; len.div_ceil(64).max(1)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn singleton(len: usize, point: usize) -> Self {
        let mut s = Self::empty(len);
        s.insert(point);
        s
    }

    pub fn from_points(len: usize, points: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(len);
        for p in points {
            s.insert(p);
        }
        s
    }

    /// Build from a single-word mask; bits at or above `len` are dropped.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        let mut s = Self::empty(len);
        s.words[0] = if len >= 64 { mask } else { mask & ((1u64 << len) - 1) };
        s
    }

    /// Universe size.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, point: usize) {
        assert!(point < self.len, "point {point} outside universe {}", self.len);
        self.words[point / 64] |= 1 << (point % 64);
    }

    pub fn contains(&self, point: usize) -> bool {
        point < self.len && self.words[point / 64] >> (point % 64) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        self.zip_with(other, |a, b| a & !b)
    }

    fn zip_with(&self, other: &PointSet, f: impl Fn(u64, u64) -> u64) -> PointSet {
        assert_eq!(self.len, other.len, "point sets over different universes");
        PointSet {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }

    /// Lowercase hexadecimal mask without leading zeros (`0` for the empty set).
    pub fn to_hex(&self) -> String {
        let mut out = String::new();
        for w in self.words.iter().rev() {
            if out.is_empty() {
                if *w != 0 {
                    out = format!("{w:x}");
                }
            } else {
                out.push_str(&format!("{w:016x}"));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    pub fn from_hex(len: usize, hex: &str) -> Option<PointSet> {
        let hex = hex.trim().trim_start_matches("0x");
        if hex.is_empty() || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            return None;
        }
        let mut s = Self::empty(len);
        for (nibble_idx, c) in hex.chars().rev().enumerate() {
            let v = c.to_digit(16)? as u64;
            for bit in 0..4 {
                if v >> bit & 1 == 1 {
                    let point = nibble_idx * 4 + bit;
                    if point >= len {
                        return None;
                    }
                    s.insert(point);
                }
            }
        }
        Some(s)
    }
}

impl Ord for PointSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for PointSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for PointSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_roundtrip_multiword() {
        let s = PointSet::from_points(130, [0, 3, 64, 129]);
        let h = s.to_hex();
        assert_eq!(h, "200000000000000010000000000000009");
        assert_eq!(PointSet::from_hex(130, &h), Some(s));
        assert_eq!(PointSet::empty(5).to_hex(), "0");
        assert_eq!(PointSet::full(4).to_hex(), "f");
    }

    #[test]
    fn ordering_is_numeric() {
        let a = PointSet::from_mask(70, 0b10);
        let b = PointSet::from_points(70, [65]);
        let c = PointSet::from_mask(70, 0b01);
        assert!(c < a && a < b);
    }

    #[test]
    fn rejects_out_of_range_hex() {
        assert_eq!(PointSet::from_hex(3, "8"), None);
        assert_eq!(PointSet::from_hex(3, "zz"), None);
    }
}

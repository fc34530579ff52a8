//! Word-sized sets of ground-set elements.

use std::cmp::Ordering;
use std::fmt;

/// Largest ground set a [`crate::Matroid`] may have.
pub const MAX_GROUND: usize = 64;

/// A subset of `{0, .., 63}` stored as a single machine word.
///
/// Iteration is always in ascending element order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ElemSet(u64);

impl ElemSet {
    pub const EMPTY: ElemSet = ElemSet(0);

    #[inline]
    pub const fn from_bits(bits: u64) -> Self {
        ElemSet(bits)
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    /// The set `{0, .., n-1}`.
    #[inline]
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_GROUND);
        if n == MAX_GROUND {
            ElemSet(u64::MAX)
        } else {
            ElemSet((1u64 << n) - 1)
        }
    }

    #[inline]
    pub fn singleton(e: usize) -> Self {
        assert!(e < MAX_GROUND);
        ElemSet(1u64 << e)
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, e: usize) -> bool {
        e < MAX_GROUND && self.0 >> e & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, e: usize) {
        assert!(e < MAX_GROUND);
        self.0 |= 1u64 << e;
    }

    #[inline]
    pub fn remove(&mut self, e: usize) {
        if e < MAX_GROUND {
            self.0 &= !(1u64 << e);
        }
    }

    #[inline]
    pub fn with(self, e: usize) -> Self {
        let mut s = self;
        s.insert(e);
        s
    }

    #[inline]
    pub fn without(self, e: usize) -> Self {
        let mut s = self;
        s.remove(e);
        s
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        ElemSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        ElemSet(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: Self) -> Self {
        ElemSet(self.0 & !other.0)
    }

    #[inline]
    pub fn symmetric_difference(self, other: Self) -> Self {
        ElemSet(self.0 ^ other.0)
    }

    #[inline]
    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_superset(self, other: Self) -> bool {
        other.is_subset(self)
    }

    /// Smallest element, if any.
    #[inline]
    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Largest element, if any.
    #[inline]
    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    pub fn iter(self) -> Elems {
        Elems(self.0)
    }

    /// Every subset of `self`, including the empty set and `self`.
    pub fn subsets(self) -> Subsets {
        Subsets {
            full: self.0,
            next: Some(0),
        }
    }

    /// Size first, then lexicographic on the ascending element lists.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| lex_cmp_words(&[self.0], &[other.0]))
    }
}

/// Lexicographic comparison of two bitsets read as ascending index lists.
pub(crate) fn lex_cmp_words(a: &[u64], b: &[u64]) -> Ordering {
    let n = a.len().max(b.len());
    for w in 0..n {
        let x = a.get(w).copied().unwrap_or(0);
        let y = b.get(w).copied().unwrap_or(0);
        let d = x ^ y;
        if d == 0 {
            continue;
        }
        // First position where the lists diverge is the lowest differing bit.
        let bit = d.trailing_zeros();
        let a_has_it = x >> bit & 1 == 1;
        let other = if a_has_it { b } else { a };
        let above = if bit == 63 { 0 } else { u64::MAX << (bit + 1) };
        let other_continues = other.get(w).copied().unwrap_or(0) & above != 0
            || other.iter().skip(w + 1).any(|&v| v != 0);
        // The list holding the divergent element is smaller unless the other
        // list is a proper prefix of it.
        return if a_has_it == other_continues {
            Ordering::Less
        } else {
            Ordering::Greater
        };
    }
    Ordering::Equal
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for ElemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = ElemSet::EMPTY;
        for e in iter {
            s.insert(e);
        }
        s
    }
}

impl<'a> FromIterator<&'a usize> for ElemSet {
    fn from_iter<I: IntoIterator<Item = &'a usize>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

impl IntoIterator for ElemSet {
    type Item = usize;
    type IntoIter = Elems;
    fn into_iter(self) -> Elems {
        self.iter()
    }
}

/// Ascending iterator over the members of an [`ElemSet`].
#[derive(Clone)]
pub struct Elems(u64);

impl Iterator for Elems {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let e = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(e)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Elems {}

/// Iterator over all subsets of a fixed set (standard `(s - full) & full` walk).
pub struct Subsets {
    full: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = ElemSet;

    fn next(&mut self) -> Option<ElemSet> {
        let cur = self.next?;
        self.next = if cur == self.full {
            None
        } else {
            Some(cur.wrapping_sub(self.full) & self.full)
        };
        Some(ElemSet(cur))
    }
}

//! Families of circuit-index sets and the operations `ε`, `↑` and `min`.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::elemset::lex_cmp_words;

/// Largest circuit universe supported by [`CircuitSet`].
pub const MAX_UNIVERSE: usize = 4096;

/// Largest universe for which families are materialized as `2^u` bitmaps.
pub const MAX_DENSE_UNIVERSE: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("universe of {universe} exceeds the limit of {max}")]
    UniverseTooLarge { universe: usize, max: usize },
    #[error("index {index} lies outside the universe 0..{universe}")]
    IndexOutOfUniverse { index: usize, universe: usize },
}

/// A set of circuit indices. Trailing zero words are trimmed, so equal sets
/// have equal representations.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct CircuitSet {
    words: SmallVec<[u64; 2]>,
}

impl CircuitSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut s = Self::new();
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Interprets the low `universe` bits of `mask` as a set.
    pub fn from_mask(mask: u64) -> Self {
        let mut s = Self::new();
        if mask != 0 {
            s.words.push(mask);
        }
        s
    }

    /// The set as a single word, if every index is below 64.
    pub fn as_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < MAX_UNIVERSE, "circuit index {i} beyond {MAX_UNIVERSE}");
        let w = i / 64;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1u64 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        let w = i / 64;
        if w < self.words.len() {
            self.words[w] &= !(1u64 << (i % 64));
            self.trim();
        }
    }

    pub fn without(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.remove(i);
        s
    }

    pub fn with(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.insert(i);
        s
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| w >> (i % 64) & 1 == 1)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            let mut b = bits;
            std::iter::from_fn(move || {
                if b == 0 {
                    return None;
                }
                let t = b.trailing_zeros() as usize;
                b &= b - 1;
                Some(w * 64 + t)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn last(&self) -> Option<usize> {
        let w = self.words.len().checked_sub(1)?;
        Some(w * 64 + 63 - self.words[w].leading_zeros() as usize)
    }

    pub fn union(&self, other: &Self) -> Self {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (w, &b) in words.iter_mut().zip(short.words.iter()) {
            *w |= b;
        }
        CircuitSet { words }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut s = CircuitSet {
            words: self
                .words
                .iter()
                .zip(other.words.iter())
                .map(|(a, b)| a & b)
                .collect(),
        };
        s.trim();
        s
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut s = self.clone();
        for (w, &b) in s.words.iter_mut().zip(other.words.iter()) {
            *w &= !b;
        }
        s.trim();
        s
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    #[inline]
    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.len() <= other.words.len()
            && self
                .words
                .iter()
                .zip(other.words.iter())
                .all(|(a, b)| a & !b == 0)
    }

    /// Size first, then lexicographic on the ascending index lists.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| lex_cmp_words(&self.words, &other.words))
    }

    /// Every subset of `self` whose size lies in `sizes`.
    pub fn subsets_sized(&self, sizes: std::ops::RangeInclusive<usize>) -> Vec<CircuitSet> {
        let elems = self.to_vec();
        let mut out = Vec::new();
        let hi = (*sizes.end()).min(elems.len());
        for k in *sizes.start()..=hi {
            for_each_combination(&elems, k, |combo| out.push(CircuitSet::from_indices(combo.iter().copied())));
        }
        out
    }
}

impl Ord for CircuitSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_cmp(other)
    }
}

impl PartialOrd for CircuitSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for CircuitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for CircuitSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        CircuitSet::from_indices(iter)
    }
}

/// Calls `f` on every `k`-combination of `items`, in lexicographic order.
pub(crate) fn for_each_combination<T: Copy>(items: &[T], k: usize, mut f: impl FnMut(&[T])) {
    if k > items.len() {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf: Vec<T> = idx.iter().map(|&i| items[i]).collect();
    loop {
        f(&buf);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + items.len() - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
        for j in i..k {
            buf[j] = items[idx[j]];
        }
    }
}

fn binomial_saturating(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// A family of circuit sets with O(1) membership; no containment constraint.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Family {
    members: FxHashSet<CircuitSet>,
}

impl Family {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn insert(&mut self, s: CircuitSet) -> bool {
        self.members.insert(s)
    }

    pub fn contains(&self, s: &CircuitSet) -> bool {
        self.members.contains(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CircuitSet> {
        self.members.iter()
    }

    /// Members in canonical order.
    pub fn sorted(&self) -> Vec<CircuitSet> {
        let mut v: Vec<CircuitSet> = self.members.iter().cloned().collect();
        v.par_sort_unstable();
        v
    }

    pub fn is_superset_of(&self, other: &Family) -> bool {
        other.members.iter().all(|s| self.members.contains(s))
    }
}

impl FromIterator<CircuitSet> for Family {
    fn from_iter<I: IntoIterator<Item = CircuitSet>>(iter: I) -> Self {
        Family {
            members: iter.into_iter().collect(),
        }
    }
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.sorted()).finish()
    }
}

/// A family in which no member contains another.
///
/// Members are held in canonical order (size, then lexicographic).
#[derive(Clone, Default)]
pub struct Antichain {
    members: Vec<CircuitSet>,
    lookup: FxHashSet<CircuitSet>,
    min_len: usize,
    max_len: usize,
}

impl PartialEq for Antichain {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
    }
}

impl Eq for Antichain {}

impl Antichain {
    pub fn new() -> Self {
        Self::default()
    }

    /// The minimal members of `sets`.
    pub fn from_sets<I: IntoIterator<Item = CircuitSet>>(sets: I) -> Self {
        let mut v: Vec<CircuitSet> = sets.into_iter().collect();
        v.par_sort_unstable();
        v.dedup();
        let mut out = Antichain::new();
        for s in v {
            if !out.up_contains(&s) {
                out.push_unchecked(s);
            }
        }
        out
    }

    /// Builds from members already known to be an antichain.
    pub(crate) fn from_sorted_antichain(members: Vec<CircuitSet>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        let min_len = members.first().map_or(0, CircuitSet::len);
        let max_len = members.iter().map(CircuitSet::len).max().unwrap_or(0);
        let lookup = members.iter().cloned().collect();
        Antichain {
            members,
            lookup,
            min_len,
            max_len,
        }
    }

    /// Appends sets of one common size, none above a current member and none
    /// equal to each other. Keeps canonical order when `sets` is sorted and
    /// not smaller than the current members.
    pub(crate) fn push_level(&mut self, sets: Vec<CircuitSet>) {
        for s in sets {
            self.push_unchecked(s);
        }
    }

    /// Appends a set not above any current member. Callers feed sets in
    /// nondecreasing size so that no member can later be strictly above it.
    fn push_unchecked(&mut self, s: CircuitSet) {
        let l = s.len();
        if self.members.is_empty() || l < self.min_len {
            self.min_len = l;
        }
        self.max_len = self.max_len.max(l);
        self.lookup.insert(s.clone());
        self.members.push(s);
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[CircuitSet] {
        &self.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CircuitSet> {
        self.members.iter()
    }

    pub fn contains(&self, s: &CircuitSet) -> bool {
        self.lookup.contains(s)
    }

    pub fn max_member_len(&self) -> usize {
        self.max_len
    }

    /// Membership of `x` in the upward closure: some member is `⊆ x`.
    pub fn up_contains(&self, x: &CircuitSet) -> bool {
        if self.members.is_empty() {
            return false;
        }
        let n = x.len();
        if n < self.min_len {
            return false;
        }
        let hi = self.max_len.min(n);
        let mut probes = 0usize;
        for k in self.min_len..=hi {
            probes = probes.saturating_add(binomial_saturating(n, k));
        }
        if probes < self.members.len() {
            let elems = x.to_vec();
            for k in self.min_len..=hi {
                let mut found = false;
                for_each_combination(&elems, k, |combo| {
                    if !found && self.lookup.contains(&CircuitSet::from_indices(combo.iter().copied())) {
                        found = true;
                    }
                });
                if found {
                    return true;
                }
            }
            false
        } else {
            self.members.iter().any(|m| m.is_subset(x))
        }
    }

    pub fn to_family(&self) -> Family {
        self.members.iter().cloned().collect()
    }

    /// Histogram of member sizes, sorted by size.
    pub fn size_histogram(&self) -> Vec<(usize, usize)> {
        let mut h: std::collections::BTreeMap<usize, usize> = Default::default();
        for m in &self.members {
            *h.entry(m.len()).or_default() += 1;
        }
        h.into_iter().collect()
    }

    /// Largest index used by any member, plus one.
    pub fn universe_hint(&self) -> usize {
        self.members.iter().filter_map(CircuitSet::last).max().map_or(0, |m| m + 1)
    }

    pub fn to_json(&self, universe: usize) -> AntichainJson {
        AntichainJson {
            universe,
            sets: self.members.iter().map(CircuitSet::to_vec).collect(),
        }
    }

    pub fn from_json(j: &AntichainJson) -> Result<Self, FamilyError> {
        if j.universe > MAX_UNIVERSE {
            return Err(FamilyError::UniverseTooLarge {
                universe: j.universe,
                max: MAX_UNIVERSE,
            });
        }
        let mut sets = Vec::with_capacity(j.sets.len());
        for s in &j.sets {
            if let Some(&index) = s.iter().find(|&&i| i >= j.universe) {
                return Err(FamilyError::IndexOutOfUniverse {
                    index,
                    universe: j.universe,
                });
            }
            sets.push(CircuitSet::from_indices(s.iter().copied()));
        }
        Ok(Antichain::from_sets(sets))
    }
}

impl fmt::Debug for Antichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.members).finish()
    }
}

/// On-disk form: `{"universe": int, "sets": [[int]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntichainJson {
    pub universe: usize,
    pub sets: Vec<Vec<usize>>,
}

/// Exactly the inclusion-minimal members of `f`.
pub fn minimalize(f: &Family) -> Antichain {
    Antichain::from_sets(f.iter().cloned())
}

/// `Antichain::up_contains` as a free function.
pub fn up_contains(a: &Antichain, x: &CircuitSet) -> bool {
    a.up_contains(x)
}

/// Member index lists keyed by circuit index, for pairing sets that share an
/// element without scanning all pairs.
pub(crate) fn index_by_element(members: &[CircuitSet]) -> FxHashMap<usize, Vec<usize>> {
    let mut idx: FxHashMap<usize, Vec<usize>> = FxHashMap::default();
    for (i, m) in members.iter().enumerate() {
        for c in m.iter() {
            idx.entry(c).or_default().push(i);
        }
    }
    idx
}

/// `ε(F) = F ∪ {(A₁ ∪ A₂) \ {C} : A₁, A₂ ∈ F, A₁ ∩ A₂ ∉ F, C ∈ A₁ ∩ A₂}`.
///
/// The test `A₁ ∩ A₂ ∉ F` is literal membership in `F`.
pub fn epsilon_step(f: &Family) -> Family {
    let members = f.sorted();
    let index = index_by_element(&members);
    let produced: Vec<CircuitSet> = (0..members.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let a = &members[i];
            let mut out = Vec::new();
            for c in a.iter() {
                for &j in &index[&c] {
                    if j <= i {
                        continue;
                    }
                    let b = &members[j];
                    let common = a.intersection(b);
                    // Visit each pair once: from its smallest shared index.
                    if common.first() != Some(c) || f.contains(&common) {
                        continue;
                    }
                    let union = a.union(b);
                    out.extend(common.iter().map(|x| union.without(x)));
                }
            }
            out
        })
        .collect();
    let mut result = f.clone();
    for s in produced {
        result.insert(s);
    }
    result
}

/// A family over a universe of at most [`MAX_DENSE_UNIVERSE`] indices,
/// stored as one bit per subset.
#[derive(Clone, PartialEq, Eq)]
pub struct DenseFamily {
    universe: usize,
    bits: Vec<u64>,
}

impl DenseFamily {
    pub fn empty(universe: usize) -> Result<Self, FamilyError> {
        if universe > MAX_DENSE_UNIVERSE {
            return Err(FamilyError::UniverseTooLarge {
                universe,
                max: MAX_DENSE_UNIVERSE,
            });
        }
        let words = (1usize << universe).div_ceil(64);
        Ok(DenseFamily {
            universe,
            bits: vec![0; words],
        })
    }

    /// The family `{X : keep(X)}`, evaluated in parallel.
    pub fn from_predicate(universe: usize, keep: impl Fn(u32) -> bool + Sync) -> Result<Self, FamilyError> {
        let mut out = Self::empty(universe)?;
        let limit = 1u64 << universe;
        out.bits.par_iter_mut().enumerate().for_each(|(w, word)| {
            let base = w as u64 * 64;
            for b in 0..64u64 {
                let m = base + b;
                if m < limit && keep(m as u32) {
                    *word |= 1u64 << b;
                }
            }
        });
        Ok(out)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains_mask(&self, mask: u32) -> bool {
        let m = mask as usize;
        self.bits[m / 64] >> (m % 64) & 1 == 1
    }

    #[inline]
    pub fn insert_mask(&mut self, mask: u32) {
        let m = mask as usize;
        self.bits[m / 64] |= 1u64 << (m % 64);
    }

    pub fn contains(&self, s: &CircuitSet) -> bool {
        match s.as_mask() {
            Some(m) if m < (1u64 << self.universe) => self.contains_mask(m as u32),
            _ => false,
        }
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Replaces the family by its upward closure.
    pub fn close_upward(&mut self) {
        const LOW: [u64; 6] = [
            0x5555_5555_5555_5555,
            0x3333_3333_3333_3333,
            0x0f0f_0f0f_0f0f_0f0f,
            0x00ff_00ff_00ff_00ff,
            0x0000_ffff_0000_ffff,
            0x0000_0000_ffff_ffff,
        ];
        let u = self.universe;
        for (j, &low) in LOW.iter().enumerate().take(u.min(6)) {
            let shift = 1u32 << j;
            for w in self.bits.iter_mut() {
                *w |= (*w & low) << shift;
            }
        }
        if u < 6 {
            // Bits at masks >= 2^u are not part of the family.
            self.bits[0] &= (1u64 << (1u64 << u)) - 1;
        }
        for j in 6..u {
            let stride = 1usize << (j - 6);
            for k in 0..self.bits.len() {
                if k & stride != 0 {
                    self.bits[k] |= self.bits[k ^ stride];
                }
            }
        }
    }

    /// Masks of all members, ascending.
    pub fn masks(&self) -> impl Iterator<Item = u32> + '_ {
        let limit = 1u64 << self.universe;
        self.bits.iter().enumerate().flat_map(move |(w, &bits)| {
            let mut b = bits;
            std::iter::from_fn(move || {
                if b == 0 {
                    return None;
                }
                let t = b.trailing_zeros() as u64;
                b &= b - 1;
                Some(w as u64 * 64 + t)
            })
            .filter(move |&m| m < limit)
            .map(|m| m as u32)
        })
    }

    /// Minimal members; valid for upward-closed families, where a member is
    /// minimal iff removing any single index leaves the family.
    pub fn minimal_of_upward_closed(&self) -> Antichain {
        let sets = self.masks().filter(|&m| {
            let mut rest = m;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                if self.contains_mask(m & !bit) {
                    return false;
                }
                rest &= rest - 1;
            }
            true
        });
        Antichain::from_sets(sets.map(|m| CircuitSet::from_mask(m as u64)))
    }

    pub fn to_family(&self) -> Family {
        self.masks().map(|m| CircuitSet::from_mask(m as u64)).collect()
    }
}

impl fmt::Debug for DenseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseFamily(universe={}, count={})", self.universe, self.count())
    }
}

/// `|{X ⊆ universe : some member of a is ⊆ X}|`, by marking the members in a
/// `2^universe` bitmap and closing upward.
pub fn count_upward_closure(a: &Antichain, universe: usize) -> Result<u64, FamilyError> {
    let mut dense = DenseFamily::empty(universe)?;
    for m in a.iter() {
        match m.as_mask() {
            Some(mask) if mask >> universe == 0 => dense.insert_mask(mask as u32),
            _ => {
                return Err(FamilyError::IndexOutOfUniverse {
                    index: m.last().unwrap_or(0),
                    universe,
                })
            }
        }
    }
    dense.close_upward();
    Ok(dense.count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cs(xs: &[usize]) -> CircuitSet {
        xs.iter().copied().collect()
    }

    fn fam(sets: &[&[usize]]) -> Family {
        sets.iter().map(|s| cs(s)).collect()
    }

    #[test]
    fn circuit_set_words_are_trimmed() {
        let mut a = cs(&[3, 130]);
        a.remove(130);
        assert_eq!(a, cs(&[3]));
        assert_eq!(cs(&[1, 70]).intersection(&cs(&[1])), cs(&[1]));
        assert_eq!(cs(&[64]).last(), Some(64));
        assert!(cs(&[1]).is_subset(&cs(&[1, 200])));
        assert!(!cs(&[1, 200]).is_subset(&cs(&[1])));
    }

    #[test]
    fn canonical_order_spans_words() {
        let mut v = vec![cs(&[70, 71]), cs(&[0, 100]), cs(&[5]), cs(&[0, 64])];
        v.sort();
        assert_eq!(v, vec![cs(&[5]), cs(&[0, 64]), cs(&[0, 100]), cs(&[70, 71])]);
    }

    #[test]
    fn combinations_in_lex_order() {
        let mut seen = Vec::new();
        for_each_combination(&[1, 2, 3, 4], 2, |c| seen.push(c.to_vec()));
        assert_eq!(seen, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
        let mut n = 0;
        for_each_combination(&[1, 2], 0, |_| n += 1);
        assert_eq!(n, 1);
        for_each_combination(&[1, 2], 3, |_| n += 1);
        assert_eq!(n, 1);
    }

    #[test]
    fn minimalize_examples() {
        let a = minimalize(&fam(&[&[1, 2], &[1, 2, 3], &[1, 3]]));
        assert_eq!(a.members(), &[cs(&[1, 2]), cs(&[1, 3])]);
        let again = minimalize(&a.to_family());
        assert_eq!(again, a);
    }

    #[test]
    fn up_contains_examples() {
        let a = Antichain::from_sets([cs(&[0, 1])]);
        assert!(a.up_contains(&cs(&[0, 1, 2])));
        assert!(!a.up_contains(&cs(&[0, 2])));
        assert!(!Antichain::new().up_contains(&cs(&[0])));
    }

    #[test]
    fn epsilon_examples() {
        assert!(epsilon_step(&Family::new()).is_empty());
        let disjoint = fam(&[&[0, 1], &[2, 3], &[4]]);
        assert_eq!(epsilon_step(&disjoint), disjoint);
        let f = fam(&[&[0, 1], &[1, 2]]);
        let e = epsilon_step(&f);
        assert!(e.contains(&cs(&[0, 2])));
        assert_eq!(e.len(), 3);
        // Intersection present in the family blocks the pair.
        let g = fam(&[&[0, 1], &[1, 2], &[1]]);
        assert_eq!(epsilon_step(&g), g);
    }

    #[test]
    fn count_upward_examples() {
        let single = Antichain::from_sets([cs(&[0])]);
        assert_eq!(count_upward_closure(&single, 3).unwrap(), 4);
        assert_eq!(count_upward_closure(&Antichain::new(), 5).unwrap(), 0);
        assert_eq!(
            count_upward_closure(&single, 26),
            Err(FamilyError::UniverseTooLarge { universe: 26, max: 25 })
        );
        let out = Antichain::from_sets([cs(&[7])]);
        assert!(matches!(
            count_upward_closure(&out, 3),
            Err(FamilyError::IndexOutOfUniverse { .. })
        ));
        let empty_set = Antichain::from_sets([CircuitSet::new()]);
        assert_eq!(count_upward_closure(&empty_set, 4).unwrap(), 16);
    }

    #[test]
    fn dense_minimal_and_family() {
        let mut d = DenseFamily::empty(7).unwrap();
        d.insert_mask(0b0000011);
        d.insert_mask(0b1010000);
        d.close_upward();
        assert_eq!(d.count(), 32 + 32 - 8);
        let min = d.minimal_of_upward_closed();
        assert_eq!(min.members(), &[cs(&[0, 1]), cs(&[4, 6])]);
        assert_eq!(d.to_family().len() as u64, d.count());
    }

    #[test]
    fn json_round_trip() {
        let a = Antichain::from_sets([cs(&[0, 2]), cs(&[1])]);
        let j = a.to_json(3);
        assert_eq!(j.sets, vec![vec![1], vec![0, 2]]);
        assert_eq!(Antichain::from_json(&j).unwrap(), a);
        let bad = AntichainJson {
            universe: 2,
            sets: vec![vec![5]],
        };
        assert!(Antichain::from_json(&bad).is_err());
    }

    fn small_family() -> impl Strategy<Value = Family> {
        prop::collection::vec(prop::collection::btree_set(0usize..8, 0..5), 0..10)
            .prop_map(|v| v.into_iter().map(|s| s.into_iter().collect::<CircuitSet>()).collect())
    }

    fn brute_up(f: &Family, x: &CircuitSet) -> bool {
        f.iter().any(|y| y.is_subset(x))
    }

    proptest! {
        #[test]
        fn epsilon_is_extensive(f in small_family()) {
            let e = epsilon_step(&f);
            prop_assert!(e.is_superset_of(&f));
        }

        #[test]
        fn epsilon_matches_naive_pair_loop(f in small_family()) {
            let members = f.sorted();
            let mut naive = f.clone();
            for a in &members {
                for b in &members {
                    let common = a.intersection(b);
                    if f.contains(&common) { continue; }
                    for c in common.iter() {
                        naive.insert(a.union(b).without(c));
                    }
                }
            }
            prop_assert_eq!(epsilon_step(&f), naive);
        }

        #[test]
        fn minimalize_is_idempotent_and_preserves_upsets(
            f in small_family(),
            x in prop::collection::btree_set(0usize..8, 0..8),
        ) {
            let m = minimalize(&f);
            prop_assert_eq!(minimalize(&m.to_family()), m.clone());
            let x: CircuitSet = x.into_iter().collect();
            prop_assert_eq!(m.up_contains(&x), brute_up(&f, &x));
            for a in m.iter() {
                for b in m.iter() {
                    prop_assert!(a == b || !a.is_subset(b));
                }
            }
        }

        #[test]
        fn sizes_at_least_three_are_preserved(f in small_family()) {
            let f: Family = f.iter().filter(|s| s.len() >= 3).cloned().collect();
            prop_assert!(epsilon_step(&f).iter().all(|s| s.len() >= 3));
        }

        #[test]
        fn dense_count_matches_enumeration(f in small_family()) {
            let a = minimalize(&f);
            let expected = (0u64..256)
                .filter(|&m| brute_up(&f, &CircuitSet::from_mask(m)))
                .count() as u64;
            prop_assert_eq!(count_upward_closure(&a, 8).unwrap(), expected);
        }
    }
}

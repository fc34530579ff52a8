//! Matroids presented by their circuits.
//!
//! A [`Matroid`] stores its ground-set size, optional element labels and the
//! circuit list in canonical order (size, then lexicographic). The position of
//! a circuit in that list is its *circuit index*; derived matroids live on
//! those indices.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elemset::{ElemSet, MAX_GROUND};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatroidError {
    #[error("ground set of {n} elements exceeds the limit of {MAX_GROUND}")]
    GroundSetTooLarge { n: usize },
    #[error("element {element} is outside the ground set 0..{n}")]
    ElementOutOfRange { element: usize, n: usize },
    #[error("the empty set is listed as a circuit")]
    EmptyCircuit,
    #[error("circuit {smaller:?} is contained in circuit {larger:?}")]
    ComparableCircuits { smaller: ElemSet, larger: ElemSet },
    #[error(
        "circuit exchange fails for {first:?} and {second:?} at element {element}: \
         no circuit inside their union minus {element}"
    )]
    ExchangeFails {
        first: ElemSet,
        second: ElemSet,
        element: usize,
    },
    #[error("{labels} labels supplied for a ground set of {n} elements")]
    LabelCount { labels: usize, n: usize },
    #[error("{0:?} is not a basis")]
    NotABasis(ElemSet),
    #[error("element {0} already lies in the basis")]
    ElementInBasis(usize),
}

/// A matroid on `{0, .., n-1}` given by its circuits.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatroidJson", into = "MatroidJson")]
pub struct Matroid {
    n: usize,
    labels: Option<Vec<String>>,
    circuits: Vec<ElemSet>,
}

impl Matroid {
    /// Builds a matroid from a circuit list, checking (C1) and (C2), and the
    /// exchange axiom (C3) when `validate_exchange` is set.
    ///
    /// Duplicates are dropped and the list is put in canonical order.
    pub fn from_circuits<I>(n: usize, circuits: I, validate_exchange: bool) -> Result<Self, MatroidError>
    where
        I: IntoIterator<Item = ElemSet>,
    {
        if n > MAX_GROUND {
            return Err(MatroidError::GroundSetTooLarge { n });
        }
        let ground = ElemSet::full(n);
        let mut circuits: Vec<ElemSet> = circuits.into_iter().collect();
        for c in &circuits {
            if c.is_empty() {
                return Err(MatroidError::EmptyCircuit);
            }
            if !c.is_subset(ground) {
                let element = c.difference(ground).min().unwrap();
                return Err(MatroidError::ElementOutOfRange { element, n });
            }
        }
        circuits.sort_by(ElemSet::canonical_cmp);
        circuits.dedup();
        // Sorted by size, so only earlier circuits can be contained in later ones.
        for (j, &larger) in circuits.iter().enumerate() {
            if let Some(&smaller) = circuits[..j].iter().find(|c| c.is_subset(larger)) {
                return Err(MatroidError::ComparableCircuits { smaller, larger });
            }
        }
        let m = Matroid {
            n,
            labels: None,
            circuits,
        };
        if validate_exchange {
            m.check_exchange()?;
        }
        Ok(m)
    }

    /// The matroid on `n` elements with no circuits.
    pub fn free(n: usize) -> Result<Self, MatroidError> {
        Self::from_circuits(n, std::iter::empty(), false)
    }

    pub fn with_labels<S: Into<String>>(
        mut self,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self, MatroidError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != self.n {
            return Err(MatroidError::LabelCount {
                labels: labels.len(),
                n: self.n,
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    fn check_exchange(&self) -> Result<(), MatroidError> {
        for (i, &first) in self.circuits.iter().enumerate() {
            for &second in &self.circuits[i + 1..] {
                let union = first.union(second);
                for element in first.intersection(second) {
                    let target = union.without(element);
                    if !self.circuits.iter().any(|c| c.is_subset(target)) {
                        return Err(MatroidError::ExchangeFails {
                            first,
                            second,
                            element,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn ground_size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ground(&self) -> ElemSet {
        ElemSet::full(self.n)
    }

    #[inline]
    pub fn circuits(&self) -> &[ElemSet] {
        &self.circuits
    }

    #[inline]
    pub fn circuit(&self, index: usize) -> ElemSet {
        self.circuits[index]
    }

    pub fn num_circuits(&self) -> usize {
        self.circuits.len()
    }

    /// Index of `c` in the canonical circuit list.
    pub fn circuit_index(&self, c: ElemSet) -> Option<usize> {
        self.circuits
            .binary_search_by(|probe| probe.canonical_cmp(&c))
            .ok()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of element `e`; falls back to the 1-based position.
    pub fn label(&self, e: usize) -> String {
        match &self.labels {
            Some(l) => l[e].clone(),
            None => (e + 1).to_string(),
        }
    }

    /// Renders a set of elements through the labels: `124` when every label
    /// is a single character, `{1,2,4}` otherwise.
    pub fn format_set(&self, s: ElemSet) -> String {
        let parts: Vec<String> = s.iter().map(|e| self.label(e)).collect();
        if parts.iter().all(|p| p.chars().count() == 1) {
            parts.concat()
        } else {
            format!("{{{}}}", parts.join(","))
        }
    }

    /// Parses a set written in the single-character label style (`"adgh"`).
    pub fn parse_set(&self, text: &str) -> Option<ElemSet> {
        let mut s = ElemSet::EMPTY;
        for ch in text.chars() {
            let e = (0..self.n).find(|&e| {
                let l = self.label(e);
                l.chars().count() == 1 && l.starts_with(ch)
            })?;
            s.insert(e);
        }
        Some(s)
    }

    pub fn is_independent(&self, s: ElemSet) -> bool {
        !self.circuits.iter().any(|c| c.is_subset(s))
    }

    /// Maximal independent subset of `s`, built greedily in ascending order.
    pub fn greedy_basis_of(&self, s: ElemSet) -> ElemSet {
        let mut basis = ElemSet::EMPTY;
        for e in s {
            let candidate = basis.with(e);
            // `basis` is independent, so a new circuit must use `e`.
            if !self
                .circuits
                .iter()
                .any(|c| c.contains(e) && c.is_subset(candidate))
            {
                basis = candidate;
            }
        }
        basis
    }

    pub fn rank_of(&self, s: ElemSet) -> usize {
        self.greedy_basis_of(s).len()
    }

    pub fn nullity_of(&self, s: ElemSet) -> usize {
        s.len() - self.rank_of(s)
    }

    pub fn rank(&self) -> usize {
        self.rank_of(self.ground())
    }

    /// `n(E) = |E| - r(E)`.
    pub fn nullity(&self) -> usize {
        self.n - self.rank()
    }

    pub fn rank_profile(&self) -> RankProfile {
        let rank = self.rank();
        RankProfile {
            rank,
            nullity_of_ground: self.n - rank,
        }
    }

    /// The unique circuit inside `basis ∪ {e}`.
    pub fn fundamental_circuit(&self, basis: ElemSet, e: usize) -> Result<ElemSet, MatroidError> {
        if !basis.is_subset(self.ground()) || !self.is_independent(basis) || basis.len() != self.rank() {
            return Err(MatroidError::NotABasis(basis));
        }
        if e >= self.n {
            return Err(MatroidError::ElementOutOfRange { element: e, n: self.n });
        }
        if basis.contains(e) {
            return Err(MatroidError::ElementInBasis(e));
        }
        let span = basis.with(e);
        let mut inside = self.circuits.iter().filter(|c| c.is_subset(span));
        let c = *inside.next().expect("a basis plus one element contains a circuit");
        assert!(inside.next().is_none(), "fundamental circuit is not unique");
        debug_assert!(c.contains(e));
        Ok(c)
    }

    /// Connected components, ordered by smallest element.
    ///
    /// Elements sharing a circuit are merged; elements in no circuit
    /// (coloops) are singleton blocks.
    pub fn connected_components(&self) -> Vec<ElemSet> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for c in &self.circuits {
            let mut it = c.iter();
            if let Some(first) = it.next() {
                for e in it {
                    let (a, b) = (find(&mut parent, first), find(&mut parent, e));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut blocks: Vec<ElemSet> = Vec::new();
        let mut root_block = vec![usize::MAX; self.n];
        for e in 0..self.n {
            let r = find(&mut parent, e);
            if root_block[r] == usize::MAX {
                root_block[r] = blocks.len();
                blocks.push(ElemSet::EMPTY);
            }
            blocks[root_block[r]].insert(e);
        }
        blocks
    }

    pub fn is_connected(&self) -> bool {
        self.n >= 1 && self.connected_components().len() == 1
    }

    /// Direct sum; elements of `other` are shifted by `self.ground_size()`.
    pub fn direct_sum(&self, other: &Matroid) -> Result<Matroid, MatroidError> {
        let n = self.n + other.n;
        if n > MAX_GROUND {
            return Err(MatroidError::GroundSetTooLarge { n });
        }
        let shifted = other
            .circuits
            .iter()
            .map(|c| ElemSet::from_bits(c.bits() << self.n));
        let m = Matroid::from_circuits(n, self.circuits.iter().copied().chain(shifted), false)?;
        if self.labels.is_none() && other.labels.is_none() {
            return Ok(m);
        }
        let labels: Vec<String> = (0..self.n)
            .map(|e| self.label(e))
            .chain((0..other.n).map(|e| match &other.labels {
                Some(l) => l[e].clone(),
                None => (self.n + e + 1).to_string(),
            }))
            .collect();
        m.with_labels(labels)
    }

    /// The circuit list as sorted index vectors.
    pub fn circuit_lists(&self) -> Vec<Vec<usize>> {
        self.circuits.iter().map(|c| c.iter().collect()).collect()
    }

    /// Equality of ground size and circuit sets, ignoring labels.
    pub fn same_circuits(&self, other: &Matroid) -> bool {
        self.n == other.n && self.circuits == other.circuits
    }
}

impl fmt::Debug for Matroid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let circuits: Vec<String> = self.circuits.iter().map(|&c| self.format_set(c)).collect();
        f.debug_struct("Matroid")
            .field("n", &self.n)
            .field("circuits", &circuits)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankProfile {
    pub rank: usize,
    pub nullity_of_ground: usize,
}

/// On-disk form: `{"n": int, "labels": [str]?, "circuits": [[int]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatroidJson {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub circuits: Vec<Vec<usize>>,
}

impl TryFrom<MatroidJson> for Matroid {
    type Error = MatroidError;

    fn try_from(j: MatroidJson) -> Result<Self, MatroidError> {
        if j.n > MAX_GROUND {
            return Err(MatroidError::GroundSetTooLarge { n: j.n });
        }
        let mut circuits = Vec::with_capacity(j.circuits.len());
        for c in &j.circuits {
            if let Some(&element) = c.iter().find(|&&e| e >= j.n) {
                return Err(MatroidError::ElementOutOfRange { element, n: j.n });
            }
            circuits.push(c.iter().collect::<ElemSet>());
        }
        let m = Matroid::from_circuits(j.n, circuits, false)?;
        match j.labels {
            Some(labels) => m.with_labels(labels),
            None => Ok(m),
        }
    }
}

impl From<Matroid> for MatroidJson {
    fn from(m: Matroid) -> Self {
        MatroidJson {
            n: m.n,
            circuits: m.circuit_lists(),
            labels: m.labels,
        }
    }
}

/// Nullity lookups for repeated queries on one matroid.
///
/// Small ground sets get a full `2^n` table; larger ones fall back to the
/// greedy rank.
pub struct NullityOracle<'a> {
    matroid: &'a Matroid,
    table: Option<Vec<u8>>,
}

/// Ground sets up to this size get a precomputed nullity table.
const NULLITY_TABLE_MAX: usize = 20;

impl<'a> NullityOracle<'a> {
    pub fn new(matroid: &'a Matroid) -> Self {
        let n = matroid.ground_size();
        let table = (n <= NULLITY_TABLE_MAX).then(|| {
            let mut by_max: Vec<Vec<ElemSet>> = vec![Vec::new(); n];
            for &c in matroid.circuits() {
                for e in c {
                    by_max[e].push(c);
                }
            }
            let mut t = vec![0u8; 1usize << n];
            for s in 1usize..(1 << n) {
                let top = 63 - (s as u64).leading_zeros() as usize;
                let rest = s & !(1 << top);
                let set = ElemSet::from_bits(s as u64);
                // n(S) = n(S - e) + [e lies on a circuit inside S].
                let closes = by_max[top].iter().any(|c| c.is_subset(set));
                t[s] = t[rest] + closes as u8;
            }
            t
        });
        NullityOracle { matroid, table }
    }

    #[inline]
    pub fn nullity(&self, s: ElemSet) -> usize {
        match &self.table {
            Some(t) => t[s.bits() as usize] as usize,
            None => self.matroid.nullity_of(s),
        }
    }

    pub fn matroid(&self) -> &Matroid {
        self.matroid
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn set(xs: &[usize]) -> ElemSet {
        xs.iter().collect()
    }

    fn k4() -> Matroid {
        generators::k4()
    }

    #[test]
    fn uniform_2_4_passes_axioms() {
        let circuits = (0..4usize).map(|skip| (0..4).filter(|&e| e != skip).collect::<ElemSet>());
        let m = Matroid::from_circuits(4, circuits, true).unwrap();
        assert_eq!(m.num_circuits(), 4);
        assert!(m.is_independent(set(&[0, 1])));
        assert_eq!(m.greedy_basis_of(m.ground()), set(&[0, 1]));
        assert_eq!(m.rank(), 2);
        assert_eq!(m.fundamental_circuit(set(&[0, 1]), 2).unwrap(), set(&[0, 1, 2]));
    }

    #[test]
    fn comparable_circuits_rejected() {
        let err = Matroid::from_circuits(3, [set(&[0]), set(&[0, 1])], false).unwrap_err();
        assert_eq!(
            err,
            MatroidError::ComparableCircuits {
                smaller: set(&[0]),
                larger: set(&[0, 1])
            }
        );
    }

    #[test]
    fn empty_circuit_rejected() {
        let err = Matroid::from_circuits(3, [ElemSet::EMPTY], false).unwrap_err();
        assert_eq!(err, MatroidError::EmptyCircuit);
    }

    #[test]
    fn out_of_range_rejected() {
        let err = Matroid::from_circuits(3, [set(&[1, 5])], false).unwrap_err();
        assert_eq!(err, MatroidError::ElementOutOfRange { element: 5, n: 3 });
        assert!(matches!(
            Matroid::free(65),
            Err(MatroidError::GroundSetTooLarge { n: 65 })
        ));
    }

    #[test]
    fn exchange_failure_has_witness() {
        // {0,1} and {1,2} share 1 but nothing sits inside {0,2}.
        let err = Matroid::from_circuits(3, [set(&[0, 1]), set(&[1, 2])], true).unwrap_err();
        assert_eq!(
            err,
            MatroidError::ExchangeFails {
                first: set(&[0, 1]),
                second: set(&[1, 2]),
                element: 1
            }
        );
    }

    #[test]
    fn duplicates_are_dropped_and_order_is_canonical() {
        let m = Matroid::from_circuits(4, [set(&[1, 2, 3]), set(&[0, 1]), set(&[0, 1])], false).unwrap();
        assert_eq!(m.circuits(), &[set(&[0, 1]), set(&[1, 2, 3])]);
        assert_eq!(m.circuit_index(set(&[1, 2, 3])), Some(1));
        assert_eq!(m.circuit_index(set(&[2, 3])), None);
    }

    #[test]
    fn k4_rank_and_fundamental_circuit() {
        let m = k4();
        assert_eq!(m.greedy_basis_of(m.ground()).len(), 3);
        assert_eq!(m.nullity(), 3);
        // B = {ab, ac, ad} = elements 1,2,3 (0-based 0,1,2); e = bc (0-based 3).
        let c = m.fundamental_circuit(set(&[0, 1, 2]), 3).unwrap();
        assert_eq!(m.format_set(c), "124");
        for s in m.ground().subsets().filter(|s| s.len() == 5) {
            assert!(m.nullity_of(s) <= 2);
        }
    }

    #[test]
    fn fundamental_circuit_errors() {
        let m = k4();
        assert_eq!(
            m.fundamental_circuit(set(&[0, 1, 2]), 0),
            Err(MatroidError::ElementInBasis(0))
        );
        assert_eq!(
            m.fundamental_circuit(set(&[0, 1, 3]), 4),
            Err(MatroidError::NotABasis(set(&[0, 1, 3])))
        );
        assert_eq!(
            m.fundamental_circuit(set(&[0, 1]), 4),
            Err(MatroidError::NotABasis(set(&[0, 1])))
        );
    }

    #[test]
    fn components() {
        assert_eq!(k4().connected_components().len(), 1);
        assert!(k4().is_connected());
        let u12 = Matroid::from_circuits(2, [set(&[0, 1])], false).unwrap();
        let sum = u12.direct_sum(&u12).unwrap();
        assert_eq!(sum.circuits(), &[set(&[0, 1]), set(&[2, 3])]);
        assert_eq!(sum.connected_components(), vec![set(&[0, 1]), set(&[2, 3])]);
        let free = Matroid::free(3).unwrap();
        assert_eq!(free.connected_components().len(), 3);
        assert!(!Matroid::free(0).unwrap().is_connected());
    }

    #[test]
    fn free_summand_keeps_circuits() {
        let m = k4();
        let sum = m.direct_sum(&Matroid::free(2).unwrap()).unwrap();
        assert_eq!(sum.ground_size(), 8);
        assert_eq!(sum.circuits(), m.circuits());
        assert_eq!(sum.label(7), "8");
    }

    #[test]
    fn direct_sum_too_large() {
        let a = Matroid::free(40).unwrap();
        assert_eq!(a.direct_sum(&a), Err(MatroidError::GroundSetTooLarge { n: 80 }));
    }

    #[test]
    fn nullity_table_matches_greedy() {
        let m = generators::vamos();
        let oracle = NullityOracle::new(&m);
        for s in m.ground().subsets() {
            assert_eq!(oracle.nullity(s), m.nullity_of(s), "{s:?}");
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m = generators::vamos();
        let text = serde_json::to_string(&m).unwrap();
        let back: Matroid = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"n": 3, "circuits": [[0], [0, 1]]}"#;
        let err = serde_json::from_str::<Matroid>(bad).unwrap_err();
        assert!(err.to_string().contains("contained in"), "{err}");
    }
}

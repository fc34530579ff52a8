//! The combinatorial derived matroid.
//!
//! Three engines compute the circuits of δM:
//!
//! * [`derive_circuits`] iterates minimal families `E₀ = min A₀`,
//!   `E_{i+1} = min ε(E_i)` and is the production path;
//! * [`b_sequence`] iterates `B_{i+1} = ε(B_i)` without minimizing;
//! * [`derive_dependents_explicit`] materializes `A_{i+1} = ↑ε(A_i)` as a
//!   bitmap over all subsets of circuits.
//!
//! All three rely on one fact about `A₀ = {A : |A| > n(supp A)}`: a set with
//! more than `n(M)` members lies in `A₀`, because no nullity exceeds `n(M)`.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elemset::ElemSet;
use crate::families::{
    epsilon_step, index_by_element, Antichain, CircuitSet, DenseFamily, Family, FamilyError, MAX_DENSE_UNIVERSE,
    MAX_UNIVERSE,
};
use crate::matroid::{Matroid, MatroidError, NullityOracle};

/// Default cap on the number of circuit subsets enumerated for `A₀`.
pub const DEFAULT_SUBSET_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivedError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("enumeration needs {needed} subsets, above the budget of {budget}")]
    CombinatorialBudgetExceeded { needed: u64, budget: u64 },
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error("invalid derived result: {0}")]
    Malformed(String),
}

/// Bounds on a derivation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Number of `ε` steps allowed before giving up on a fixpoint.
    pub max_iterations: usize,
    /// Largest set size admitted; `None` means `n(M) + 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_set_size: Option<usize>,
    /// Cap on enumerated circuit subsets (and on family sizes for the
    /// un-minimized sequence).
    pub subset_budget: u64,
    /// Record wall time per iteration in the trace.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub record_timing: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_iterations: 32,
            max_set_size: None,
            subset_budget: DEFAULT_SUBSET_BUDGET,
            record_timing: false,
        }
    }
}

impl Limits {
    pub fn set_size_cap(&self, m: &Matroid) -> usize {
        self.max_set_size.unwrap_or(m.nullity() + 2)
    }
}

/// Support of a set of circuits: the union of its members.
pub fn support(m: &Matroid, a: &CircuitSet) -> ElemSet {
    a.iter().fold(ElemSet::EMPTY, |s, i| s.union(m.circuit(i)))
}

/// `|A| > n(supp A)`.
pub fn in_a0(m: &Matroid, a: &CircuitSet) -> bool {
    a.len() > m.nullity_of(support(m, a))
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn subsets_up_to(universe: usize, max_size: usize) -> u64 {
    (1..=max_size.min(universe)).fold(0u64, |acc, k| acc.saturating_add(binomial(universe, k)))
}

fn check_universe(m: &Matroid) -> Result<usize, DerivedError> {
    let u = m.num_circuits();
    if u > MAX_UNIVERSE {
        return Err(FamilyError::UniverseTooLarge {
            universe: u,
            max: MAX_UNIVERSE,
        }
        .into());
    }
    Ok(u)
}

/// Maps `visit` over every `k`-subset of `0..universe` in lexicographic order,
/// in parallel over the smallest element, keeping the `Some` results in order.
fn par_k_subsets<T: Send>(
    universe: usize,
    k: usize,
    visit: impl Fn(&[usize]) -> Option<T> + Sync,
) -> Vec<T> {
    if k == 0 || k > universe {
        return Vec::new();
    }
    (0..=universe - k)
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut out = Vec::new();
            let mut combo = Vec::with_capacity(k);
            combo.push(first);
            let rest: Vec<usize> = (first + 1..universe).collect();
            crate::families::for_each_combination(&rest, k - 1, |tail| {
                combo.truncate(1);
                combo.extend_from_slice(tail);
                if let Some(t) = visit(&combo) {
                    out.push(t);
                }
            });
            out
        })
        .collect()
}

/// The inclusion-minimal members of `A₀`.
///
/// Minimal members have at most `n(M) + 1` elements, so only subsets up to
/// that size are enumerated, level by level.
pub fn a0_minimal(m: &Matroid, subset_budget: u64) -> Result<Antichain, DerivedError> {
    let u = check_universe(m)?;
    let top = m.nullity() + 1;
    let needed = subsets_up_to(u, top);
    if needed > subset_budget {
        return Err(DerivedError::CombinatorialBudgetExceeded {
            needed,
            budget: subset_budget,
        });
    }
    let oracle = NullityOracle::new(m);
    let circuits = m.circuits();
    let mut found = Antichain::new();
    for k in 1..=top.min(u) {
        let level = par_k_subsets(u, k, |combo| {
            let supp = combo.iter().fold(ElemSet::EMPTY, |s, &i| s.union(circuits[i]));
            if k <= oracle.nullity(supp) {
                return None;
            }
            let set = CircuitSet::from_indices(combo.iter().copied());
            (!found.up_contains(&set)).then_some(set)
        });
        found.push_level(level);
    }
    Ok(found)
}

/// How a circuit of δM was produced: `(first ∪ second) \ {removed}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Witness {
    pub first: CircuitSet,
    pub second: CircuitSet,
    pub removed: usize,
}

impl Witness {
    pub fn result(&self) -> CircuitSet {
        self.first.union(&self.second).without(self.removed)
    }
}

/// One entry per family `E_i` visited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `|E_i|`.
    pub size: usize,
    /// Members of `E_i` not present in `E_{i-1}`.
    pub new_sets: usize,
    /// Members of `E_{i-1}` displaced by a smaller new set.
    pub displaced: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationTrace {
    pub iterations: Vec<IterationRecord>,
    pub max_iterations: usize,
    pub max_set_size: usize,
    pub subset_budget: u64,
    /// Whether `E_{i+1} = E_i` was reached.
    pub fixpoint: bool,
    /// Why the run stopped short of a fixpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_reached: Option<String>,
}

/// Output of [`derive_circuits`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedResult {
    pub base: Matroid,
    /// Circuits of δM (or those known so far when incomplete), canonical.
    pub circuits: Antichain,
    /// Depth of each circuit, parallel to `circuits`.
    pub depths: Vec<usize>,
    /// Construction witness of each circuit of positive depth.
    pub witnesses: Vec<Option<Witness>>,
    pub trace: DerivationTrace,
    pub complete: bool,
}

/// Three-valued answer to a dependence query against a possibly partial run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dependence {
    Dependent,
    Independent,
    Unknown,
}

impl DerivedResult {
    /// Number of elements of δM, which is the number of circuits of M.
    pub fn universe(&self) -> usize {
        self.base.num_circuits()
    }

    /// δM as a [`Matroid`] labelled by the base circuits; needs at most 64
    /// circuits in the base.
    pub fn delta(&self) -> Result<Matroid, MatroidError> {
        let n = self.universe();
        let circuits: Vec<ElemSet> = self
            .circuits
            .iter()
            .map(|c| c.iter().collect::<ElemSet>())
            .collect();
        Matroid::from_circuits(n, circuits, false)?.with_labels(self.circuit_labels())
    }

    /// Base circuits rendered through the base labels, in index order.
    pub fn circuit_labels(&self) -> Vec<String> {
        self.base.circuits().iter().map(|&c| self.base.format_set(c)).collect()
    }

    pub fn is_dependent(&self, a: &CircuitSet) -> Dependence {
        is_dependent_in_derived(self, a)
    }

    pub fn depth_of(&self, a: &CircuitSet) -> Option<usize> {
        self.circuits
            .members()
            .binary_search(a)
            .ok()
            .map(|i| self.depths[i])
    }

    pub fn size_histogram(&self) -> Vec<(usize, usize)> {
        self.circuits.size_histogram()
    }

    pub fn to_json(&self) -> DerivedResultJson {
        DerivedResultJson {
            base: self.base.clone(),
            delta: DeltaJson {
                n: self.universe(),
                labels: Some(self.circuit_labels()),
                circuits: self.circuits.iter().map(CircuitSet::to_vec).collect(),
            },
            depths: self.depths.clone(),
            witnesses: self
                .witnesses
                .iter()
                .map(|w| {
                    w.as_ref().map(|w| WitnessJson {
                        first: w.first.to_vec(),
                        second: w.second.to_vec(),
                        removed: w.removed,
                    })
                })
                .collect(),
            trace: self.trace.clone(),
            complete: self.complete,
        }
    }
}

/// δM in Matroid-JSON shape (`n`, `labels`, `circuits`) so that results
/// with at most 64 circuits can be fed back as matroids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaJson {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub circuits: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivedResultJson {
    pub base: Matroid,
    pub delta: DeltaJson,
    pub depths: Vec<usize>,
    pub witnesses: Vec<Option<WitnessJson>>,
    pub trace: DerivationTrace,
    pub complete: bool,
}

impl TryFrom<DerivedResultJson> for DerivedResult {
    type Error = DerivedError;

    fn try_from(j: DerivedResultJson) -> Result<Self, DerivedError> {
        let u = j.base.num_circuits();
        if j.delta.n != u {
            return Err(DerivedError::Malformed(format!(
                "delta has {} elements but the base has {u} circuits",
                j.delta.n
            )));
        }
        let len = j.delta.circuits.len();
        if j.depths.len() != len || j.witnesses.len() != len {
            return Err(DerivedError::Malformed(
                "depths and witnesses must parallel the circuit list".into(),
            ));
        }
        let to_set = |v: &[usize]| -> Result<CircuitSet, DerivedError> {
            if let Some(&index) = v.iter().find(|&&i| i >= u) {
                return Err(FamilyError::IndexOutOfUniverse { index, universe: u }.into());
            }
            Ok(v.iter().copied().collect())
        };
        let mut rows = Vec::with_capacity(len);
        for ((c, d), w) in j.delta.circuits.iter().zip(&j.depths).zip(&j.witnesses) {
            let witness = match w {
                Some(w) => Some(Witness {
                    first: to_set(&w.first)?,
                    second: to_set(&w.second)?,
                    removed: w.removed,
                }),
                None => None,
            };
            rows.push((to_set(c)?, *d, witness));
        }
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let circuits = Antichain::from_sets(rows.iter().map(|r| r.0.clone()));
        if circuits.len() != rows.len() {
            return Err(DerivedError::Malformed("delta circuits do not form an antichain".into()));
        }
        let (depths, witnesses) = rows.into_iter().map(|(_, d, w)| (d, w)).unzip();
        Ok(DerivedResult {
            base: j.base,
            circuits,
            depths,
            witnesses,
            trace: j.trace,
            complete: j.complete,
        })
    }
}

impl Serialize for DerivedResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DerivedResult {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = DerivedResultJson::deserialize(d)?;
        DerivedResult::try_from(j).map_err(serde::de::Error::custom)
    }
}

struct Candidate {
    set: CircuitSet,
    first: usize,
    second: usize,
    removed: usize,
}

/// One `min ε` step on an antichain `e`.
///
/// Returns the new minimal sets with a witness each, in canonical order.
/// Members of `e` larger than `n(M)` are skipped as generators and results
/// larger than `n(M)` are dropped: both lie above `A₀ ⊆ ↑e` already.
fn min_epsilon_new(e: &Antichain, null_bound: usize) -> Vec<(CircuitSet, Witness)> {
    let members = e.members();
    let generators: Vec<usize> = (0..members.len()).filter(|&i| members[i].len() <= null_bound).collect();
    let gen_sets: Vec<CircuitSet> = generators.iter().map(|&i| members[i].clone()).collect();
    let index = index_by_element(&gen_sets);

    let mut found: Vec<Candidate> = (0..gen_sets.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            let first = &gen_sets[a];
            let mut out = Vec::new();
            for c in first.iter() {
                for &b in &index[&c] {
                    if b <= a {
                        continue;
                    }
                    let second = &gen_sets[b];
                    let shared = first.intersection_len(second);
                    if first.len() + second.len() - shared - 1 > null_bound {
                        continue;
                    }
                    let common = first.intersection(second);
                    if common.first() != Some(c) || e.contains(&common) {
                        continue;
                    }
                    let union = first.union(second);
                    for removed in common.iter() {
                        let set = union.without(removed);
                        if !e.up_contains(&set) {
                            out.push(Candidate {
                                set,
                                first: generators[a],
                                second: generators[b],
                                removed,
                            });
                        }
                    }
                }
            }
            out
        })
        .collect();

    found.par_sort_unstable_by(|x, y| {
        x.set
            .cmp(&y.set)
            .then(x.first.cmp(&y.first))
            .then(x.second.cmp(&y.second))
            .then(x.removed.cmp(&y.removed))
    });
    found.dedup_by(|later, earlier| later.set == earlier.set);

    let minimal = Antichain::from_sets(found.iter().map(|c| c.set.clone()));
    found
        .into_iter()
        .filter(|c| minimal.contains(&c.set))
        .map(|c| {
            let w = Witness {
                first: members[c.first].clone(),
                second: members[c.second].clone(),
                removed: c.removed,
            };
            (c.set, w)
        })
        .collect()
}

/// Circuits of δM by iterating `E₀ = min A₀`, `E_{i+1} = min ε(E_i)` to a
/// fixpoint, within `limits`.
///
/// Running out of iterations, or meeting a set above the size cap, is not
/// an error: the result comes back with `complete == false`.
pub fn derive_circuits(m: &Matroid, limits: &Limits) -> Result<DerivedResult, DerivedError> {
    let null_bound = m.nullity();
    let cap = limits.set_size_cap(m);
    let clock = Instant::now();
    let elapsed = |since: Instant| limits.record_timing.then(|| since.elapsed().as_millis() as u64);

    let mut current = a0_minimal(m, limits.subset_budget)?;
    let mut info: FxHashMap<CircuitSet, (usize, Option<Witness>)> =
        current.iter().map(|s| (s.clone(), (0, None))).collect();
    let mut trace = DerivationTrace {
        iterations: vec![IterationRecord {
            iteration: 0,
            size: current.len(),
            new_sets: current.len(),
            displaced: 0,
            wall_ms: elapsed(clock),
        }],
        max_iterations: limits.max_iterations,
        max_set_size: cap,
        subset_budget: limits.subset_budget,
        fixpoint: false,
        limit_reached: None,
    };
    if let Some(big) = current.iter().find(|s| s.len() > cap) {
        trace.limit_reached = Some(format!("a set of size {} exceeds the size cap {cap}", big.len()));
    }

    let mut step = 0;
    while trace.limit_reached.is_none() {
        if step == limits.max_iterations {
            trace.limit_reached = Some(format!("iteration limit {} reached", limits.max_iterations));
            break;
        }
        let started = Instant::now();
        let new = min_epsilon_new(&current, null_bound);
        if new.is_empty() {
            trace.fixpoint = true;
            break;
        }
        step += 1;
        let fresh = Antichain::from_sorted_antichain(new.iter().map(|(s, _)| s.clone()).collect());
        let (kept, displaced): (Vec<CircuitSet>, Vec<CircuitSet>) = current
            .members()
            .par_iter()
            .cloned()
            .partition(|s| !fresh.up_contains(s));
        for s in &displaced {
            info.remove(s);
        }
        if let Some((big, _)) = new.iter().find(|(s, _)| s.len() > cap) {
            trace.limit_reached = Some(format!("a set of size {} exceeds the size cap {cap}", big.len()));
        }
        let new_count = new.len();
        for (s, w) in new {
            info.insert(s, (step, Some(w)));
        }
        let mut merged = kept;
        merged.extend(fresh.members().iter().cloned());
        merged.par_sort_unstable();
        current = Antichain::from_sorted_antichain(merged);
        trace.iterations.push(IterationRecord {
            iteration: step,
            size: current.len(),
            new_sets: new_count,
            displaced: displaced.len(),
            wall_ms: elapsed(started),
        });
    }

    let mut depths = Vec::with_capacity(current.len());
    let mut witnesses = Vec::with_capacity(current.len());
    for s in current.iter() {
        let (d, w) = info.remove(s).expect("every member has a record");
        depths.push(d);
        witnesses.push(w);
    }
    Ok(DerivedResult {
        base: m.clone(),
        circuits: current,
        depths,
        witnesses,
        complete: trace.fixpoint,
        trace,
    })
}

/// `dependent` iff some known circuit lies inside `a`; `independent` only for
/// complete runs.
pub fn is_dependent_in_derived(r: &DerivedResult, a: &CircuitSet) -> Dependence {
    if r.circuits.up_contains(a) {
        Dependence::Dependent
    } else if r.complete {
        Dependence::Independent
    } else {
        Dependence::Unknown
    }
}

/// Result of the bitmap engine.
#[derive(Debug, Clone)]
pub struct ExplicitDerivation {
    /// `A₀` itself (not upward closed in general).
    pub a0: DenseFamily,
    /// The fixed point `A`: all dependent sets of δM.
    pub dependents: DenseFamily,
    /// Number of `↑ε` steps that changed the family.
    pub steps: usize,
}

impl ExplicitDerivation {
    pub fn circuits(&self) -> Antichain {
        self.dependents.minimal_of_upward_closed()
    }
}

/// Splits the support computation of a circuit mask into two table lookups.
struct SupportTable {
    low_bits: u32,
    low: Vec<u64>,
    high: Vec<u64>,
}

impl SupportTable {
    fn new(circuits: &[ElemSet]) -> Self {
        let u = circuits.len();
        let low_bits = (u / 2) as u32;
        let table = |offset: usize, bits: usize| {
            let mut t = vec![0u64; 1 << bits];
            for mask in 1usize..(1 << bits) {
                let low = mask.trailing_zeros() as usize;
                t[mask] = t[mask & (mask - 1)] | circuits[offset + low].bits();
            }
            t
        };
        SupportTable {
            low_bits,
            low: table(0, low_bits as usize),
            high: table(low_bits as usize, u - low_bits as usize),
        }
    }

    #[inline]
    fn get(&self, mask: u32) -> ElemSet {
        let lo = mask & ((1u32 << self.low_bits) - 1);
        let hi = mask >> self.low_bits;
        ElemSet::from_bits(self.low[lo as usize] | self.high[hi as usize])
    }
}

/// The dependent sets of δM, by iterating `A_{i+1} = ↑ε(A_i)` from `A₀` over
/// a `2^|C|` bitmap.
pub fn derive_dependents_explicit(m: &Matroid) -> Result<ExplicitDerivation, DerivedError> {
    let u = m.num_circuits();
    if u > MAX_DENSE_UNIVERSE {
        return Err(FamilyError::UniverseTooLarge {
            universe: u,
            max: MAX_DENSE_UNIVERSE,
        }
        .into());
    }
    let oracle = NullityOracle::new(m);
    let supports = SupportTable::new(m.circuits());
    let a0 = DenseFamily::from_predicate(u, |mask| mask.count_ones() as usize > oracle.nullity(supports.get(mask)))?;

    let null_bound = m.nullity();
    let mut family = a0.clone();
    let mut steps = 0;
    loop {
        let mut closed = family.clone();
        closed.close_upward();
        let fresh = explicit_new_sets(&family, &closed, null_bound);
        for &x in &fresh {
            closed.insert_mask(x);
        }
        closed.close_upward();
        if closed == family {
            break;
        }
        if !fresh.is_empty() {
            steps += 1;
        }
        family = closed;
    }
    Ok(ExplicitDerivation {
        a0,
        dependents: family,
        steps,
    })
}

/// Sets `X ∉ closed` produced by `ε(family)`.
///
/// `X` arises iff for some `C ∉ X` the set `X ∪ {C}` splits as `A₁ ∪ A₂` with
/// `C ∈ A₁ ∩ A₂`, both in the family and `A₁ ∩ A₂` not. Writing
/// `A₁ = P + C`, `A₂ = Q + C` with `P ∪ Q = X`, each element of `X` goes to
/// `P`, `Q` or both.
fn explicit_new_sets(family: &DenseFamily, closed: &DenseFamily, null_bound: usize) -> Vec<u32> {
    let u = family.universe();
    let full: u32 = if u == 32 { u32::MAX } else { (1u32 << u) - 1 };
    let candidates: Vec<u32> = (0..=full)
        .into_par_iter()
        .filter(|&x| x.count_ones() as usize <= null_bound && !closed.contains_mask(x))
        .collect();
    candidates
        .into_par_iter()
        .filter(|&x| {
            let elems: Vec<u32> = (0..u as u32).filter(|b| x >> b & 1 == 1).collect();
            let ways = 3u64.pow(elems.len() as u32);
            let mut rest = full & !x;
            while rest != 0 {
                let c = rest & rest.wrapping_neg();
                rest &= rest - 1;
                for code in 0..ways {
                    let (mut p, mut q, mut t) = (0u32, 0u32, code);
                    for &e in &elems {
                        match t % 3 {
                            0 => p |= 1 << e,
                            1 => q |= 1 << e,
                            _ => {
                                p |= 1 << e;
                                q |= 1 << e;
                            }
                        }
                        t /= 3;
                    }
                    if family.contains_mask(p | c)
                        && family.contains_mask(q | c)
                        && !family.contains_mask((p & q) | c)
                    {
                        return true;
                    }
                }
            }
            false
        })
        .collect()
}

/// `min ⋃ B_i` with `B₀ = A₀` and `B_{i+1} = ε(B_i)`, iterating from `i = 0`.
///
/// Sets larger than `n(M) + 1` are left out of every `B_i`: they lie above
/// an `A₀` member of size `n(M) + 1`, and `ε` never builds a smaller set from
/// them, so the minimal sets are unaffected.
pub fn b_sequence(m: &Matroid, limits: &Limits) -> Result<Antichain, DerivedError> {
    let u = check_universe(m)?;
    let top = m.nullity() + 1;
    let budget = limits.subset_budget;
    let needed = subsets_up_to(u, top);
    if needed > budget {
        return Err(DerivedError::CombinatorialBudgetExceeded { needed, budget });
    }
    let circuits = m.circuits();
    let oracle = NullityOracle::new(m);
    let mut b: Family = Family::new();
    for k in 1..=top.min(u) {
        for s in par_k_subsets(u, k, |combo| {
            let supp = combo.iter().fold(ElemSet::EMPTY, |s, &i| s.union(circuits[i]));
            (k > oracle.nullity(supp)).then(|| CircuitSet::from_indices(combo.iter().copied()))
        }) {
            b.insert(s);
        }
    }
    for _ in 0..limits.max_iterations.max(1) * 64 {
        let next: Family = epsilon_step(&b).iter().filter(|s| s.len() <= top).cloned().collect();
        if next.len() as u64 > budget {
            return Err(DerivedError::CombinatorialBudgetExceeded {
                needed: next.len() as u64,
                budget,
            });
        }
        // ε only adds, so equal sizes mean a fixpoint.
        if next.len() == b.len() {
            return Ok(Antichain::from_sets(b.iter().cloned()));
        }
        b = next;
    }
    Err(DerivedError::CombinatorialBudgetExceeded {
        needed: b.len() as u64,
        budget,
    })
}

/// Summary figures for a derivation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedStats {
    pub universe: usize,
    pub circuits: usize,
    pub size_histogram: Vec<(usize, usize)>,
    pub depth_histogram: Vec<(usize, usize)>,
    /// Greedy rank of δM from its known circuits.
    pub rank: usize,
    /// `|E| - r(M)`, the bound on the rank of δM.
    pub rank_bound: usize,
    pub connected: bool,
    /// Elements of δM lying on no 3-element circuit.
    pub elements_without_triangle: Vec<usize>,
    pub complete: bool,
}

pub fn derived_stats(r: &DerivedResult) -> DerivedStats {
    let u = r.universe();
    let mut depth: BTreeMap<usize, usize> = BTreeMap::new();
    for &d in &r.depths {
        *depth.entry(d).or_default() += 1;
    }

    let mut basis = CircuitSet::new();
    for e in 0..u {
        let with = basis.with(e);
        if !r.circuits.up_contains(&with) {
            basis = with;
        }
    }

    let mut parent: Vec<usize> = (0..u).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for c in r.circuits.iter() {
        let mut it = c.iter();
        if let Some(first) = it.next() {
            for other in it {
                let (a, b) = (root(&mut parent, first), root(&mut parent, other));
                parent[a] = b;
            }
        }
    }
    let roots: FxHashSet<usize> = (0..u).map(|x| root(&mut parent, x)).collect();

    let mut on_triangle = vec![false; u];
    for c in r.circuits.iter().filter(|c| c.len() == 3) {
        for e in c.iter() {
            on_triangle[e] = true;
        }
    }

    DerivedStats {
        universe: u,
        circuits: r.circuits.len(),
        size_histogram: r.size_histogram(),
        depth_histogram: depth.into_iter().collect(),
        rank: basis.len(),
        rank_bound: r.base.nullity(),
        connected: u >= 1 && roots.len() == 1,
        elements_without_triangle: (0..u).filter(|&e| !on_triangle[e]).collect(),
        complete: r.complete,
    }
}

/// Outcome of testing the hanging-element lemma on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HangingCheck {
    /// `S ∈ A₀`, `C ∈ S`, or `C ⊆ supp S`: the lemma says nothing.
    NotApplicable,
    /// Hypotheses hold and `S ∪ {C} ∉ A₀`.
    Holds,
    /// Hypotheses hold but `S ∪ {C} ∈ A₀`.
    Violated,
}

/// If `S ∉ A₀` and circuit `c` has an element outside `supp S`, then
/// `S ∪ {c} ∉ A₀`.
pub fn hanging_extension_check(m: &Matroid, s: &CircuitSet, c: usize) -> HangingCheck {
    if s.contains(c) || in_a0(m, s) || m.circuit(c).is_subset(support(m, s)) {
        return HangingCheck::NotApplicable;
    }
    if in_a0(m, &s.with(c)) {
        HangingCheck::Violated
    } else {
        HangingCheck::Holds
    }
}

/// Sets `(A₁ ∪ A₂) \ {C}` produced from one class of pairs of `A₀` members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairClass {
    /// Sizes of the two generating sets, smaller first.
    pub first_size: usize,
    pub second_size: usize,
    /// Size of the produced sets.
    pub result_size: usize,
    /// Distinct produced sets.
    pub raw: usize,
    /// Produced sets outside `A₀`, i.e. members of `ε(A₀) \ A₀`.
    pub outside_a0: usize,
    /// Raw count by support size.
    pub support_histogram: Vec<(usize, usize)>,
    /// Per support size, how often each complement of the support occurs
    /// (complements rendered through the element labels).
    pub avoided: BTreeMap<usize, BTreeMap<String, usize>>,
}

/// Breakdown of the first `ε` step on `A₀`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaA0Report {
    /// `A₀` members of each size up to `n(M)`.
    pub a0_by_size: Vec<(usize, usize)>,
    /// `|ε(A₀) \ A₀|`.
    pub new_sets: usize,
    pub new_support_histogram: Vec<(usize, usize)>,
    pub classes: Vec<PairClass>,
}

/// Splits `ε(A₀)` by the sizes of the generating pair.
///
/// Only `A₀` members of size at most `n(M)` can produce a set outside `A₀`,
/// so the enumeration stops there.
pub fn delta_a0_breakdown(m: &Matroid, subset_budget: u64) -> Result<DeltaA0Report, DerivedError> {
    let u = check_universe(m)?;
    let null_bound = m.nullity();
    let needed = subsets_up_to(u, null_bound);
    if needed > subset_budget {
        return Err(DerivedError::CombinatorialBudgetExceeded {
            needed,
            budget: subset_budget,
        });
    }
    let circuits = m.circuits();
    let oracle = NullityOracle::new(m);
    let supp_of = |s: &CircuitSet| s.iter().fold(ElemSet::EMPTY, |acc, i| acc.union(circuits[i]));
    let member = |s: &CircuitSet| s.len() > oracle.nullity(supp_of(s));

    let mut members: Vec<CircuitSet> = Vec::new();
    let mut a0_by_size = Vec::new();
    for k in 1..=null_bound.min(u) {
        let level = par_k_subsets(u, k, |combo| {
            let s = CircuitSet::from_indices(combo.iter().copied());
            member(&s).then_some(s)
        });
        a0_by_size.push((k, level.len()));
        members.extend(level);
    }
    let lookup: FxHashSet<&CircuitSet> = members.iter().collect();
    let index = index_by_element(&members);

    type Key = (usize, usize, usize);
    let produced: Vec<(Key, CircuitSet)> = (0..members.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            let first = &members[a];
            let mut out = Vec::new();
            for c in first.iter() {
                for &b in &index[&c] {
                    if b <= a {
                        continue;
                    }
                    let second = &members[b];
                    let common = first.intersection(second);
                    if common.first() != Some(c) || lookup.contains(&common) {
                        continue;
                    }
                    let union = first.union(second);
                    let (lo, hi) = if first.len() <= second.len() {
                        (first.len(), second.len())
                    } else {
                        (second.len(), first.len())
                    };
                    for removed in common.iter() {
                        let set = union.without(removed);
                        out.push(((lo, hi, set.len()), set));
                    }
                }
            }
            out
        })
        .collect();

    let mut by_class: BTreeMap<Key, FxHashSet<CircuitSet>> = BTreeMap::new();
    for (k, s) in produced {
        by_class.entry(k).or_default().insert(s);
    }

    let ground = m.ground();
    let mut all_new: FxHashSet<CircuitSet> = FxHashSet::default();
    let mut classes = Vec::new();
    for ((lo, hi, size), sets) in by_class {
        let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
        let mut avoided: BTreeMap<usize, BTreeMap<String, usize>> = BTreeMap::new();
        let mut outside = 0;
        for s in &sets {
            let supp = supp_of(s);
            *hist.entry(supp.len()).or_default() += 1;
            let rest = ground.difference(supp);
            if !rest.is_empty() {
                *avoided
                    .entry(supp.len())
                    .or_default()
                    .entry(m.format_set(rest))
                    .or_default() += 1;
            }
            if !member(s) {
                outside += 1;
                all_new.insert(s.clone());
            }
        }
        classes.push(PairClass {
            first_size: lo,
            second_size: hi,
            result_size: size,
            raw: sets.len(),
            outside_a0: outside,
            support_histogram: hist.into_iter().collect(),
            avoided,
        });
    }
    let mut new_hist: BTreeMap<usize, usize> = BTreeMap::new();
    for s in &all_new {
        *new_hist.entry(supp_of(s).len()).or_default() += 1;
    }
    Ok(DeltaA0Report {
        a0_by_size,
        new_sets: all_new.len(),
        new_support_histogram: new_hist.into_iter().collect(),
        classes,
    })
}

/// `size,count` rows sorted by size, with a header line.
pub fn histogram_csv(hist: &[(usize, usize)]) -> String {
    let mut s = String::from("size,count\n");
    for (size, count) in hist {
        s.push_str(&format!("{size},{count}\n"));
    }
    s
}

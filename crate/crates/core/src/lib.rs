//! Combinatorial derived matroids.
//!
//! A matroid is given by its circuits ([`Matroid`]). Its combinatorial derived
//! matroid lives on the circuit indices and is computed by [`derive_circuits`]
//! (minimal-family iteration), with two slower engines kept for cross-checks.
//! The [`field`] module builds the representation-dependent derived matroids
//! (Oxley–Wang, Longyear) and compares matroids in the weak order.

pub mod derived;
pub mod elemset;
pub mod families;
pub mod field;
pub mod generators;
pub mod matroid;
pub mod oracle;

pub use derived::{
    a0_minimal, b_sequence, derive_circuits, derive_dependents_explicit, DerivedError, DerivedResult, Limits,
};
pub use elemset::ElemSet;
pub use families::{Antichain, CircuitSet, Family, FamilyError};
pub use matroid::{Matroid, MatroidError, NullityOracle, RankProfile};

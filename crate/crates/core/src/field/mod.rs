//! Exact arithmetic over GF(p), GF(p²) and the rationals, linear algebra on
//! top of it, and the representation-dependent derived matroids.

mod linalg;
mod rep;

use std::fmt::Debug;
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elemset::ElemSet;
use crate::matroid::MatroidError;

pub use linalg::{column_matroid, rank_and_kernel, Matrix};
pub use rep::{
    longyear_derived, random_uniform_rep, weak_order_compare, AnyRepresentation, Comparison, Convention,
    MatrixJson, OwDerived, Representation, WeakOrder,
};

/// Largest prime accepted for GF(p) and GF(p²).
pub const MAX_PRIME: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} exceeds the limit 2^31")]
    PrimeTooLarge(u64),
    #[error("x^2 + {c1}x + {c0} is reducible over GF({p})")]
    ReducibleModulus { p: u64, c1: u64, c0: u64 },
    #[error("unsupported field description: {0}")]
    BadField(String),
    #[error("cannot read {text:?} as a field element: {reason}")]
    BadElement { text: String, reason: String },
    #[error("matrix shape: {0}")]
    Shape(String),
    #[error("matrix has rank {rank} but {rows} rows; generators must be independent")]
    RankDeficient { rank: usize, rows: usize },
    #[error("{n} columns; at most 64 are supported")]
    TooManyColumns { n: usize },
    #[error("{0:?} is not a circuit of the represented matroid")]
    NotACircuit(ElemSet),
    #[error("the represented matroid has {circuits} circuits; derived ground sets are capped at 64")]
    TooManyCircuits { circuits: usize },
    #[error("the binary matrix does not represent the given matroid")]
    RepresentationMismatch,
    #[error("ground sizes differ: {0} and {1}")]
    GroundSizeMismatch(usize, usize),
    #[error("no matrix with all maximal minors nonzero after {attempts} samples")]
    FieldTooSmall { attempts: usize },
    #[error("a longyear derived matroid needs a matrix over GF(2)")]
    NotBinary,
    #[error(transparent)]
    Matroid(#[from] MatroidError),
}

/// A field with exact arithmetic on owned elements.
pub trait Field: Clone + Debug + Send + Sync {
    type Elem: Clone + PartialEq + Eq + Hash + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    #[allow(clippy::wrong_self_convention)]
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn parse(&self, text: &str) -> Result<Self::Elem, FieldError>;
    fn format(&self, a: &Self::Elem) -> String;
    fn random(&self, rng: &mut ChaCha8Rng) -> Self::Elem;
    fn spec(&self) -> FieldSpec;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    /// Rank of the matrix with the given rows.
    fn rank(&self, rows: &[Vec<Self::Elem>]) -> usize {
        linalg::gaussian_rank(self, rows)
    }

    /// Scales `v` to a canonical representative of its line.
    fn normalize(&self, v: &mut [Self::Elem]) {
        if let Some(lead) = v.iter().find(|x| !self.is_zero(x)).cloned() {
            let s = self.inv(&lead).expect("nonzero is invertible");
            for x in v.iter_mut() {
                *x = self.mul(x, &s);
            }
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn residue(v: i64, p: u64) -> u64 {
    v.rem_euclid(p as i64) as u64
}

fn parse_int(text: &str) -> Result<i64, FieldError> {
    text.trim().parse::<i64>().map_err(|e| FieldError::BadElement {
        text: text.to_string(),
        reason: e.to_string(),
    })
}

/// GF(p) for a prime `p ≤ 2^31`; elements are residues `0..p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p > MAX_PRIME {
            return Err(FieldError::PrimeTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.p - a) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.p
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        (*a != 0).then(|| pow_mod(*a, self.p - 2, self.p))
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn from_i64(&self, v: i64) -> u64 {
        residue(v, self.p)
    }
    fn parse(&self, text: &str) -> Result<u64, FieldError> {
        Ok(residue(parse_int(text)?, self.p))
    }
    fn format(&self, a: &u64) -> String {
        a.to_string()
    }
    fn random(&self, rng: &mut ChaCha8Rng) -> u64 {
        rng.gen_range(0..self.p)
    }
    fn spec(&self) -> FieldSpec {
        FieldSpec::Finite {
            p: self.p,
            ext: None,
            modulus: None,
        }
    }
}

/// GF(p²) as GF(p)[a]/(a² + c1·a + c0). An element `(x0, x1)` is `x0 + x1·a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadraticField {
    p: u64,
    c1: u64,
    c0: u64,
}

impl QuadraticField {
    /// Checks that `a² + c1·a + c0` has no root in GF(p).
    pub fn new(p: u64, c1: u64, c0: u64) -> Result<Self, FieldError> {
        let base = PrimeField::new(p)?;
        let (c1, c0) = (c1 % p, c0 % p);
        let irreducible = if p == 2 {
            (0..2).all(|x| (x * x + c1 * x + c0) % 2 != 0)
        } else {
            // Irreducible iff the discriminant is a non-square.
            let disc = base.sub(&(c1 * c1 % p), &(4 * c0 % p));
            disc != 0 && pow_mod(disc, (p - 1) / 2, p) == p - 1
        };
        if !irreducible {
            return Err(FieldError::ReducibleModulus { p, c1, c0 });
        }
        Ok(QuadraticField { p, c1, c0 })
    }

    /// The first irreducible `a² + c1·a + c0` in `(c1, c0)` order.
    pub fn default_for(p: u64) -> Result<Self, FieldError> {
        PrimeField::new(p)?;
        for c1 in 0..p {
            for c0 in 1..p {
                if let Ok(f) = QuadraticField::new(p, c1, c0) {
                    return Ok(f);
                }
            }
        }
        Err(FieldError::BadField(format!("no quadratic modulus over GF({p})")))
    }

    /// Modulus coefficients from the constant term up: `[c0, c1, 1]`.
    pub fn modulus(&self) -> [u64; 3] {
        [self.c0, self.c1, 1]
    }
}

impl Field for QuadraticField {
    type Elem = (u64, u64);

    fn zero(&self) -> (u64, u64) {
        (0, 0)
    }
    fn one(&self) -> (u64, u64) {
        (1, 0)
    }
    fn add(&self, a: &(u64, u64), b: &(u64, u64)) -> (u64, u64) {
        ((a.0 + b.0) % self.p, (a.1 + b.1) % self.p)
    }
    fn neg(&self, a: &(u64, u64)) -> (u64, u64) {
        ((self.p - a.0) % self.p, (self.p - a.1) % self.p)
    }
    fn mul(&self, a: &(u64, u64), b: &(u64, u64)) -> (u64, u64) {
        let p = self.p;
        let t0 = a.0 * b.0 % p;
        let t1 = (a.0 * b.1 + a.1 * b.0 % p) % p;
        let t2 = a.1 * b.1 % p;
        // a² = -c1·a - c0
        ((t0 + p - self.c0 * t2 % p) % p, (t1 + p - self.c1 * t2 % p) % p)
    }
    fn inv(&self, a: &(u64, u64)) -> Option<(u64, u64)> {
        if *a == (0, 0) {
            return None;
        }
        let f = PrimeField { p: self.p };
        let (x0, x1) = *a;
        let d = f.sub(&x0, &f.mul(&self.c1, &x1));
        let det = f.add(&f.mul(&x0, &d), &f.mul(&self.c0, &f.mul(&x1, &x1)));
        let s = f.inv(&det)?;
        Some((f.mul(&d, &s), f.mul(&f.neg(&x1), &s)))
    }
    fn is_zero(&self, a: &(u64, u64)) -> bool {
        *a == (0, 0)
    }
    fn from_i64(&self, v: i64) -> (u64, u64) {
        (residue(v, self.p), 0)
    }
    /// Accepts sums of terms like `3a`, `-a`, `2`: `"3a+2"`, `"-2a-1"`, `"a"`.
    fn parse(&self, text: &str) -> Result<(u64, u64), FieldError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(FieldError::BadElement {
                text: text.to_string(),
                reason: "empty".into(),
            });
        }
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, ch) in compact.char_indices() {
            if (ch == '+' || ch == '-') && i > start {
                terms.push(&compact[start..i]);
                start = i;
            }
        }
        terms.push(&compact[start..]);
        let (mut x0, mut x1) = (0i64, 0i64);
        for term in terms {
            if let Some(coef) = term.strip_suffix('a') {
                x1 += match coef {
                    "" | "+" => 1,
                    "-" => -1,
                    c => parse_int(c).map_err(|_| FieldError::BadElement {
                        text: text.to_string(),
                        reason: format!("bad term {term:?}"),
                    })?,
                };
            } else {
                x0 += parse_int(term).map_err(|_| FieldError::BadElement {
                    text: text.to_string(),
                    reason: format!("bad term {term:?}"),
                })?;
            }
        }
        Ok((residue(x0, self.p), residue(x1, self.p)))
    }
    fn format(&self, a: &(u64, u64)) -> String {
        match *a {
            (c, 0) => c.to_string(),
            (0, 1) => "a".into(),
            (0, k) => format!("{k}a"),
            (c, 1) => format!("a+{c}"),
            (c, k) => format!("{k}a+{c}"),
        }
    }
    fn random(&self, rng: &mut ChaCha8Rng) -> (u64, u64) {
        (rng.gen_range(0..self.p), rng.gen_range(0..self.p))
    }
    fn spec(&self) -> FieldSpec {
        FieldSpec::Finite {
            p: self.p,
            ext: Some(2),
            modulus: Some(self.modulus().to_vec()),
        }
    }
}

/// Exact rationals. Ranks go through a word-sized prime first and fall back
/// to fraction-free elimination over the integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Rationals;

/// Magnitude bound for entries of random integer matrices.
pub const RANDOM_INTEGER_BOUND: i64 = 1_000_000;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn parse(&self, text: &str) -> Result<BigRational, FieldError> {
        let t = text.trim();
        if let Some((_, den)) = t.split_once('/') {
            if BigInt::from_str(den.trim()).is_ok_and(|d| d.is_zero()) {
                return Err(FieldError::BadElement {
                    text: text.to_string(),
                    reason: "zero denominator".into(),
                });
            }
        }
        BigRational::from_str(t).map_err(|e| FieldError::BadElement {
            text: text.to_string(),
            reason: e.to_string(),
        })
    }
    fn format(&self, a: &BigRational) -> String {
        a.to_string()
    }
    fn random(&self, rng: &mut ChaCha8Rng) -> BigRational {
        self.from_i64(rng.gen_range(-RANDOM_INTEGER_BOUND..=RANDOM_INTEGER_BOUND))
    }
    fn spec(&self) -> FieldSpec {
        FieldSpec::Rational
    }

    fn rank(&self, rows: &[Vec<BigRational>]) -> usize {
        let ints = integer_rows(rows);
        let cols = rows.first().map_or(0, Vec::len);
        let full = rows.len().min(cols);
        // A nonzero minor mod p is a nonzero integer minor.
        if modular_rank(&ints, cols) == full {
            return full;
        }
        bareiss_rank(ints, cols)
    }

    /// Scales to a primitive integer vector with positive leading entry.
    fn normalize(&self, v: &mut [BigRational]) {
        let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
        let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if gcd.is_zero() {
            return;
        }
        let sign = if ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        for (slot, x) in v.iter_mut().zip(ints) {
            *slot = BigRational::from_integer(x / &gcd * &sign);
        }
    }
}

/// Rows scaled by the lcm of their denominators.
fn integer_rows(rows: &[Vec<BigRational>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| {
            let lcm = r.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            r.iter().map(|x| (x * &lcm).to_integer()).collect()
        })
        .collect()
}

const FILTER_PRIME: u64 = 2_147_483_647;

fn modular_rank(rows: &[Vec<BigInt>], cols: usize) -> usize {
    let f = PrimeField { p: FILTER_PRIME };
    let modulus = BigInt::from(FILTER_PRIME);
    let reduced: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| x.mod_floor(&modulus).to_u64().expect("residue fits"))
                .collect()
        })
        .collect();
    debug_assert!(reduced.iter().all(|r| r.len() == cols));
    f.rank(&reduced)
}

/// Fraction-free (Bareiss) elimination; every intermediate entry is a minor
/// of the input, so each division is exact.
pub(crate) fn bareiss_rank(mut a: Vec<Vec<BigInt>>, cols: usize) -> usize {
    let rows = a.len();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, piv);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Field description as stored in matrix files: `{"p": 7}`,
/// `{"p": 7, "ext": 2, "modulus": [3, 6, 1]}` or `"Q"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldSpec {
    Finite {
        p: u64,
        ext: Option<u32>,
        modulus: Option<Vec<u64>>,
    },
    Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FieldSpecJson {
    Finite {
        p: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ext: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        modulus: Option<Vec<u64>>,
    },
    Named(String),
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            FieldSpec::Finite { p, ext, modulus } => FieldSpecJson::Finite {
                p: *p,
                ext: *ext,
                modulus: modulus.clone(),
            },
            FieldSpec::Rational => FieldSpecJson::Named("Q".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match FieldSpecJson::deserialize(d)? {
            FieldSpecJson::Finite { p, ext, modulus } => Ok(FieldSpec::Finite { p, ext, modulus }),
            FieldSpecJson::Named(n) if n == "Q" => Ok(FieldSpec::Rational),
            FieldSpecJson::Named(n) => Err(serde::de::Error::custom(format!("unknown field {n:?}"))),
        }
    }
}

/// One of the supported fields, chosen at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnyField {
    Prime(PrimeField),
    Quadratic(QuadraticField),
    Rational(Rationals),
}

impl AnyField {
    pub fn from_spec(spec: &FieldSpec) -> Result<Self, FieldError> {
        match spec {
            FieldSpec::Rational => Ok(AnyField::Rational(Rationals)),
            FieldSpec::Finite { p, ext, modulus } => match (ext, modulus) {
                (None | Some(1), None) => Ok(AnyField::Prime(PrimeField::new(*p)?)),
                (None | Some(2), Some(m)) => match m.as_slice() {
                    [c0, c1, 1] => Ok(AnyField::Quadratic(QuadraticField::new(*p, *c1, *c0)?)),
                    _ => Err(FieldError::BadField(format!(
                        "modulus {m:?} must be monic quadratic, listed as [c0, c1, 1]"
                    ))),
                },
                (Some(2), None) => Ok(AnyField::Quadratic(QuadraticField::default_for(*p)?)),
                (Some(e), _) => Err(FieldError::BadField(format!("extension degree {e} is not supported"))),
            },
        }
    }

    /// Parses `Q`, `7` or `7^2`.
    pub fn from_cli(text: &str) -> Result<Self, FieldError> {
        let t = text.trim();
        if t == "Q" {
            return Ok(AnyField::Rational(Rationals));
        }
        let bad = || FieldError::BadField(t.to_string());
        match t.split_once('^') {
            None => Ok(AnyField::Prime(PrimeField::new(t.parse().map_err(|_| bad())?)?)),
            Some((p, "2")) => Ok(AnyField::Quadratic(QuadraticField::default_for(
                p.parse().map_err(|_| bad())?,
            )?)),
            Some(_) => Err(bad()),
        }
    }

    pub fn spec(&self) -> FieldSpec {
        match self {
            AnyField::Prime(f) => f.spec(),
            AnyField::Quadratic(f) => f.spec(),
            AnyField::Rational(f) => f.spec(),
        }
    }
}

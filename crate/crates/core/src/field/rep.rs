use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::{column_matroid, rank_and_kernel, Matrix};
use super::{AnyField, Field, FieldError, FieldSpec, PrimeField, QuadraticField, Rationals};
use crate::elemset::ElemSet;
use crate::families::for_each_combination;
use crate::matroid::Matroid;

/// Whether the rows of a matrix span the code itself or its dual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Primal,
    Dual,
}

/// On-disk matrix form; entries are strings so rationals (`"3/4"`) and
/// quadratic-extension elements (`"2a+1"`) share one schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub field: FieldSpec,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<String>>,
    pub convention: Convention,
}

/// A full-row-rank matrix over `F` with both generators precomputed.
///
/// `primal` spans the code; its column matroid is the represented matroid.
/// `dual` spans the orthogonal code, whose minimal supports are the circuits.
#[derive(Debug, Clone)]
pub struct Representation<F: Field> {
    field: F,
    matrix: Matrix<F::Elem>,
    convention: Convention,
    primal: Matrix<F::Elem>,
    dual: Matrix<F::Elem>,
}

impl<F: Field> Representation<F> {
    pub fn new(field: F, matrix: Matrix<F::Elem>, convention: Convention) -> Result<Self, FieldError> {
        if matrix.cols() > 64 {
            return Err(FieldError::TooManyColumns { n: matrix.cols() });
        }
        let (rank, kernel) = rank_and_kernel(&field, &matrix);
        if rank != matrix.rows() {
            return Err(FieldError::RankDeficient {
                rank,
                rows: matrix.rows(),
            });
        }
        let (primal, dual) = match convention {
            Convention::Primal => (matrix.clone(), kernel),
            Convention::Dual => (kernel, matrix.clone()),
        };
        Ok(Representation {
            field,
            matrix,
            convention,
            primal,
            dual,
        })
    }

    pub fn parse(field: F, json: &MatrixJson) -> Result<Self, FieldError> {
        if json.entries.len() != json.rows {
            return Err(FieldError::Shape(format!(
                "{} rows of entries, header says {}",
                json.entries.len(),
                json.rows
            )));
        }
        let rows = json
            .entries
            .iter()
            .map(|r| r.iter().map(|x| field.parse(x)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let matrix = Matrix::from_rows(rows, json.cols)?;
        Self::new(field, matrix, json.convention)
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            field: self.field.spec(),
            rows: self.matrix.rows(),
            cols: self.matrix.cols(),
            entries: self
                .matrix
                .row_vecs()
                .iter()
                .map(|r| r.iter().map(|x| self.field.format(x)).collect())
                .collect(),
            convention: self.convention,
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn matrix(&self) -> &Matrix<F::Elem> {
        &self.matrix
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn primal_generator(&self) -> &Matrix<F::Elem> {
        &self.primal
    }

    pub fn dual_generator(&self) -> &Matrix<F::Elem> {
        &self.dual
    }

    /// The matroid on the columns.
    pub fn matroid(&self) -> Result<Matroid, FieldError> {
        column_matroid(&self.field, &self.primal)
    }

    /// The normalized dual codeword with support exactly `c`.
    ///
    /// Solves for combinations of the dual generator rows that vanish
    /// outside `c`; a circuit admits exactly one up to scaling.
    pub fn circuit_vector(&self, c: ElemSet) -> Result<Vec<F::Elem>, FieldError> {
        let n = self.matrix.cols();
        let h = &self.dual;
        let outside: Vec<Vec<F::Elem>> = (0..n)
            .filter(|&j| !c.contains(j))
            .map(|j| h.column(j))
            .collect();
        let system = Matrix::from_rows(outside, h.rows())?;
        let (_, kernel) = rank_and_kernel(&self.field, &system);
        if kernel.rows() != 1 {
            return Err(FieldError::NotACircuit(c));
        }
        let y = kernel.row(0);
        let f = &self.field;
        let mut v: Vec<F::Elem> = (0..n)
            .map(|j| {
                y.iter()
                    .zip(h.row_vecs())
                    .fold(f.zero(), |acc, (yi, row)| f.add(&acc, &f.mul(yi, &row[j])))
            })
            .collect();
        let support: ElemSet = (0..n).filter(|&j| !f.is_zero(&v[j])).collect();
        if support != c {
            return Err(FieldError::NotACircuit(c));
        }
        f.normalize(&mut v);
        Ok(v)
    }

    /// The Oxley–Wang derived matroid: the column matroid of the circuit
    /// vectors, one column per circuit in canonical circuit order.
    pub fn ow_derived(&self) -> Result<OwDerived, FieldError> {
        let base = self.matroid()?;
        if base.num_circuits() > 64 {
            return Err(FieldError::TooManyCircuits {
                circuits: base.num_circuits(),
            });
        }
        let vectors: Vec<Vec<F::Elem>> = base
            .circuits()
            .par_iter()
            .map(|&c| self.circuit_vector(c))
            .collect::<Result<_, _>>()?;
        let columns = Matrix::from_columns(&vectors, self.matrix.cols())?;
        let labels: Vec<String> = base.circuits().iter().map(|&c| base.format_set(c)).collect();
        let derived = column_matroid(&self.field, &columns)?.with_labels(labels)?;
        Ok(OwDerived {
            vectors: vectors
                .iter()
                .map(|v| v.iter().map(|x| self.field.format(x)).collect())
                .collect(),
            base,
            derived,
        })
    }
}

/// Result of [`Representation::ow_derived`].
#[derive(Debug, Clone)]
pub struct OwDerived {
    /// The represented matroid.
    pub base: Matroid,
    /// Normalized circuit vectors, one per base circuit, rendered as text.
    pub vectors: Vec<Vec<String>>,
    /// The derived matroid, labelled by the base circuits.
    pub derived: Matroid,
}

/// A representation over whichever field its file names.
#[derive(Debug, Clone)]
pub enum AnyRepresentation {
    Prime(Representation<PrimeField>),
    Quadratic(Representation<QuadraticField>),
    Rational(Representation<Rationals>),
}

macro_rules! dispatch {
    ($self:expr, $r:ident => $body:expr) => {
        match $self {
            AnyRepresentation::Prime($r) => $body,
            AnyRepresentation::Quadratic($r) => $body,
            AnyRepresentation::Rational($r) => $body,
        }
    };
}

impl AnyRepresentation {
    pub fn from_json(json: &MatrixJson) -> Result<Self, FieldError> {
        Ok(match AnyField::from_spec(&json.field)? {
            AnyField::Prime(f) => AnyRepresentation::Prime(Representation::parse(f, json)?),
            AnyField::Quadratic(f) => AnyRepresentation::Quadratic(Representation::parse(f, json)?),
            AnyField::Rational(f) => AnyRepresentation::Rational(Representation::parse(f, json)?),
        })
    }

    pub fn to_json(&self) -> MatrixJson {
        dispatch!(self, r => r.to_json())
    }

    pub fn field_spec(&self) -> FieldSpec {
        dispatch!(self, r => r.field().spec())
    }

    pub fn cols(&self) -> usize {
        dispatch!(self, r => r.matrix().cols())
    }

    pub fn matroid(&self) -> Result<Matroid, FieldError> {
        dispatch!(self, r => r.matroid())
    }

    pub fn circuit_vector(&self, c: ElemSet) -> Result<Vec<String>, FieldError> {
        dispatch!(self, r => r
            .circuit_vector(c)
            .map(|v| v.iter().map(|x| r.field().format(x)).collect()))
    }

    pub fn ow_derived(&self) -> Result<OwDerived, FieldError> {
        dispatch!(self, r => r.ow_derived())
    }

    /// Whether this is a matrix over GF(2).
    pub fn is_binary(&self) -> bool {
        matches!(self, AnyRepresentation::Prime(r) if r.field().characteristic() == 2)
    }
}

/// The Longyear derived matroid of a binary matroid: circuits are dependent
/// together exactly when some nonempty subfamily has empty iterated
/// symmetric difference, i.e. their indicator vectors are dependent over GF(2).
///
/// `binary` must represent `m` over GF(2); it certifies that `m` is binary.
pub fn longyear_derived(m: &Matroid, binary: &AnyRepresentation) -> Result<Matroid, FieldError> {
    if !binary.is_binary() {
        return Err(FieldError::NotBinary);
    }
    if !binary.matroid()?.same_circuits(m) {
        return Err(FieldError::RepresentationMismatch);
    }
    if m.num_circuits() > 64 {
        return Err(FieldError::TooManyCircuits {
            circuits: m.num_circuits(),
        });
    }
    let gf2 = PrimeField::new(2)?;
    let n = m.ground_size();
    let indicators: Vec<Vec<u64>> = m
        .circuits()
        .iter()
        .map(|c| (0..n).map(|e| u64::from(c.contains(e))).collect())
        .collect();
    let columns = Matrix::from_columns(&indicators, n)?;
    let labels: Vec<String> = m.circuits().iter().map(|&c| m.format_set(c)).collect();
    Ok(column_matroid(&gf2, &columns)?.with_labels(labels)?)
}

/// Resample budget for [`random_uniform_rep`].
pub const MAX_RESAMPLES: usize = 100;

/// A random `k × n` primal matrix with every maximal minor nonzero, so it
/// represents U(k, n). Deterministic in `seed`.
pub fn random_uniform_rep(k: usize, n: usize, field: AnyField, seed: u64) -> Result<AnyRepresentation, FieldError> {
    if k > n || n > 64 {
        return Err(FieldError::Shape(format!("need k ≤ n ≤ 64, got k = {k}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match field {
        AnyField::Prime(f) => AnyRepresentation::Prime(sample_uniform(f, k, n, &mut rng)?),
        AnyField::Quadratic(f) => AnyRepresentation::Quadratic(sample_uniform(f, k, n, &mut rng)?),
        AnyField::Rational(f) => AnyRepresentation::Rational(sample_uniform(f, k, n, &mut rng)?),
    })
}

fn sample_uniform<F: Field>(f: F, k: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<Representation<F>, FieldError> {
    let indices: Vec<usize> = (0..n).collect();
    for _ in 0..MAX_RESAMPLES {
        let rows: Vec<Vec<F::Elem>> = (0..k).map(|_| (0..n).map(|_| f.random(rng)).collect()).collect();
        let m = Matrix::from_rows(rows, n)?;
        let columns = m.columns();
        let mut generic = true;
        for_each_combination(&indices, k, |sel| {
            if generic {
                let vecs: Vec<Vec<F::Elem>> = sel.iter().map(|&j| columns[j].clone()).collect();
                generic = f.rank(&vecs) == k;
            }
        });
        if generic {
            return Representation::new(f, m, Convention::Primal);
        }
    }
    Err(FieldError::FieldTooSmall {
        attempts: MAX_RESAMPLES,
    })
}

/// Position of two matroids on a common ground set in the weak order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    Equal,
    /// The first is strictly above: its dependent sets are all dependent in the second.
    GreaterOrEqual,
    LessOrEqual,
    Incomparable,
}

/// Outcome of [`weak_order_compare`] with the circuits that break each direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakOrder {
    pub relation: Comparison,
    /// Circuits of the first matroid that are independent in the second.
    pub first_only: Vec<ElemSet>,
    /// Circuits of the second matroid that are independent in the first.
    pub second_only: Vec<ElemSet>,
}

/// `N1 ≥ N2` when every dependent set of `N1` is dependent in `N2`, which
/// holds exactly when every circuit of `N1` is dependent in `N2`.
pub fn weak_order_compare(first: &Matroid, second: &Matroid) -> Result<WeakOrder, FieldError> {
    if first.ground_size() != second.ground_size() {
        return Err(FieldError::GroundSizeMismatch(first.ground_size(), second.ground_size()));
    }
    let first_only: Vec<ElemSet> = first
        .circuits()
        .iter()
        .copied()
        .filter(|&c| second.is_independent(c))
        .collect();
    let second_only: Vec<ElemSet> = second
        .circuits()
        .iter()
        .copied()
        .filter(|&c| first.is_independent(c))
        .collect();
    let relation = match (first_only.is_empty(), second_only.is_empty()) {
        (true, true) => Comparison::Equal,
        (true, false) => Comparison::GreaterOrEqual,
        (false, true) => Comparison::LessOrEqual,
        (false, false) => Comparison::Incomparable,
    };
    Ok(WeakOrder {
        relation,
        first_only,
        second_only,
    })
}

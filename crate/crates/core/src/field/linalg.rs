use rayon::prelude::*;
use rustc_hash::FxHashSet;

use super::{Field, FieldError};
use crate::elemset::ElemSet;
use crate::matroid::Matroid;

/// Dense row-major matrix of field elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<Vec<E>>,
}

impl<E: Clone> Matrix<E> {
    /// Builds a matrix from its rows; `cols` is needed when there are none.
    pub fn from_rows(data: Vec<Vec<E>>, cols: usize) -> Result<Self, FieldError> {
        if let Some((i, r)) = data.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(FieldError::Shape(format!("row {i} has {} entries, expected {cols}", r.len())));
        }
        Ok(Matrix {
            rows: data.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors of length `rows`.
    pub fn from_columns(columns: &[Vec<E>], rows: usize) -> Result<Self, FieldError> {
        if let Some((j, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != rows) {
            return Err(FieldError::Shape(format!("column {j} has {} entries, expected {rows}", c.len())));
        }
        let data = (0..rows).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect();
        Ok(Matrix {
            rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i]
    }

    pub fn row_vecs(&self) -> &[Vec<E>] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &E {
        &self.data[i][j]
    }

    pub fn column(&self, j: usize) -> Vec<E> {
        self.data.iter().map(|r| r[j].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<E>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data: self.columns(),
        }
    }
}

/// Reduced row echelon form; returns the nonzero rows and their pivot columns.
pub(crate) fn rref<F: Field>(f: &F, rows: &[Vec<F::Elem>], cols: usize) -> (Vec<Vec<F::Elem>>, Vec<usize>) {
    let mut a: Vec<Vec<F::Elem>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !f.is_zero(&a[i][c])) else {
            continue;
        };
        a.swap(r, p);
        let s = f.inv(&a[r][c]).expect("pivot is nonzero");
        for x in a[r].iter_mut() {
            *x = f.mul(x, &s);
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || f.is_zero(&row[c]) {
                continue;
            }
            let factor = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = f.sub(x, &f.mul(&factor, y));
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

/// Plain forward elimination rank.
pub(crate) fn gaussian_rank<F: Field>(f: &F, rows: &[Vec<F::Elem>]) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<F::Elem>> = rows.to_vec();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !f.is_zero(&a[i][c])) else {
            continue;
        };
        a.swap(r, p);
        let s = f.inv(&a[r][c]).expect("pivot is nonzero");
        let (top, rest) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            if f.is_zero(&row[c]) {
                continue;
            }
            let factor = f.mul(&row[c], &s);
            for j in c..cols {
                row[j] = f.sub(&row[j], &f.mul(&factor, &pivot_row[j]));
            }
        }
        r += 1;
    }
    r
}

/// Rank of `m` and a basis of its right kernel, one kernel vector per row.
pub fn rank_and_kernel<F: Field>(f: &F, m: &Matrix<F::Elem>) -> (usize, Matrix<F::Elem>) {
    let (reduced, pivots) = rref(f, m.row_vecs(), m.cols());
    let free: Vec<usize> = (0..m.cols()).filter(|c| !pivots.contains(c)).collect();
    let kernel: Vec<Vec<F::Elem>> = free
        .iter()
        .map(|&fc| {
            let mut v = vec![f.zero(); m.cols()];
            v[fc] = f.one();
            for (row, &pc) in reduced.iter().zip(&pivots) {
                v[pc] = f.neg(&row[fc]);
            }
            v
        })
        .collect();
    let kernel = Matrix::from_rows(kernel, m.cols()).expect("kernel rows have matrix width");
    (pivots.len(), kernel)
}

/// The matroid on the columns of `m`: circuits are the minimal dependent
/// column sets, found level by level from the independent sets below.
pub fn column_matroid<F: Field>(f: &F, m: &Matrix<F::Elem>) -> Result<Matroid, FieldError> {
    let n = m.cols();
    if n > 64 {
        return Err(FieldError::TooManyColumns { n });
    }
    let columns = m.columns();
    let rank = f.rank(m.row_vecs());
    let independent = |s: ElemSet| -> bool {
        let vecs: Vec<Vec<F::Elem>> = s.iter().map(|j| columns[j].clone()).collect();
        f.rank(&vecs) == s.len()
    };

    let mut circuits: Vec<ElemSet> = Vec::new();
    let mut level: Vec<ElemSet> = vec![ElemSet::EMPTY];
    for k in 1..=rank + 1 {
        let previous: FxHashSet<ElemSet> = level.iter().copied().collect();
        // Extend each independent set by larger elements; keep candidates
        // whose every facet is independent.
        let candidates: Vec<ElemSet> = level
            .par_iter()
            .flat_map_iter(|&s| {
                let start = s.max().map_or(0, |x| x + 1);
                let previous = &previous;
                (start..n).map(move |e| s.with(e)).filter(move |t| {
                    t.iter().all(|x| x == t.max().unwrap() || previous.contains(&t.without(x)))
                })
            })
            .collect();
        if k == rank + 1 {
            circuits.extend(candidates);
            break;
        }
        let tested: Vec<(ElemSet, bool)> = candidates.into_par_iter().map(|t| (t, independent(t))).collect();
        level = Vec::with_capacity(tested.len());
        for (t, ok) in tested {
            if ok {
                level.push(t);
            } else {
                circuits.push(t);
            }
        }
    }
    Ok(Matroid::from_circuits(n, circuits, false)?)
}

#[cfg(test)]
mod tests {
    use super::super::{PrimeField, Rationals};
    use super::*;

    fn gf7(rows: &[&[i64]]) -> Matrix<u64> {
        let f = PrimeField::new(7).unwrap();
        let cols = rows.first().map_or(0, |r| r.len());
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| f.from_i64(x)).collect()).collect(), cols).unwrap()
    }

    #[test]
    fn identity_and_zero() {
        let f = PrimeField::new(7).unwrap();
        let (r, k) = rank_and_kernel(&f, &gf7(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
        assert_eq!((r, k.rows()), (3, 0));
        let (r, k) = rank_and_kernel(&f, &gf7(&[&[0, 0, 0], &[0, 0, 0]]));
        assert_eq!((r, k.rows()), (0, 3));
    }

    #[test]
    fn kernel_vectors_vanish() {
        let f = PrimeField::new(7).unwrap();
        let m = gf7(&[&[1, 2, 1, 5, 0, 0], &[1, 5, 0, 0, 5, 1], &[0, 0, 5, 1, 2, 1]]);
        let (r, k) = rank_and_kernel(&f, &m);
        assert_eq!(r, 3);
        assert_eq!(k.rows(), 3);
        for v in k.row_vecs() {
            for row in m.row_vecs() {
                let dot = row.iter().zip(v).fold(0, |acc, (a, b)| f.add(&acc, &f.mul(a, b)));
                assert_eq!(dot, 0);
            }
        }
    }

    #[test]
    fn rational_kernel() {
        let q = Rationals;
        let rows: Vec<Vec<_>> = [[1, 2, 3], [2, 4, 7]].iter().map(|r| r.iter().map(|&x| q.from_i64(x)).collect()).collect();
        let m = Matrix::from_rows(rows, 3).unwrap();
        let (r, k) = rank_and_kernel(&q, &m);
        assert_eq!(r, 2);
        assert_eq!(k.row(0).iter().map(|x| q.format(x)).collect::<Vec<_>>(), vec!["-2", "1", "0"]);
    }

    #[test]
    fn shape_errors() {
        assert!(Matrix::from_rows(vec![vec![1u64, 2], vec![3]], 2).is_err());
        assert!(Matrix::<u64>::from_columns(&[vec![1, 2], vec![3]], 2).is_err());
    }

    #[test]
    fn column_matroid_generic_is_uniform() {
        let f = PrimeField::new(10007).unwrap();
        // Vandermonde columns (1, t, t²) are in general position.
        let rows: Vec<Vec<u64>> = (0..3u32).map(|d| (1..=6u64).map(|t| t.pow(d)).collect()).collect();
        let m = column_matroid(&f, &Matrix::from_rows(rows, 6).unwrap()).unwrap();
        assert_eq!(m.num_circuits(), 15);
        assert!(m.circuits().iter().all(|c| c.len() == 4));
    }

    #[test]
    fn column_matroid_with_loops_and_parallels() {
        let f = PrimeField::new(2).unwrap();
        let m = column_matroid(&f, &gf7(&[&[0, 1, 1, 0], &[0, 0, 0, 1]])).unwrap();
        let lists = m.circuit_lists();
        assert_eq!(lists, vec![vec![0], vec![1, 2]]);
    }
}

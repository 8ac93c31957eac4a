//! Dense matrices over an exact [`Field`], with Gaussian elimination.
//!
//! Vectors are plain `Vec<F::Elem>`. A matrix acts on column vectors (`mul_vec`), while
//! subspace bases are stored as rows; both conventions are used side by side.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::subspace::Subspace;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

/// Result of row reduction: the reduced row-echelon form, its rank and pivot columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref<F: Field> {
    pub reduced: Matrix<F>,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

impl<F: Field> Matrix<F> {
    pub fn new(field: F, rows: usize, cols: usize, data: Vec<F::Elem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(field: F, rows: usize, cols: usize) -> Self {
        let data = vec![field.zero(); rows * cols];
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    pub fn identity(field: F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m[(i, i)] = m.field.one();
        }
        m
    }

    pub fn diagonal(field: F, diag: &[F::Elem]) -> Self {
        let mut m = Self::zeros(field, diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    /// Builds a matrix from row vectors; all rows must share a length. `cols` is needed
    /// to describe an empty list of rows.
    pub fn from_rows(field: F, cols: usize, rows: Vec<Vec<F::Elem>>) -> Result<Self> {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row of length {} where {cols} expected",
                    r.len()
                )));
            }
            data.extend(r);
        }
        Ok(Matrix {
            field,
            rows: nrows,
            cols,
            data,
        })
    }

    /// Convenience constructor from small integers; panics on ragged input.
    pub fn from_i64(field: F, rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data: Vec<Vec<F::Elem>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Self::from_rows(field, cols, data).expect("ragged integer matrix")
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[F::Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<F::Elem>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<F::Elem> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[F::Elem] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<F::Elem> {
        self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| self.field.is_zero(x))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field.clone(), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Matrix product; panics if the inner dimensions differ.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matrix product of {}x{} by {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let f = &self.field;
        let mut out = Self::zeros(f.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = f.mul(a, &other[(k, j)]);
                    let cell = &mut out.data[i * other.cols + j];
                    *cell = f.add(cell, &prod);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| self.field.add(a, b))
            .collect();
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| self.field.sub(a, b))
            .collect();
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: &F::Elem) -> Self {
        let data = self.data.iter().map(|a| self.field.mul(a, s)).collect();
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&self.field.neg(&self.field.one()))
    }

    pub fn trace(&self) -> F::Elem {
        (0..self.rows.min(self.cols)).fold(self.field.zero(), |acc, i| {
            self.field.add(&acc, &self[(i, i)])
        })
    }

    /// `M x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| dot(&self.field, self.row(i), x))
            .collect()
    }

    /// `xᵀ M` for a row vector `x`.
    pub fn vec_mul(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        assert_eq!(x.len(), self.rows);
        let f = &self.field;
        let mut out = vec![f.zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            if f.is_zero(xi) {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = f.add(o, &f.mul(xi, &self[(i, j)]));
            }
        }
        out
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix {
            field: self.field.clone(),
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend(self.row(i).iter().cloned());
            data.extend(other.row(i).iter().cloned());
        }
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols,
            data,
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend(self.row(i).iter().cloned());
        }
        Matrix {
            field: self.field.clone(),
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for i in rows.clone() {
            for j in cols.clone() {
                data.push(self[(i, j)].clone());
            }
        }
        Matrix {
            field: self.field.clone(),
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// row[target] -= factor * row[source]
    fn eliminate(&mut self, target: usize, source: usize, factor: &F::Elem, from_col: usize) {
        let c = self.cols;
        for j in from_col..c {
            let s = self.data[source * c + j].clone();
            if self.field.is_zero(&s) {
                continue;
            }
            let t = &self.data[target * c + j];
            self.data[target * c + j] = self.field.sub(t, &self.field.mul(factor, &s));
        }
    }

    /// Reduced row-echelon form. Pivoting is deterministic: columns are scanned left to
    /// right and the topmost nonzero entry at or below the current row is chosen.
    pub fn rref(&self) -> Rref<F> {
        let mut m = self.clone();
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(i) = (r..m.rows).find(|&i| !f.is_zero(&m[(i, c)])) else {
                continue;
            };
            m.swap_rows(i, r);
            let inv = f.inv(&m[(r, c)]).expect("pivot is nonzero");
            for j in c..m.cols {
                m[(r, j)] = f.mul(&m[(r, j)], &inv);
            }
            for i in 0..m.rows {
                if i != r && !f.is_zero(&m[(i, c)]) {
                    let factor = m[(i, c)].clone();
                    m.eliminate(i, r, &factor, c);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref {
            reduced: m,
            rank: r,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// `{x : M x = 0}` as a canonical subspace of `F^cols`.
    pub fn kernel(&self) -> Subspace<F> {
        let Rref {
            reduced, pivots, ..
        } = self.rref();
        let f = &self.field;
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![f.zero(); self.cols];
            v[free] = f.one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = f.neg(&reduced[(row, free)]);
            }
            basis.push(v);
        }
        Subspace::from_vectors(f.clone(), self.cols, basis)
            .expect("kernel vectors have the right length")
    }

    /// Some `x` with `M x = b`; free variables are set to zero.
    pub fn solve(&self, b: &[F::Elem]) -> Result<Vec<F::Elem>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for {} equations",
                b.len(),
                self.rows
            )));
        }
        let rhs = Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: 1,
            data: b.to_vec(),
        };
        let Rref {
            reduced, pivots, ..
        } = self.hstack(&rhs).rref();
        if pivots.last() == Some(&self.cols) {
            return Err(Error::NoSolution);
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = reduced[(row, self.cols)].clone();
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = self.hstack(&Self::identity(self.field.clone(), n));
        let r = aug.rref();
        if r.pivots.len() < n || r.pivots[n - 1] != n - 1 {
            return None;
        }
        Some(r.reduced.submatrix(0..n, n..2 * n))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn determinant(&self) -> F::Elem {
        assert!(self.is_square());
        let f = self.field.clone();
        let mut m = self.clone();
        let mut det = f.one();
        for c in 0..m.cols {
            let Some(i) = (c..m.rows).find(|&i| !f.is_zero(&m[(i, c)])) else {
                return f.zero();
            };
            if i != c {
                m.swap_rows(i, c);
                det = f.neg(&det);
            }
            let pivot = m[(c, c)].clone();
            det = f.mul(&det, &pivot);
            let inv = f.inv(&pivot).expect("nonzero pivot");
            for r in c + 1..m.rows {
                if !f.is_zero(&m[(r, c)]) {
                    let factor = f.mul(&m[(r, c)], &inv);
                    m.eliminate(r, c, &factor, c);
                }
            }
        }
        det
    }

    /// Entries rendered with the field's scalar syntax, row by row.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| self.field.format(x)).collect())
            .collect()
    }

    pub fn from_strings(field: F, cols: usize, rows: &[Vec<String>]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| field.parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(field, cols, parsed)
    }
}

impl<F: Field> Index<(usize, usize)> for Matrix<F> {
    type Output = F::Elem;
    fn index(&self, (i, j): (usize, usize)) -> &F::Elem {
        &self.data[i * self.cols + j]
    }
}

impl<F: Field> IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F::Elem {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> F::Elem {
    a.iter()
        .zip(b)
        .fold(f.zero(), |acc, (x, y)| f.add(&acc, &f.mul(x, y)))
}

pub fn vec_add<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    a.iter().zip(b).map(|(x, y)| f.add(x, y)).collect()
}

pub fn vec_sub<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    a.iter().zip(b).map(|(x, y)| f.sub(x, y)).collect()
}

pub fn vec_scale<F: Field>(f: &F, s: &F::Elem, a: &[F::Elem]) -> Vec<F::Elem> {
    a.iter().map(|x| f.mul(s, x)).collect()
}

pub fn is_zero_vec<F: Field>(f: &F, a: &[F::Elem]) -> bool {
    a.iter().all(|x| f.is_zero(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn rref_identity() {
        let id = Matrix::identity(f(7), 4);
        let r = id.rref();
        assert_eq!(r.reduced, id);
        assert_eq!(r.rank, 4);
        assert_eq!(r.pivots, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rref_hand_examples() {
        let m = Matrix::from_i64(f(3), &[&[0, 1], &[0, 2]]);
        let r = m.rref();
        assert_eq!(r.reduced, Matrix::from_i64(f(3), &[&[0, 1], &[0, 0]]));
        assert_eq!(r.rank, 1);
        assert_eq!(r.pivots, vec![1]);

        let m = Matrix::from_i64(Rationals, &[&[2, 4], &[1, 2]]);
        let r = m.rref();
        assert_eq!(r.reduced, Matrix::from_i64(Rationals, &[&[1, 2], &[0, 0]]));
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(Matrix::identity(f(5), 3).kernel().dim(), 0);
        let k = Matrix::from_i64(f(5), &[&[1, 2], &[2, 4]]).kernel();
        let expected = Subspace::from_vectors(f(5), 2, vec![vec![3, 1]]).unwrap();
        assert_eq!(k, expected);
        assert_eq!(Matrix::zeros(f(5), 3, 3).kernel().dim(), 3);
    }

    #[test]
    fn solve_examples() {
        let b = vec![3u64, 1, 4];
        assert_eq!(Matrix::identity(f(5), 3).solve(&b).unwrap(), b);
        let m = Matrix::from_i64(f(5), &[&[1, 1], &[1, 1]]);
        assert_eq!(m.solve(&[0, 1]), Err(Error::NoSolution));
        let m = Matrix::from_i64(f(5), &[&[2]]);
        assert_eq!(m.solve(&[1]).unwrap(), vec![3]);
        // free variables are zero
        let m = Matrix::from_i64(Rationals, &[&[1, 1]]);
        let x = m.solve(&[Rationals.from_i64(5)]).unwrap();
        assert_eq!(x, vec![Rationals.from_i64(5), Rationals.from_i64(0)]);
    }

    #[test]
    fn inverse_and_determinant() {
        let m = Matrix::from_i64(Rationals, &[&[2, 1], &[7, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(Rationals, 2));
        assert_eq!(m.determinant(), Rationals.from_i64(1));
        let s = Matrix::from_i64(f(7), &[&[1, 2], &[2, 4]]);
        assert!(s.inverse().is_none());
        assert_eq!(s.determinant(), 0);
    }

    fn random_matrix(p: u64, rows: usize, cols: usize, seed: u64) -> Matrix<PrimeField> {
        let field = f(p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols).map(|_| field.random(&mut rng)).collect();
        Matrix::new(field, rows, cols, data).unwrap()
    }

    proptest! {
        #[test]
        fn rref_is_idempotent(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6) {
            let m = random_matrix(3, rows, cols, seed);
            let r = m.rref().reduced;
            prop_assert_eq!(r.rref().reduced, r);
        }

        #[test]
        fn rank_nullity(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7, p in prop::sample::select(vec![3u64, 5, 7, 101])) {
            let m = random_matrix(p, rows, cols, seed);
            prop_assert_eq!(m.rank() + m.kernel().dim(), cols);
            // kernel vectors really are annihilated
            for v in m.kernel().basis().row_vecs() {
                prop_assert!(is_zero_vec(m.field(), &m.mul_vec(&v)));
            }
        }

        #[test]
        fn solve_returns_a_solution(seed in any::<u64>(), n in 1usize..6) {
            let m = random_matrix(7, n, n + 1, seed);
            let x_true: Vec<u64> = (0..n as u64 + 1).map(|i| (seed.wrapping_add(i)) % 7).collect();
            let b = m.mul_vec(&x_true);
            let x = m.solve(&b).unwrap();
            prop_assert_eq!(m.mul_vec(&x), b);
        }
    }
}

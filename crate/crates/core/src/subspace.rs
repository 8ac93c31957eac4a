//! Subspaces of `F^n` in canonical form: the reduced row-echelon basis with zero rows dropped.
//! Two subspaces are equal exactly when their stored bases are equal.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace<F: Field> {
    basis: Matrix<F>,
    pivots: Vec<usize>,
}

impl<F: Field> Subspace<F> {
    /// Row space of `m`.
    pub fn row_space(m: &Matrix<F>) -> Self {
        let r = m.rref();
        let basis = r.reduced.select_rows(&(0..r.rank).collect::<Vec<_>>());
        Subspace {
            basis,
            pivots: r.pivots,
        }
    }

    /// Wraps a basis already in reduced row-echelon form with no zero rows.
    pub(crate) fn from_rref_unchecked(basis: Matrix<F>, pivots: Vec<usize>) -> Self {
        debug_assert_eq!(basis.rows(), pivots.len());
        Subspace { basis, pivots }
    }

    pub fn from_vectors(field: F, n: usize, vectors: Vec<Vec<F::Elem>>) -> Result<Self> {
        Ok(Self::row_space(&Matrix::from_rows(field, n, vectors)?))
    }

    pub fn zero(field: F, n: usize) -> Self {
        Subspace {
            basis: Matrix::zeros(field, 0, n),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: F, n: usize) -> Self {
        Subspace {
            basis: Matrix::identity(field, n),
            pivots: (0..n).collect(),
        }
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinate(field: F, n: usize, idx: &[usize]) -> Self {
        let vecs = idx
            .iter()
            .map(|&i| {
                let mut v = vec![field.zero(); n];
                v[i] = field.one();
                v
            })
            .collect();
        Self::from_vectors(field, n, vecs).expect("coordinate vectors")
    }

    pub fn field(&self) -> &F {
        self.basis.field()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    /// Canonical basis, one vector per row.
    pub fn basis(&self) -> &Matrix<F> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<F::Elem>> {
        self.basis.row_vecs()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn check_ambient(&self, other: &Self) -> Result<()> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::AmbientMismatch {
                expected: self.ambient_dim(),
                found: other.ambient_dim(),
            });
        }
        Ok(())
    }

    /// Residue of `v` after reduction against the canonical basis; zero iff `v` lies in the span.
    pub fn reduce(&self, v: &[F::Elem]) -> Vec<F::Elem> {
        let f = self.field();
        let mut v = v.to_vec();
        for (i, &p) in self.pivots.iter().enumerate() {
            if f.is_zero(&v[p]) {
                continue;
            }
            let c = v[p].clone();
            for (j, b) in self.basis.row(i).iter().enumerate() {
                if !f.is_zero(b) {
                    v[j] = f.sub(&v[j], &f.mul(&c, b));
                }
            }
        }
        v
    }

    pub fn contains_vec(&self, v: &[F::Elem]) -> bool {
        assert_eq!(v.len(), self.ambient_dim());
        let f = self.field();
        self.reduce(v).iter().all(|x| f.is_zero(x))
    }

    /// `self ⊆ other`.
    pub fn is_subspace_of(&self, other: &Self) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && self.dim() <= other.dim()
            && (0..self.dim()).all(|i| other.contains_vec(self.basis.row(i)))
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        Ok(Self::row_space(&self.basis.vstack(&other.basis)))
    }

    /// `{x : b·x = 0 for every basis row b}` (annihilator for the standard dot product).
    pub fn annihilator(&self) -> Self {
        self.basis.kernel()
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        let a = self.annihilator();
        let b = other.annihilator();
        Ok(a.basis.vstack(&b.basis).kernel())
    }

    /// Sum and intersection together.
    pub fn lattice(&self, other: &Self) -> Result<(Self, Self)> {
        Ok((self.sum(other)?, self.intersection(other)?))
    }

    /// Extends `self` by canonical basis vectors of `larger`, in order, keeping those that
    /// enlarge the span. The returned subspace meets `self` trivially and together they span
    /// `larger`.
    pub fn complement_in(&self, larger: &Self) -> Result<Self> {
        self.check_ambient(larger)?;
        if !self.is_subspace_of(larger) {
            return Err(Error::DimensionMismatch(
                "complement requested inside a space that does not contain the subspace".into(),
            ));
        }
        let mut span = self.clone();
        let mut chosen = Vec::new();
        for v in larger.basis_vectors() {
            if span.dim() == larger.dim() {
                break;
            }
            if !span.contains_vec(&v) {
                span = span.with_vector(&v);
                chosen.push(v);
            }
        }
        Self::from_vectors(self.field().clone(), self.ambient_dim(), chosen)
    }

    pub fn with_vector(&self, v: &[F::Elem]) -> Self {
        let extra = Matrix::from_rows(self.field().clone(), self.ambient_dim(), vec![v.to_vec()])
            .expect("vector length matches ambient dimension");
        Self::row_space(&self.basis.vstack(&extra))
    }

    /// Image `M·self` of the subspace under the linear map `x ↦ M x`.
    pub fn image(&self, m: &Matrix<F>) -> Self {
        Self::row_space(&self.basis.mul(&m.transpose()))
    }

    pub fn is_invariant_under(&self, m: &Matrix<F>) -> bool {
        let mt = m.transpose();
        let img = self.basis.mul(&mt);
        (0..img.rows()).all(|i| self.contains_vec(img.row(i)))
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.basis.to_strings()
    }
}

impl<F: Field> PartialOrd for Subspace<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by ambient dimension, then dimension, then canonical basis entries.
impl<F: Field> Ord for Subspace<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ambient_dim()
            .cmp(&other.ambient_dim())
            .then(self.dim().cmp(&other.dim()))
            .then_with(|| self.basis.entries().cmp(other.basis.entries()))
    }
}

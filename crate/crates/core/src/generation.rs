//! Closure of a tuple under multiplication and the involution, the generation test, and
//! detection of ρ-invariant subspaces.

use std::collections::{BTreeMap, VecDeque};

use crate::bilinear::BilinearSpace;
use crate::census::{gaussian_binomial, rref_rows_invariant, SubspaceEnumerator};
use crate::error::{Error, Result};
use crate::field::{Field, PrimeField};
use crate::matrix::Matrix;
use crate::subspace::Subspace;

pub use crate::census::DEFAULT_SUBSPACE_CAP;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorTuple<F: Field> {
    space: BilinearSpace<F>,
    mats: Vec<Matrix<F>>,
}

impl<F: Field> GeneratorTuple<F> {
    pub fn new(space: BilinearSpace<F>, mats: Vec<Matrix<F>>) -> Result<Self> {
        let n = space.n();
        for (i, m) in mats.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "matrix {i} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
            if m.field() != space.field() {
                return Err(Error::InvalidField(format!("matrix {i} is over another field")));
            }
        }
        Ok(GeneratorTuple { space, mats })
    }

    pub fn space(&self) -> &BilinearSpace<F> {
        &self.space
    }

    pub fn mats(&self) -> &[Matrix<F>] {
        &self.mats
    }

    pub fn r(&self) -> usize {
        self.mats.len()
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    /// `A_1, …, A_r, ρ(A_1), …, ρ(A_r)`.
    pub fn with_adjoints(&self) -> Vec<Matrix<F>> {
        let mut out = self.mats.clone();
        out.extend(
            self.mats
                .iter()
                .map(|a| self.space.adjoint(a).expect("square of the right size")),
        );
        out
    }

    pub fn push(&mut self, m: Matrix<F>) -> Result<()> {
        let mut mats = std::mem::take(&mut self.mats);
        mats.push(m);
        *self = GeneratorTuple::new(self.space.clone(), mats)?;
        Ok(())
    }
}

/// Incrementally maintained basis in reduced echelon form: each stored vector has a pivot
/// entry equal to 1 and is zero at the pivots of all other vectors. Keeping it fully
/// reduced bounds the size of rational entries.
struct EchelonSpan<F: Field> {
    field: F,
    rows: Vec<Vec<F::Elem>>,
    pivots: Vec<usize>,
}

impl<F: Field> EchelonSpan<F> {
    fn new(field: F) -> Self {
        EchelonSpan {
            field,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    fn eliminate(f: &F, v: &mut [F::Elem], row: &[F::Elem], p: usize) {
        if f.is_zero(&v[p]) {
            return;
        }
        let c = v[p].clone();
        for (x, y) in v.iter_mut().zip(row) {
            if !f.is_zero(y) {
                *x = f.sub(x, &f.mul(&c, y));
            }
        }
    }

    /// Adds `v` to the span; returns the new stored vector if the span grew.
    fn insert(&mut self, mut v: Vec<F::Elem>) -> Option<&Vec<F::Elem>> {
        let f = &self.field;
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            Self::eliminate(f, &mut v, row, p);
        }
        let p = v.iter().position(|x| !f.is_zero(x))?;
        let inv = f.inv(&v[p]).expect("nonzero");
        for x in v.iter_mut() {
            *x = f.mul(x, &inv);
        }
        for row in self.rows.iter_mut() {
            Self::eliminate(f, row, &v, p);
        }
        self.rows.push(v);
        self.pivots.push(p);
        self.rows.last()
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureReport<F: Field> {
    pub dim: usize,
    /// The closure as a subspace of the `n²`-dimensional matrix space (row-major flattening).
    pub basis: Subspace<F>,
    pub generates: bool,
}

impl<F: Field> ClosureReport<F> {
    /// Basis elements reshaped into `n × n` matrices.
    pub fn basis_matrices(&self, n: usize) -> Vec<Matrix<F>> {
        self.basis
            .basis_vectors()
            .into_iter()
            .map(|v| Matrix::new(self.basis.field().clone(), n, n, v).expect("n² entries"))
            .collect()
    }
}

/// Smallest subspace of matrices containing `I`, every `A_i` and `ρ(A_i)`, closed under
/// left multiplication by those generators. Containing `I` makes it the generated
/// subalgebra; it is stable under `ρ` because `ρ` reverses products.
pub fn involution_closure<F: Field>(t: &GeneratorTuple<F>) -> ClosureReport<F> {
    let f = t.space().field().clone();
    let n = t.n();
    let gens = t.with_adjoints();
    let mut span = EchelonSpan::new(f.clone());
    // breadth first, so that words stay short and rational entries small
    let mut queue: VecDeque<Matrix<F>> = VecDeque::new();
    let seeds = std::iter::once(Matrix::identity(f.clone(), n)).chain(gens.iter().cloned());
    for s in seeds {
        if let Some(v) = span.insert(s.into_entries()) {
            queue.push_back(Matrix::new(f.clone(), n, n, v.clone()).expect("n² entries"));
        }
    }
    while let Some(b) = queue.pop_front() {
        if span.dim() == n * n {
            break;
        }
        for g in &gens {
            let prod = g.mul(&b);
            if let Some(v) = span.insert(prod.into_entries()) {
                queue.push_back(Matrix::new(f.clone(), n, n, v.clone()).expect("n² entries"));
            }
        }
    }
    let dim = span.dim();
    let basis = Subspace::from_vectors(f, n * n, span.rows).expect("n² entries");
    ClosureReport {
        dim,
        basis,
        generates: dim == n * n,
    }
}

pub fn generates<F: Field>(t: &GeneratorTuple<F>) -> bool {
    involution_closure(t).generates
}

/// `A_i W ⊆ W` and `A_i W⊥ ⊆ W⊥` for every `i`.
pub fn is_rho_invariant<F: Field>(t: &GeneratorTuple<F>, w: &Subspace<F>) -> Result<bool> {
    let wp = t.space().perp(w)?;
    Ok(t
        .mats()
        .iter()
        .all(|a| w.is_invariant_under(a) && wp.is_invariant_under(a)))
}

/// The defining formulation: `A_i W ⊆ W` and `ρ(A_i) W ⊆ W` for every `i`.
pub fn is_rho_invariant_via_adjoint<F: Field>(t: &GeneratorTuple<F>, w: &Subspace<F>) -> Result<bool> {
    if w.ambient_dim() != t.n() {
        return Err(Error::AmbientMismatch {
            expected: t.n(),
            found: w.ambient_dim(),
        });
    }
    Ok(t.with_adjoints().iter().all(|a| w.is_invariant_under(a)))
}

/// Total number of subspaces of dimensions `1..=d_max` in `F_q^n`, saturating.
fn subspace_total(q: u64, n: usize, d_max: usize) -> u128 {
    (1..=d_max).fold(0u128, |acc, d| acc.saturating_add(gaussian_binomial(q, n, d)))
}

/// Every ρ-invariant subspace of dimension `1..=min(d_max, ⌊n/2⌋)` over F_p, found by
/// enumerating all subspaces, grouped by `(d, l)` and sorted.
pub fn invariant_profile(
    t: &GeneratorTuple<PrimeField>,
    d_max: usize,
    cap: u64,
) -> Result<BTreeMap<(usize, usize), Vec<Subspace<PrimeField>>>> {
    let f = *t.space().field();
    let n = t.n();
    let top = d_max.min(n / 2);
    let total = subspace_total(f.modulus(), n, top);
    if total > cap as u128 {
        return Err(Error::EnumerationTooLarge {
            count: total.to_string(),
            cap,
        });
    }
    let mats: Vec<Vec<u64>> = t
        .with_adjoints()
        .into_iter()
        .map(|m| m.into_entries())
        .collect();
    let mut out: BTreeMap<(usize, usize), Vec<Subspace<PrimeField>>> = BTreeMap::new();
    for d in 1..=top {
        let mut it = SubspaceEnumerator::new(f, n, d);
        while let Some((rows, pivots)) = it.next_raw() {
            if rref_rows_invariant(f.modulus(), n, rows, pivots, &mats) {
                let w = it.current_subspace();
                let l = t.space().iso_radical(&w)?.1;
                out.entry((d, l)).or_default().push(w);
            }
        }
    }
    for v in out.values_mut() {
        v.sort();
    }
    Ok(out)
}

/// Every ρ-invariant subspace over F_p including `0`, `V` and the perps of the
/// low-dimensional ones, sorted and deduplicated.
pub fn all_invariant_subspaces(
    t: &GeneratorTuple<PrimeField>,
    cap: u64,
) -> Result<Vec<Subspace<PrimeField>>> {
    let f = *t.space().field();
    let n = t.n();
    let mut all = vec![Subspace::zero(f, n), Subspace::full(f, n)];
    for list in invariant_profile(t, n, cap)?.into_values() {
        for w in list {
            all.push(t.space().perp(&w)?);
            all.push(w);
        }
    }
    all.sort();
    all.dedup();
    Ok(all)
}

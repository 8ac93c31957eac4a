//! Closed-form dimensions of the nongenerating strata, the component census, extremal
//! values, and a Lie-algebra oracle for the Grassmannian dimensions.
//!
//! A stratum is indexed by the form kind, `n`, the subspace dimension `d`, its isotropy
//! rank `l` and the tuple length `r`.

use serde::{Deserialize, Serialize};

use crate::bilinear::{BilinearSpace, FormKind};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Matrix;
use crate::subspace::Subspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StratumKey {
    pub kind: FormKind,
    pub n: usize,
    pub d: usize,
    pub l: usize,
    pub r: usize,
}

/// `0 ≤ l ≤ min(d, n − d)`, and for skew forms `n` even with `l ≡ d (mod 2)`.
pub fn stratum_nonempty(kind: FormKind, n: usize, d: usize, l: usize) -> bool {
    if d > n || l > d.min(n - d) {
        return false;
    }
    match kind {
        FormKind::Symmetric => true,
        FormKind::Skew => n % 2 == 0 && (d - l) % 2 == 0,
    }
}

fn empty(kind: FormKind, n: usize, d: usize, l: usize) -> Error {
    Error::EmptyStratum(format!("{kind} n={n} d={d} l={l}"))
}

/// Dimension of the variety of `d`-planes with isotropy rank `l`:
/// `d(n−d) − (l²+l)/2` (symmetric) or `d(n−d) − (l²−l)/2` (skew).
pub fn dim_grassmannian(kind: FormKind, n: usize, d: usize, l: usize) -> Result<u64> {
    if !stratum_nonempty(kind, n, d, l) {
        return Err(empty(kind, n, d, l));
    }
    let (n, d, l) = (n as u64, d as u64, l as u64);
    let correction = match kind {
        FormKind::Symmetric => (l * l + l) / 2,
        FormKind::Skew => (l * l - l) / 2,
    };
    Ok(d * (n - d) - correction)
}

/// Dimension of the affine space of `r`-tuples leaving a fixed `W` invariant:
/// `r((n−d)² + d² + l²)`.
pub fn dim_zwr(n: usize, d: usize, l: usize, r: usize) -> Result<u64> {
    if d > n || l > d.min(n - d) {
        return Err(Error::EmptyStratum(format!("n={n} d={d} l={l}")));
    }
    let (n, d, l, r) = (n as u64, d as u64, l as u64, r as u64);
    Ok(r * ((n - d).pow(2) + d * d + l * l))
}

pub fn dim_stratum(key: &StratumKey) -> Result<u64> {
    Ok(dim_grassmannian(key.kind, key.n, key.d, key.l)? + dim_zwr(key.n, key.d, key.l, key.r)?)
}

/// Number of irreducible components of a nonempty stratum: two for the symmetric
/// middle-dimension totally isotropic stratum, one otherwise.
pub fn component_count(kind: FormKind, n: usize, d: usize, l: usize) -> u32 {
    if kind == FormKind::Symmetric && 2 * d == n && l == d {
        2
    } else {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumRow {
    pub d: usize,
    pub l: usize,
    pub dim_gr: u64,
    pub dim_zwr: u64,
    pub dim_z: u64,
    pub components: u32,
}

/// Every nonempty stratum with `1 ≤ d ≤ ⌊n/2⌋`, ordered by `d` then `l`.
pub fn stratum_table(kind: FormKind, n: usize, r: usize) -> Vec<StratumRow> {
    let mut rows = Vec::new();
    for d in 1..=n / 2 {
        for l in 0..=d {
            if !stratum_nonempty(kind, n, d, l) {
                continue;
            }
            let dim_gr = dim_grassmannian(kind, n, d, l).expect("nonempty");
            let dim_zwr = dim_zwr(n, d, l, r).expect("nonempty");
            rows.push(StratumRow {
                d,
                l,
                dim_gr,
                dim_zwr,
                dim_z: dim_gr + dim_zwr,
                components: component_count(kind, n, d, l),
            });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub label: String,
    pub d: usize,
    pub l: usize,
    pub dim: u64,
    pub component_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCensus {
    pub kind: FormKind,
    pub n: usize,
    pub r: usize,
    pub records: Vec<CensusRecord>,
}

impl ComponentCensus {
    pub fn max_dim(&self) -> Option<u64> {
        self.records.iter().map(|r| r.dim).max()
    }
}

/// The closed cover of the nongenerating locus: the totally isotropic strata
/// `Z(d,d,r)` for `d = 1..⌊n/2⌋` and the closures of the anisotropic strata `Z(0,d,r)`
/// for `d` in the index set (all `d ≤ n/2`, even `d` only for skew forms).
pub fn component_census(kind: FormKind, n: usize, r: usize) -> ComponentCensus {
    let mut records = Vec::new();
    for d in 1..=n / 2 {
        if stratum_nonempty(kind, n, d, d) {
            records.push(CensusRecord {
                label: format!("Z({d},{d},{r})"),
                d,
                l: d,
                dim: dim_stratum(&StratumKey { kind, n, d, l: d, r }).expect("nonempty"),
                component_count: component_count(kind, n, d, d),
            });
        }
    }
    for d in 1..=n / 2 {
        if stratum_nonempty(kind, n, d, 0) {
            records.push(CensusRecord {
                label: format!("closure Z(0,{d},{r})"),
                d,
                l: 0,
                dim: dim_stratum(&StratumKey { kind, n, d, l: 0, r }).expect("nonempty"),
                component_count: 1,
            });
        }
    }
    ComponentCensus {
        kind,
        n,
        r,
        records,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StratumIndex {
    pub l: usize,
    pub d: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extremal {
    pub max_dim: u64,
    /// Strata attaining the maximum, as `(l, d)` with `d ≤ n/2`, sorted.
    pub argmax: Vec<StratumIndex>,
    /// `r n² − max_dim`.
    pub codim: u64,
}

/// Maximum stratum dimension over all nonempty strata with `1 ≤ d ≤ ⌊n/2⌋`.
/// `None` when there is no nonempty stratum (`n < 2`, or odd `n` for skew forms).
pub fn extremal_dims(kind: FormKind, n: usize, r: usize) -> Option<Extremal> {
    let table = stratum_table(kind, n, r);
    let max_dim = table.iter().map(|row| row.dim_z).max()?;
    let mut argmax: Vec<StratumIndex> = table
        .iter()
        .filter(|row| row.dim_z == max_dim)
        .map(|row| StratumIndex { l: row.l, d: row.d })
        .collect();
    argmax.sort();
    Some(Extremal {
        max_dim,
        argmax,
        codim: (r * n * n) as u64 - max_dim,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LieOracle {
    pub d: usize,
    pub l: usize,
    /// Dimension of the Lie algebra of the isometry group, `{X : XᵀQ + QX = 0}`.
    pub dim_g: usize,
    /// Dimension of the stabilizer subalgebra `{X ∈ g : XW ⊆ W}`.
    pub dim_h: usize,
    pub codim: usize,
}

/// Solves the linear systems defining the isometry Lie algebra and the stabilizer of `W`
/// in `n²` unknowns and reports their dimensions.
pub fn lie_codim_oracle<F: Field>(space: &BilinearSpace<F>, w: &Subspace<F>) -> Result<LieOracle> {
    let (d, l) = space.profile(w)?;
    let f = space.field().clone();
    let n = space.n();
    let q = space.gram();
    let idx = |i: usize, j: usize| i * n + j;
    let mut rows: Vec<Vec<F::Elem>> = Vec::new();
    // (XᵀQ + QX)_{ab} = Σ_k X_{ka} Q_{kb} + Σ_k Q_{ak} X_{kb}
    for a in 0..n {
        for b in 0..n {
            let mut row = vec![f.zero(); n * n];
            for k in 0..n {
                row[idx(k, a)] = f.add(&row[idx(k, a)], &q[(k, b)]);
                row[idx(k, b)] = f.add(&row[idx(k, b)], &q[(a, k)]);
            }
            rows.push(row);
        }
    }
    let g_sys = Matrix::from_rows(f.clone(), n * n, rows.clone())?;
    let dim_g = n * n - g_sys.rank();
    // y·(X w) = 0 for annihilator rows y of W and basis vectors w
    let ann = w.annihilator();
    for y in ann.basis_vectors() {
        for wv in w.basis_vectors() {
            let mut row = vec![f.zero(); n * n];
            for i in 0..n {
                for j in 0..n {
                    row[idx(i, j)] = f.mul(&y[i], &wv[j]);
                }
            }
            rows.push(row);
        }
    }
    let h_sys = Matrix::from_rows(f, n * n, rows)?;
    let dim_h = n * n - h_sys.rank();
    Ok(LieOracle {
        d,
        l,
        dim_g,
        dim_h,
        codim: dim_g - dim_h,
    })
}

//! Bilinear spaces `(F^n, ⟨·,·⟩)` with `⟨v, w⟩ = vᵀ Q w`, perps, isotropic radicals,
//! decompositions into standard pieces, standard bases and the adjoint involution
//! `ρ(A) = Q⁻¹ Aᵀ Q`.
//!
//! Subspace bases are rows, so the Gram matrix of a list of vectors `B` is `B Q Bᵀ`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{dot, vec_scale, vec_sub, Matrix};
use crate::subspace::Subspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Symmetric,
    Skew,
}

impl FormKind {
    pub fn parse(s: &str) -> Result<FormKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "symmetric" | "sym" | "orthogonal" => Ok(FormKind::Symmetric),
            "skew" | "alternating" | "symplectic" | "skew-symmetric" => Ok(FormKind::Skew),
            other => Err(Error::Parse(format!("unknown form kind '{other}'"))),
        }
    }
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormKind::Symmetric => "symmetric",
            FormKind::Skew => "skew",
        })
    }
}

/// Block-diagonal `diag(Ω₂, …, Ω₂)` with `Ω₂ = [[0, −1], [1, 0]]`.
pub fn standard_skew_gram<F: Field>(field: F, n: usize) -> Matrix<F> {
    assert!(n % 2 == 0, "skew forms need even dimension");
    let mut m = Matrix::zeros(field, n, n);
    for k in (0..n).step_by(2) {
        m[(k, k + 1)] = m.field().neg(&m.field().one());
        m[(k + 1, k)] = m.field().one();
    }
    m
}

/// Symmetric Gram with ones on the anti-diagonal. It has maximal Witt index over every
/// field, so isotropic subspaces of every admissible rank exist even over ℚ or F_3.
pub fn split_symmetric_gram<F: Field>(field: F, n: usize) -> Matrix<F> {
    let mut m = Matrix::zeros(field, n, n);
    for i in 0..n {
        m[(i, n - 1 - i)] = m.field().one();
    }
    m
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilinearSpace<F: Field> {
    kind: FormKind,
    gram: Matrix<F>,
    gram_inv: Matrix<F>,
}

impl<F: Field> BilinearSpace<F> {
    pub fn new(kind: FormKind, gram: Matrix<F>) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::InvalidSpace("gram: not square".into()));
        }
        let expected = match kind {
            FormKind::Symmetric => gram.clone(),
            FormKind::Skew => gram.neg(),
        };
        if gram.transpose() != expected {
            return Err(Error::InvalidSpace(format!("gram: not {kind}")));
        }
        if kind == FormKind::Skew && gram.rows() % 2 == 1 {
            return Err(Error::InvalidSpace("gram: skew forms need even dimension".into()));
        }
        let gram_inv = gram
            .inverse()
            .ok_or_else(|| Error::InvalidSpace("gram: singular".into()))?;
        Ok(BilinearSpace {
            kind,
            gram,
            gram_inv,
        })
    }

    /// Identity Gram (symmetric) or `diag(Ω₂, …)` (skew).
    pub fn standard(field: F, n: usize, kind: FormKind) -> Result<Self> {
        match kind {
            FormKind::Symmetric => Self::new(kind, Matrix::identity(field, n)),
            FormKind::Skew => {
                if n % 2 == 1 {
                    return Err(Error::InvalidSpace(
                        "gram: skew forms need even dimension".into(),
                    ));
                }
                Self::new(kind, standard_skew_gram(field, n))
            }
        }
    }

    pub fn split_symmetric(field: F, n: usize) -> Self {
        Self::new(FormKind::Symmetric, split_symmetric_gram(field, n))
            .expect("anti-diagonal Gram is a valid symmetric form")
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.gram.rows()
    }

    pub fn field(&self) -> &F {
        self.gram.field()
    }

    pub fn gram(&self) -> &Matrix<F> {
        &self.gram
    }

    pub fn form(&self, v: &[F::Elem], w: &[F::Elem]) -> F::Elem {
        dot(self.field(), v, &self.gram.mul_vec(w))
    }

    /// `B Q Bᵀ` for vectors given as the rows of `b`.
    pub fn gram_of(&self, b: &Matrix<F>) -> Matrix<F> {
        b.mul(&self.gram).mul(&b.transpose())
    }

    fn check(&self, w: &Subspace<F>) -> Result<()> {
        if w.ambient_dim() != self.n() {
            return Err(Error::AmbientMismatch {
                expected: self.n(),
                found: w.ambient_dim(),
            });
        }
        Ok(())
    }

    /// `W⊥ = {x : ⟨w, x⟩ = 0 for all w ∈ W}`.
    pub fn perp(&self, w: &Subspace<F>) -> Result<Subspace<F>> {
        self.check(w)?;
        Ok(w.basis().mul(&self.gram).kernel())
    }

    /// `W ∩ W⊥` and its dimension, the isotropy rank.
    pub fn iso_radical(&self, w: &Subspace<F>) -> Result<(Subspace<F>, usize)> {
        let rad = w.intersection(&self.perp(w)?)?;
        let l = rad.dim();
        Ok((rad, l))
    }

    /// `(dim W, isotropy rank)`.
    pub fn profile(&self, w: &Subspace<F>) -> Result<(usize, usize)> {
        Ok((w.dim(), self.iso_radical(w)?.1))
    }

    pub fn is_nondegenerate(&self, w: &Subspace<F>) -> Result<bool> {
        Ok(self.iso_radical(w)?.1 == 0)
    }

    /// `ρ(A) = Q⁻¹ Aᵀ Q`.
    pub fn adjoint(&self, a: &Matrix<F>) -> Result<Matrix<F>> {
        if a.rows() != self.n() || a.cols() != self.n() {
            return Err(Error::AmbientMismatch {
                expected: self.n(),
                found: a.rows().max(a.cols()),
            });
        }
        Ok(self.gram_inv.mul(&a.transpose()).mul(&self.gram))
    }

    /// `gᵀ Q g = Q`.
    pub fn is_isometry(&self, g: &Matrix<F>) -> bool {
        g.transpose().mul(&self.gram).mul(g) == self.gram
    }

    /// Vectors `c_1..c_k` inside `within` with `⟨b_i, c_j⟩ = δ_ij` and `⟨c_i, c_j⟩ = 0`,
    /// built one at a time: solve for `c'`, then subtract `λ b_i` where `⟨c', c'⟩ = 2λ`.
    fn hyperbolic_partners(
        &self,
        iso: &[Vec<F::Elem>],
        within: &Subspace<F>,
    ) -> Result<Vec<Vec<F::Elem>>> {
        let f = self.field().clone();
        let nb = within.basis();
        let two_inv = f.inv(&f.from_i64(2)).expect("characteristic is not 2");
        let mut partners: Vec<Vec<F::Elem>> = Vec::new();
        for i in 0..iso.len() {
            // unknowns y with c' = yᵀ N; constraints ⟨b_j, c'⟩ and ⟨c_j, c'⟩
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for (j, b) in iso.iter().enumerate() {
                rows.push(nb.mul_vec(&self.gram.transpose().mul_vec(b)));
                rhs.push(if i == j { f.one() } else { f.zero() });
            }
            for c in &partners {
                rows.push(nb.mul_vec(&self.gram.transpose().mul_vec(c)));
                rhs.push(f.zero());
            }
            let sys = Matrix::from_rows(f.clone(), nb.rows(), rows)?;
            let y = sys.solve(&rhs)?;
            let c_prime = nb.vec_mul(&y);
            let lambda = f.mul(&self.form(&c_prime, &c_prime), &two_inv);
            partners.push(vec_sub(&f, &c_prime, &vec_scale(&f, &lambda, &iso[i])));
        }
        Ok(partners)
    }

    /// A totally isotropic `C` paired perfectly with the totally isotropic `W`; the
    /// pairing matrix between the canonical basis of `W` and the returned basis vectors is
    /// the identity.
    pub fn hyperbolic_complement(&self, w: &Subspace<F>) -> Result<Subspace<F>> {
        Ok(self.hyperbolic_basis(w)?.1)
    }

    /// As [`hyperbolic_complement`](Self::hyperbolic_complement), also returning the paired vectors.
    pub fn hyperbolic_basis(&self, w: &Subspace<F>) -> Result<(Vec<Vec<F::Elem>>, Subspace<F>)> {
        self.check(w)?;
        if self.iso_radical(w)?.1 != w.dim() {
            return Err(Error::NotTotallyIsotropic);
        }
        let full = Subspace::full(self.field().clone(), self.n());
        let c = self.hyperbolic_partners(&w.basis_vectors(), &full)?;
        let sub = Subspace::from_vectors(self.field().clone(), self.n(), c.clone())?;
        Ok((c, sub))
    }

    fn raw_decomposition(&self, w: &Subspace<F>) -> Result<RawDecomposition<F>> {
        self.check(w)?;
        let wp = self.perp(w)?;
        let iso = w.intersection(&wp)?;
        let wa = iso.complement_in(w)?;
        let wb = iso.complement_in(&wp)?;
        let within = self.perp(&wa.sum(&wb)?)?;
        let iso_vecs = iso.basis_vectors();
        let c_vecs = self.hyperbolic_partners(&iso_vecs, &within)?;
        Ok(RawDecomposition {
            iso,
            wa,
            wb,
            iso_vecs,
            c_vecs,
        })
    }

    /// `V = Iso(W) ⊕ W_a ⊕ W_b ⊕ C` with `W = Iso(W) ⊕ W_a`, `W⊥ = Iso(W) ⊕ W_b`.
    pub fn decompose(&self, w: &Subspace<F>) -> Result<Decomposition<F>> {
        let raw = self.raw_decomposition(w)?;
        let c = Subspace::from_vectors(self.field().clone(), self.n(), raw.c_vecs)?;
        Ok(Decomposition {
            iso: raw.iso,
            wa: raw.wa,
            wb: raw.wb,
            c,
        })
    }

    /// Orthogonal basis of a nondegenerate subspace (symmetric forms).
    pub fn orthogonal_basis(&self, n_space: &Subspace<F>) -> Result<Vec<Vec<F::Elem>>> {
        let f = self.field().clone();
        let mut rest = n_space.clone();
        let mut out = Vec::new();
        while !rest.is_zero() {
            let v = self.anisotropic_vector(&rest).ok_or_else(|| {
                Error::InvalidSpace("subspace is degenerate for the form".into())
            })?;
            let line = Subspace::from_vectors(f.clone(), self.n(), vec![v.clone()])?;
            rest = rest.intersection(&self.perp(&line)?)?;
            out.push(v);
        }
        Ok(out)
    }

    fn anisotropic_vector(&self, s: &Subspace<F>) -> Option<Vec<F::Elem>> {
        let f = self.field();
        let b = s.basis_vectors();
        if let Some(v) = b.iter().find(|v| !f.is_zero(&self.form(v, v))) {
            return Some(v.clone());
        }
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                let v: Vec<_> = b[i].iter().zip(&b[j]).map(|(x, y)| f.add(x, y)).collect();
                if !f.is_zero(&self.form(&v, &v)) {
                    return Some(v);
                }
            }
        }
        None
    }

    /// Symplectic pairs `(x, y)` with `⟨x, y⟩ = −1` spanning a nondegenerate subspace
    /// (skew forms), mutually orthogonal across pairs.
    pub fn symplectic_pairs(&self, n_space: &Subspace<F>) -> Result<Vec<(Vec<F::Elem>, Vec<F::Elem>)>> {
        let f = self.field().clone();
        let minus_one = f.neg(&f.one());
        let mut rest = n_space.clone();
        let mut out = Vec::new();
        while !rest.is_zero() {
            let b = rest.basis_vectors();
            let x = b[0].clone();
            let (y, val) = b[1..]
                .iter()
                .map(|y| (y.clone(), self.form(&x, y)))
                .find(|(_, v)| !f.is_zero(v))
                .ok_or_else(|| Error::InvalidSpace("subspace is degenerate for the form".into()))?;
            let s = f.div(&minus_one, &val).expect("nonzero");
            let y = vec_scale(&f, &s, &y);
            let pair = Subspace::from_vectors(f.clone(), self.n(), vec![x.clone(), y.clone()])?;
            rest = rest.intersection(&self.perp(&pair)?)?;
            out.push((x, y));
        }
        Ok(out)
    }

    /// Orthogonal basis of a nondegenerate subspace with norms normalized to 1 where
    /// square roots allow. Over F_p two non-square norms are merged into a pair of unit
    /// vectors. Returns the vectors and their norms.
    fn normalized_orthogonal_basis(
        &self,
        n_space: &Subspace<F>,
    ) -> Result<(Vec<Vec<F::Elem>>, Vec<F::Elem>)> {
        let f = self.field().clone();
        let basis = self.orthogonal_basis(n_space)?;
        let mut vecs = Vec::new();
        let mut norms = Vec::new();
        let mut pending: Option<(Vec<F::Elem>, F::Elem)> = None;
        for v in basis {
            let a = self.form(&v, &v);
            if let Some(s) = f.sqrt(&a) {
                let si = f.inv(&s).expect("nonzero norm");
                vecs.push(vec_scale(&f, &si, &v));
                norms.push(f.one());
                continue;
            }
            match pending.take() {
                None => pending = Some((v, a)),
                Some((u, b)) => match self.merge_nonsquares(&u, &b, &v, &a) {
                    Some((x, y)) => {
                        vecs.push(x);
                        vecs.push(y);
                        norms.push(f.one());
                        norms.push(f.one());
                    }
                    None => {
                        vecs.push(u);
                        norms.push(b);
                        pending = Some((v, a));
                    }
                },
            }
        }
        if let Some((u, b)) = pending {
            vecs.push(u);
            norms.push(b);
        }
        Ok((vecs, norms))
    }

    /// For orthogonal `u`, `v` with non-square norms `b`, `a`: unit orthogonal vectors
    /// spanning the same plane, found by solving `b s² + a t² = 1` over a finite field.
    fn merge_nonsquares(
        &self,
        u: &[F::Elem],
        b: &F::Elem,
        v: &[F::Elem],
        a: &F::Elem,
    ) -> Option<(Vec<F::Elem>, Vec<F::Elem>)> {
        let f = self.field();
        let q = f.order()?;
        let one = f.one();
        let ab = f.mul(a, b);
        let root_ab = f.sqrt(&ab)?;
        for i in 0..q {
            let t = f.element(i);
            // b s² = 1 − a t²
            let rhs = f.sub(&one, &f.mul(a, &f.mul(&t, &t)));
            let s2 = f.div(&rhs, b)?;
            let Some(s) = f.sqrt(&s2) else { continue };
            let x: Vec<_> = u
                .iter()
                .zip(v)
                .map(|(ui, vi)| f.add(&f.mul(&s, ui), &f.mul(&t, vi)))
                .collect();
            // y = −a t u + b s v has norm ab(a t² + b s²) = ab
            let na_t = f.neg(&f.mul(a, &t));
            let b_s = f.mul(b, &s);
            let scale = f.inv(&root_ab)?;
            let y: Vec<_> = u
                .iter()
                .zip(v)
                .map(|(ui, vi)| f.mul(&scale, &f.add(&f.mul(&na_t, ui), &f.mul(&b_s, vi))))
                .collect();
            return Some((x, y));
        }
        None
    }

    /// Ordered basis putting `W` into standard position. See [`Layout`] for the block shapes.
    pub fn nice_basis(&self, w: &Subspace<F>, layout: Layout, mode: NormMode) -> Result<NiceBasis<F>> {
        let f = self.field().clone();
        let raw = self.raw_decomposition(w)?;
        let d = w.dim();
        let l = raw.iso.dim();
        let mut rows: Vec<Vec<F::Elem>> = Vec::with_capacity(self.n());
        let mut middle_norms = Vec::new();
        let standard;
        match (self.kind, layout) {
            (FormKind::Symmetric, Layout::Interleaved) => {
                return Err(Error::InvalidSpace(
                    "interleaved layout needs a skew form".into(),
                ))
            }
            (FormKind::Symmetric, Layout::Blocked) => {
                let (va, na) = self.normalized_orthogonal_basis(&raw.wa)?;
                let (vb, nb) = self.normalized_orthogonal_basis(&raw.wb)?;
                middle_norms.extend(na);
                middle_norms.extend(nb);
                standard = middle_norms.iter().all(|x| f.is_one(x));
                if !standard && mode == NormMode::Strict {
                    let bad = middle_norms.iter().find(|x| !f.is_one(x)).expect("exists");
                    return Err(Error::NonSquareScalar(f.format(bad)));
                }
                rows.extend(raw.iso_vecs.iter().cloned());
                rows.extend(va);
                rows.extend(vb);
                rows.extend(raw.c_vecs.iter().cloned());
            }
            (FormKind::Skew, layout) => {
                standard = true;
                let pa = self.symplectic_pairs(&raw.wa)?;
                let pb = self.symplectic_pairs(&raw.wb)?;
                let neg_c: Vec<Vec<F::Elem>> = raw
                    .c_vecs
                    .iter()
                    .map(|c| c.iter().map(|x| f.neg(x)).collect())
                    .collect();
                match layout {
                    Layout::Blocked => {
                        rows.extend(raw.iso_vecs.iter().cloned());
                        for (x, y) in pa.iter().chain(&pb) {
                            rows.push(x.clone());
                            rows.push(y.clone());
                        }
                        rows.extend(neg_c);
                    }
                    Layout::Interleaved => {
                        rows.extend(pa.iter().map(|p| p.0.clone()));
                        rows.extend(raw.iso_vecs.iter().cloned());
                        rows.extend(pb.iter().map(|p| p.0.clone()));
                        rows.extend(pa.iter().map(|p| p.1.clone()));
                        rows.extend(neg_c);
                        rows.extend(pb.iter().map(|p| p.1.clone()));
                    }
                }
            }
        }
        let basis = Matrix::from_rows(f.clone(), self.n(), rows)?;
        let gram = self.gram_of(&basis);
        let target = match layout {
            Layout::Blocked => blocked_target(&f, self.kind, self.n(), l, &middle_norms),
            Layout::Interleaved => interleaved_target(&f, self.n()),
        };
        debug_assert_eq!(gram, target, "standard basis construction is inconsistent");
        if gram != target {
            return Err(Error::InvalidSpace("standard basis construction failed".into()));
        }
        Ok(NiceBasis {
            basis,
            gram,
            d,
            l,
            layout,
            standard,
        })
    }

    /// An isometry `g` with `gU = W` and `gU⊥ = W⊥`, mapping the standard basis of `U` onto
    /// that of `W`.
    pub fn transporter(&self, u: &Subspace<F>, w: &Subspace<F>) -> Result<Matrix<F>> {
        let pu = self.profile(u)?;
        let pw = self.profile(w)?;
        if pu != pw {
            return Err(Error::ProfileMismatch(format!(
                "(d, l) = {pu:?} versus {pw:?}"
            )));
        }
        let bu = self.nice_basis(u, Layout::Blocked, NormMode::Strict)?;
        let bw = self.nice_basis(w, Layout::Blocked, NormMode::Strict)?;
        if bu.gram != bw.gram {
            return Err(Error::FormMismatch);
        }
        let bt_inv = bu
            .basis
            .transpose()
            .inverse()
            .expect("a basis matrix is invertible");
        let g = bw.basis.transpose().mul(&bt_inv);
        debug_assert!(self.is_isometry(&g));
        Ok(g)
    }

    /// First vector of a nondegenerate subspace that is isotropic, if one can be found.
    fn isotropic_vector(&self, s: &Subspace<F>) -> Result<Option<Vec<F::Elem>>> {
        let f = self.field().clone();
        if s.is_zero() {
            return Ok(None);
        }
        if self.kind == FormKind::Skew {
            return Ok(Some(s.basis_vectors()[0].clone()));
        }
        if let Some(v) = s
            .basis_vectors()
            .into_iter()
            .find(|v| f.is_zero(&self.form(v, v)))
        {
            return Ok(Some(v));
        }
        let u = self.orthogonal_basis(s)?;
        let norms: Vec<F::Elem> = u.iter().map(|v| self.form(v, v)).collect();
        let combine = |coefs: &[(usize, F::Elem)]| -> Vec<F::Elem> {
            let mut v = vec![f.zero(); self.n()];
            for (i, c) in coefs {
                for (k, x) in u[*i].iter().enumerate() {
                    v[k] = f.add(&v[k], &f.mul(c, x));
                }
            }
            v
        };
        for i in 0..u.len() {
            for j in i + 1..u.len() {
                // a_i x² + a_j = 0
                let x2 = f.div(&f.neg(&norms[j]), &norms[i]).expect("nonzero");
                if let Some(x) = f.sqrt(&x2) {
                    return Ok(Some(combine(&[(i, x), (j, f.one())])));
                }
            }
        }
        if u.len() >= 3 {
            if let Some(q) = f.order() {
                // a_0 x² + a_1 y² + a_2 = 0 is solvable over every finite field
                for k in 0..q {
                    let y = f.element(k);
                    let rhs = f.neg(&f.add(&norms[2], &f.mul(&norms[1], &f.mul(&y, &y))));
                    let x2 = f.div(&rhs, &norms[0]).expect("nonzero");
                    if let Some(x) = f.sqrt(&x2) {
                        return Ok(Some(combine(&[(0, x), (1, y), (2, f.one())])));
                    }
                }
            }
        }
        Ok(None)
    }

    /// A deterministic subspace of dimension `d` and isotropy rank `l`.
    pub fn subspace_with_profile(&self, d: usize, l: usize) -> Result<Subspace<F>> {
        let n = self.n();
        if !crate::dimensions::stratum_nonempty(self.kind, n, d, l) {
            return Err(Error::EmptyStratum(format!(
                "{} n={n} d={d} l={l}",
                self.kind
            )));
        }
        let f = self.field().clone();
        let mut rest = Subspace::full(f.clone(), n);
        let mut vecs = Vec::new();
        for _ in 0..l {
            let v = self
                .isotropic_vector(&rest)?
                .ok_or(Error::NoSubspaceWithProfile { d, l })?;
            let c = self.hyperbolic_partners(std::slice::from_ref(&v), &rest)?;
            let pair = Subspace::from_vectors(f.clone(), n, vec![v.clone(), c[0].clone()])?;
            rest = rest.intersection(&self.perp(&pair)?)?;
            vecs.push(v);
        }
        match self.kind {
            FormKind::Symmetric => vecs.extend(self.orthogonal_basis(&rest)?.into_iter().take(d - l)),
            FormKind::Skew => {
                for (x, y) in self.symplectic_pairs(&rest)?.into_iter().take((d - l) / 2) {
                    vecs.push(x);
                    vecs.push(y);
                }
            }
        }
        let w = Subspace::from_vectors(f, n, vecs)?;
        debug_assert_eq!(self.profile(&w)?, (d, l));
        Ok(w)
    }

    /// A random isometry: a product of a few Cayley transforms `(I − X)⁻¹(I + X)` of
    /// random Lie algebra elements `X = Q⁻¹S`.
    pub fn random_isometry<R: Rng + ?Sized>(&self, rng: &mut R, factors: usize) -> Matrix<F> {
        let f = self.field().clone();
        let n = self.n();
        let id = Matrix::identity(f.clone(), n);
        let mut g = id.clone();
        let mut made = 0;
        let mut attempts = 0;
        while made < factors && attempts < 64 * factors.max(1) {
            attempts += 1;
            let mut s = Matrix::zeros(f.clone(), n, n);
            for i in 0..n {
                for j in i..n {
                    let x = f.random(rng);
                    match self.kind {
                        FormKind::Symmetric => {
                            if i != j {
                                s[(i, j)] = x.clone();
                                s[(j, i)] = f.neg(&x);
                            }
                        }
                        FormKind::Skew => {
                            s[(i, j)] = x.clone();
                            s[(j, i)] = x;
                        }
                    }
                }
            }
            let x = self.gram_inv.mul(&s);
            let Some(inv) = id.sub(&x).inverse() else {
                continue;
            };
            g = inv.mul(&id.add(&x)).mul(&g);
            made += 1;
        }
        debug_assert!(self.is_isometry(&g));
        g
    }

    /// A random subspace of the given profile: the deterministic one moved by a random isometry.
    pub fn random_subspace_with_profile<R: Rng + ?Sized>(
        &self,
        d: usize,
        l: usize,
        rng: &mut R,
    ) -> Result<Subspace<F>> {
        let w0 = self.subspace_with_profile(d, l)?;
        let g = self.random_isometry(rng, 2);
        Ok(w0.image(&g))
    }
}

struct RawDecomposition<F: Field> {
    iso: Subspace<F>,
    wa: Subspace<F>,
    wb: Subspace<F>,
    iso_vecs: Vec<Vec<F::Elem>>,
    c_vecs: Vec<Vec<F::Elem>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition<F: Field> {
    pub iso: Subspace<F>,
    pub wa: Subspace<F>,
    pub wb: Subspace<F>,
    pub c: Subspace<F>,
}

/// Block layouts for standard bases.
///
/// `Blocked`: rows are `Iso(W)`, `W_a`, `W_b`, `C` and the Gram is
/// `[[0, 0, eI_l], [0, M, 0], [I_l, 0, 0]]` with `e = 1, M = I` (symmetric) or
/// `e = −1, M = diag(Ω₂, …)` (skew).
///
/// `Interleaved` (skew only): rows are `p_1..p_m, q_1..q_m` with Gram `[[0, −I_m], [I_m, 0]]`
/// and `W = span(p_1..p_{l+t}, q_1..q_t)`, `t = (d − l)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Blocked,
    Interleaved,
}

/// Strict mode insists on unit norms in the middle block; weak mode keeps a diagonal
/// middle block when square roots are missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMode {
    Strict,
    Weak,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceBasis<F: Field> {
    /// Basis vectors as rows.
    pub basis: Matrix<F>,
    /// `B Q Bᵀ`.
    pub gram: Matrix<F>,
    pub d: usize,
    pub l: usize,
    pub layout: Layout,
    /// False when weak mode left non-unit norms in the middle block.
    pub standard: bool,
}

impl<F: Field> NiceBasis<F> {
    /// Row indices whose span is `W`.
    pub fn w_indices(&self) -> Vec<usize> {
        match self.layout {
            Layout::Blocked => (0..self.d).collect(),
            Layout::Interleaved => {
                let m = self.basis.rows() / 2;
                let t = (self.d - self.l) / 2;
                (0..self.l + t).chain(m..m + t).collect()
            }
        }
    }
}

fn blocked_target<F: Field>(f: &F, kind: FormKind, n: usize, l: usize, middle: &[F::Elem]) -> Matrix<F> {
    let mut t = Matrix::zeros(f.clone(), n, n);
    let e = match kind {
        FormKind::Symmetric => f.one(),
        FormKind::Skew => f.neg(&f.one()),
    };
    for i in 0..l {
        t[(i, n - l + i)] = e.clone();
        t[(n - l + i, i)] = f.one();
    }
    match kind {
        FormKind::Symmetric => {
            for (k, a) in middle.iter().enumerate() {
                t[(l + k, l + k)] = a.clone();
            }
        }
        FormKind::Skew => {
            for k in (l..n - l).step_by(2) {
                t[(k, k + 1)] = f.neg(&f.one());
                t[(k + 1, k)] = f.one();
            }
        }
    }
    t
}

fn interleaved_target<F: Field>(f: &F, n: usize) -> Matrix<F> {
    let m = n / 2;
    let mut t = Matrix::zeros(f.clone(), n, n);
    for i in 0..m {
        t[(i, m + i)] = f.neg(&f.one());
        t[(m + i, i)] = f.one();
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fp(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn span(p: u64, n: usize, v: Vec<Vec<u64>>) -> Subspace<PrimeField> {
        Subspace::from_vectors(fp(p), n, v).unwrap()
    }

    #[test]
    fn rejects_bad_grams() {
        let f = fp(7);
        let singular = Matrix::from_i64(f, &[&[1, 1], &[1, 1]]);
        assert_eq!(
            BilinearSpace::new(FormKind::Symmetric, singular),
            Err(Error::InvalidSpace("gram: singular".into()))
        );
        let not_sym = Matrix::from_i64(f, &[&[1, 2], &[3, 1]]);
        assert!(BilinearSpace::new(FormKind::Symmetric, not_sym).is_err());
        assert!(BilinearSpace::standard(f, 3, FormKind::Skew).is_err());
    }

    #[test]
    fn perp_examples() {
        let v = BilinearSpace::standard(fp(5), 2, FormKind::Symmetric).unwrap();
        assert!(v.perp(&Subspace::full(fp(5), 2)).unwrap().is_zero());
        let w = span(5, 2, vec![vec![1, 2]]);
        assert_eq!(v.perp(&w).unwrap(), w);
        let s = BilinearSpace::standard(fp(5), 2, FormKind::Skew).unwrap();
        let line = span(5, 2, vec![vec![2, 3]]);
        assert_eq!(s.perp(&line).unwrap(), line);
    }

    #[test]
    fn iso_radical_examples() {
        let v = BilinearSpace::standard(fp(5), 2, FormKind::Symmetric).unwrap();
        let (r, l) = v.iso_radical(&Subspace::coordinate(fp(5), 2, &[0])).unwrap();
        assert!(r.is_zero() && l == 0);
        let w = span(5, 2, vec![vec![1, 2]]);
        assert_eq!(v.iso_radical(&w).unwrap(), (w.clone(), 1));
        let v4 = BilinearSpace::standard(fp(5), 4, FormKind::Symmetric).unwrap();
        let w4 = span(5, 4, vec![vec![1, 2, 0, 0], vec![0, 0, 1, 2]]);
        assert_eq!(v4.iso_radical(&w4).unwrap().1, 2);
    }

    #[test]
    fn hyperbolic_complement_examples() {
        let v = BilinearSpace::standard(fp(5), 2, FormKind::Symmetric).unwrap();
        assert!(v.hyperbolic_complement(&Subspace::zero(fp(5), 2)).unwrap().is_zero());
        let w = span(5, 2, vec![vec![1, 2]]);
        let (c, sub) = v.hyperbolic_basis(&w).unwrap();
        assert_eq!(c, vec![vec![3, 4]]);
        assert_eq!(v.form(&[1, 2], &c[0]), 1);
        assert_eq!(v.form(&c[0], &c[0]), 0);
        assert_eq!(sub, span(5, 2, vec![vec![3, 4]]));

        let s = BilinearSpace::standard(fp(5), 2, FormKind::Skew).unwrap();
        let (c, _) = s.hyperbolic_basis(&Subspace::coordinate(fp(5), 2, &[0])).unwrap();
        assert_eq!(c, vec![vec![0, 4]]);
        assert_eq!(s.form(&[1, 0], &c[0]), 1);

        assert_eq!(
            v.hyperbolic_complement(&Subspace::coordinate(fp(5), 2, &[0])),
            Err(Error::NotTotallyIsotropic)
        );
    }

    #[test]
    fn decompose_examples() {
        let v = BilinearSpace::standard(fp(5), 3, FormKind::Symmetric).unwrap();
        let w = span(5, 3, vec![vec![1, 2, 0], vec![0, 0, 1]]);
        let dec = v.decompose(&w).unwrap();
        assert_eq!(
            (dec.iso.dim(), dec.wa.dim(), dec.wb.dim(), dec.c.dim()),
            (1, 1, 0, 1)
        );
        assert_eq!(dec.iso, span(5, 3, vec![vec![1, 2, 0]]));

        let aniso = Subspace::coordinate(fp(5), 3, &[0]);
        let dec = v.decompose(&aniso).unwrap();
        assert!(dec.iso.is_zero() && dec.c.is_zero());
        assert_eq!(dec.wa, aniso);
        assert_eq!(dec.wb, v.perp(&aniso).unwrap());

        let v4 = BilinearSpace::standard(fp(5), 5, FormKind::Symmetric).unwrap();
        let tot = span(5, 5, vec![vec![1, 2, 0, 0, 0], vec![0, 0, 1, 2, 0]]);
        let dec = v4.decompose(&tot).unwrap();
        assert_eq!(dec.iso, tot);
        assert!(dec.wa.is_zero());
        assert_eq!(dec.wb.dim(), 5 - 4);
    }

    #[test]
    fn nice_basis_examples() {
        let v = BilinearSpace::standard(fp(5), 2, FormKind::Symmetric).unwrap();
        let nb = v
            .nice_basis(&span(5, 2, vec![vec![1, 2]]), Layout::Blocked, NormMode::Strict)
            .unwrap();
        assert_eq!(nb.gram, Matrix::from_i64(fp(5), &[&[0, 1], &[1, 0]]));
        let nb = v
            .nice_basis(&Subspace::coordinate(fp(5), 2, &[0]), Layout::Blocked, NormMode::Strict)
            .unwrap();
        assert_eq!(nb.gram, Matrix::identity(fp(5), 2));

        let s = BilinearSpace::standard(fp(7), 4, FormKind::Skew).unwrap();
        let lagrangian = Subspace::coordinate(fp(7), 4, &[0, 2]);
        let nb = s
            .nice_basis(&lagrangian, Layout::Interleaved, NormMode::Strict)
            .unwrap();
        assert_eq!(
            nb.gram,
            Matrix::from_i64(fp(7), &[&[0, 0, -1, 0], &[0, 0, 0, -1], &[1, 0, 0, 0], &[0, 1, 0, 0]])
        );
        let w_rows = nb.basis.select_rows(&nb.w_indices());
        assert_eq!(Subspace::row_space(&w_rows), lagrangian);
    }

    #[test]
    fn strict_and_weak_norms() {
        let v = BilinearSpace::standard(fp(3), 2, FormKind::Symmetric).unwrap();
        let w = span(3, 2, vec![vec![1, 1]]);
        assert_eq!(
            v.nice_basis(&w, Layout::Blocked, NormMode::Strict),
            Err(Error::NonSquareScalar("2".into()))
        );
        let nb = v.nice_basis(&w, Layout::Blocked, NormMode::Weak).unwrap();
        assert!(!nb.standard);
        assert_eq!(nb.gram, Matrix::from_i64(fp(3), &[&[2, 0], &[0, 2]]));
        // two non-square norms inside one block are merged over F_3
        let w2 = span(3, 4, vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1]]);
        let v4 = BilinearSpace::standard(fp(3), 4, FormKind::Symmetric).unwrap();
        let nb = v4.nice_basis(&w2, Layout::Blocked, NormMode::Strict).unwrap();
        assert!(nb.standard);
    }

    #[test]
    fn adjoint_examples() {
        let q = Rationals;
        let v = BilinearSpace::standard(q, 3, FormKind::Symmetric).unwrap();
        let a = Matrix::from_i64(q, &[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]]);
        assert_eq!(v.adjoint(&a).unwrap(), a.transpose());
        let s = BilinearSpace::standard(q, 2, FormKind::Skew).unwrap();
        let b = Matrix::from_i64(q, &[&[1, 2], &[3, 5]]);
        let expected = Matrix::identity(q, 2).scale(&b.trace()).sub(&b);
        assert_eq!(s.adjoint(&b).unwrap(), expected);
        let id = Matrix::identity(q, 2);
        assert_eq!(s.adjoint(&id).unwrap(), id);
    }

    #[test]
    fn transporter_examples() {
        let v = BilinearSpace::standard(fp(5), 2, FormKind::Symmetric).unwrap();
        let u = Subspace::coordinate(fp(5), 2, &[0]);
        let g = v.transporter(&u, &u).unwrap();
        assert_eq!(u.image(&g), u);

        let q = Rationals;
        let vq = BilinearSpace::standard(q, 2, FormKind::Symmetric).unwrap();
        let e1 = Subspace::coordinate(q, 2, &[0]);
        let e2 = Subspace::coordinate(q, 2, &[1]);
        let g = vq.transporter(&e1, &e2).unwrap();
        assert_eq!(e1.image(&g), e2);
        assert_eq!(g.transpose().mul(&g), Matrix::identity(q, 2));

        let a = span(5, 2, vec![vec![1, 2]]);
        let b = span(5, 2, vec![vec![1, 3]]);
        let g = v.transporter(&a, &b).unwrap();
        assert!(v.is_isometry(&g));
        assert_eq!(a.image(&g), b);

        assert!(matches!(
            v.transporter(&a, &u),
            Err(Error::ProfileMismatch(_))
        ));
    }

    #[test]
    fn profiles_can_be_constructed() {
        let f = fp(101);
        for n in 2..=6 {
            for kind in [FormKind::Symmetric, FormKind::Skew] {
                let Ok(v) = BilinearSpace::standard(f, n, kind) else { continue };
                for d in 1..n {
                    for l in 0..=d.min(n - d) {
                        if !crate::dimensions::stratum_nonempty(kind, n, d, l) {
                            assert!(v.subspace_with_profile(d, l).is_err());
                            continue;
                        }
                        let w = v.subspace_with_profile(d, l).unwrap();
                        assert_eq!(v.profile(&w).unwrap(), (d, l));
                    }
                }
            }
        }
        // identity over ℚ has no isotropic vectors, the split form does
        let q = BilinearSpace::standard(Rationals, 2, FormKind::Symmetric).unwrap();
        assert_eq!(
            q.subspace_with_profile(1, 1),
            Err(Error::NoSubspaceWithProfile { d: 1, l: 1 })
        );
        let split = BilinearSpace::split_symmetric(Rationals, 4);
        let w = split.subspace_with_profile(2, 2).unwrap();
        assert_eq!(split.profile(&w).unwrap(), (2, 2));
    }

    fn random_space(seed: u64, n: usize, kind: FormKind) -> (BilinearSpace<PrimeField>, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = fp(101);
        let base = BilinearSpace::standard(f, n, kind).unwrap();
        // a random congruent Gram keeps the kind and nondegeneracy
        let g = loop {
            let data = (0..n * n).map(|_| f.random(&mut rng)).collect();
            let g = Matrix::new(f, n, n, data).unwrap();
            if g.is_invertible() {
                break g;
            }
        };
        let gram = g.transpose().mul(base.gram()).mul(&g);
        (BilinearSpace::new(kind, gram).unwrap(), rng)
    }

    fn random_sub(f: PrimeField, n: usize, k: usize, rng: &mut ChaCha8Rng) -> Subspace<PrimeField> {
        let vs = (0..k).map(|_| (0..n).map(|_| f.random(rng)).collect()).collect();
        Subspace::from_vectors(f, n, vs).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn standard_bases_hit_their_targets(seed in any::<u64>(), half in 1usize..4, skew in any::<bool>(), k in 0usize..7) {
            let kind = if skew { FormKind::Skew } else { FormKind::Symmetric };
            let n = 2 * half;
            let (v, mut rng) = random_space(seed, n, kind);
            let w = random_sub(fp(101), n, k.min(n), &mut rng);
            for layout in [Layout::Blocked, Layout::Interleaved] {
                if layout == Layout::Interleaved && kind == FormKind::Symmetric { continue; }
                let nb = v.nice_basis(&w, layout, NormMode::Weak).unwrap();
                prop_assert_eq!(v.gram_of(&nb.basis), nb.gram.clone());
                let rows = nb.basis.select_rows(&nb.w_indices());
                prop_assert_eq!(Subspace::row_space(&rows), w.clone());
            }
        }

        #[test]
        fn transporter_is_an_isometry(seed in any::<u64>(), n in 2usize..6, d in 1usize..5) {
            prop_assume!(d < n);
            let f = fp(101);
            let v = BilinearSpace::standard(f, n, FormKind::Symmetric).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = (seed as usize) % (d.min(n - d) + 1);
            let u = v.random_subspace_with_profile(d, l, &mut rng).unwrap();
            let w = v.random_subspace_with_profile(d, l, &mut rng).unwrap();
            match v.transporter(&u, &w) {
                Ok(g) => {
                    prop_assert!(v.is_isometry(&g));
                    prop_assert_eq!(u.image(&g), w.clone());
                    prop_assert_eq!(v.perp(&u).unwrap().image(&g), v.perp(&w).unwrap());
                }
                Err(Error::NonSquareScalar(_)) => {}
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }
}

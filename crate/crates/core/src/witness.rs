//! Tuples with a prescribed lattice of ρ-invariant subspaces, and uniform sampling of the
//! tuples that leave a fixed subspace ρ-invariant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bilinear::{BilinearSpace, FormKind};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::generation::GeneratorTuple;
use crate::matrix::{is_zero_vec, Matrix};
use crate::poly;
use crate::subspace::Subspace;

/// Attempts per basis vector before giving up with `FieldTooSmall`.
pub const DEFAULT_RETRY_BUDGET: usize = 64;

const MAX_ATOMS: usize = 20;

/// Every sum of eigenspaces of `a`, which must have `n` distinct eigenvalues in the field.
pub fn eig_invariant_subspaces<F: Field>(a: &Matrix<F>) -> Result<Vec<Subspace<F>>> {
    let f = a.field().clone();
    let n = a.rows();
    if n > MAX_ATOMS {
        return Err(Error::EnumerationTooLarge {
            count: format!("2^{n}"),
            cap: 1 << MAX_ATOMS,
        });
    }
    let cp = poly::char_poly(a);
    if !poly::is_squarefree(&f, &cp) {
        return Err(Error::EigenvaluesNotDistinctOrNotRational);
    }
    let roots = f.roots(&cp);
    if roots.len() != n {
        return Err(Error::EigenvaluesNotDistinctOrNotRational);
    }
    let lines: Vec<Vec<F::Elem>> = roots
        .iter()
        .map(|lam| {
            let shifted = a.sub(&Matrix::identity(f.clone(), n).scale(lam));
            shifted.kernel().basis_vectors().remove(0)
        })
        .collect();
    let mut out: Vec<Subspace<F>> = (0u32..1 << n)
        .map(|mask| {
            let vecs = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| lines[i].clone()).collect();
            Subspace::from_vectors(f.clone(), n, vecs).expect("n entries")
        })
        .collect();
    out.sort();
    Ok(out)
}

/// `{0, Iso(W), W, W⊥, W+W⊥, V}`, deduplicated and sorted.
pub fn six_set<F: Field>(space: &BilinearSpace<F>, w: &Subspace<F>) -> Result<Vec<Subspace<F>>> {
    let f = space.field().clone();
    let n = space.n();
    let wp = space.perp(w)?;
    let mut v = vec![
        Subspace::zero(f.clone(), n),
        w.intersection(&wp)?,
        w.clone(),
        wp.clone(),
        w.sum(&wp)?,
        Subspace::full(f, n),
    ];
    v.sort();
    v.dedup();
    Ok(v)
}

/// An ordered basis grouped into atoms. Atoms are single vectors except where a skew form
/// forces a 2-dimensional nondegenerate block to stay whole; subordinate subspaces are the
/// sums of atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodBasis<F: Field> {
    /// Basis vectors as rows, in stage order.
    pub basis: Matrix<F>,
    /// Row ranges of the atoms, in order.
    pub atoms: Vec<std::ops::Range<usize>>,
    /// Number of rows in each of the four stages: `Iso(W)`, rest of `W`, rest of `W⊥`, rest of `V`.
    pub stage_sizes: [usize; 4],
}

impl<F: Field> GoodBasis<F> {
    /// Number of leading rows spanning `W`.
    pub fn w_index(&self) -> usize {
        self.stage_sizes[0] + self.stage_sizes[1]
    }

    pub fn is_plain(&self) -> bool {
        self.atoms.iter().all(|a| a.len() == 1)
    }

    fn atom_vectors(&self) -> Vec<Vec<Vec<F::Elem>>> {
        self.atoms
            .iter()
            .map(|r| r.clone().map(|i| self.basis.row(i).to_vec()).collect())
            .collect()
    }

    /// Whether the subordinate structure satisfies the good-basis property for `w`.
    pub fn verify(&self, space: &BilinearSpace<F>, w: &Subspace<F>) -> bool {
        let atoms = self.atom_vectors();
        let checker = match Checker::new(space, w) {
            Ok(c) => c,
            Err(_) => return false,
        };
        let span = |range: std::ops::Range<usize>| {
            Subspace::from_vectors(
                space.field().clone(),
                space.n(),
                range.map(|i| self.basis.row(i).to_vec()).collect(),
            )
        };
        let [s0, s1, s2, _] = self.stage_sizes;
        let stages_ok = (|| -> Result<bool> {
            let iso = span(0..s0)?;
            let w_span = span(0..s0 + s1)?;
            let mut wp_rows: Vec<Vec<F::Elem>> = (0..s0).map(|i| self.basis.row(i).to_vec()).collect();
            wp_rows.extend((s0 + s1..s0 + s1 + s2).map(|i| self.basis.row(i).to_vec()));
            let wp_span = Subspace::from_vectors(space.field().clone(), space.n(), wp_rows)?;
            Ok(iso == checker.iso
                && w_span == checker.w
                && wp_span == checker.wp
                && self.basis.rows() == space.n()
                && self.basis.is_invertible())
        })()
        .unwrap_or(false);
        stages_ok && checker.is_good(&atoms)
    }
}

/// The good-basis property of an arbitrary ordered basis (rows of `basis`), every vector
/// its own atom: `W` and `W⊥` are subordinate, and any `U` with `U` and `U⊥` both
/// subordinate lies in the six-set.
pub fn is_good_basis<F: Field>(space: &BilinearSpace<F>, basis: &Matrix<F>, w: &Subspace<F>) -> bool {
    if basis.rows() != space.n() || basis.cols() != space.n() || basis.rows() > MAX_ATOMS || !basis.is_invertible() {
        return false;
    }
    let Ok(checker) = Checker::new(space, w) else {
        return false;
    };
    let atoms: Vec<Vec<Vec<F::Elem>>> = basis.row_vecs().into_iter().map(|v| vec![v]).collect();
    checker.is_subordinate(&atoms, &checker.w)
        && checker.is_subordinate(&atoms, &checker.wp)
        && checker.is_good(&atoms)
}

struct Checker<'a, F: Field> {
    space: &'a BilinearSpace<F>,
    iso: Subspace<F>,
    w: Subspace<F>,
    wp: Subspace<F>,
    six: Vec<Subspace<F>>,
}

impl<'a, F: Field> Checker<'a, F> {
    fn new(space: &'a BilinearSpace<F>, w: &Subspace<F>) -> Result<Self> {
        let wp = space.perp(w)?;
        Ok(Checker {
            space,
            iso: w.intersection(&wp)?,
            w: w.clone(),
            wp,
            six: six_set(space, w)?,
        })
    }

    fn span(&self, atoms: &[Vec<Vec<F::Elem>>], mask: u32) -> Subspace<F> {
        let vecs = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .flat_map(|(_, a)| a.iter().cloned())
            .collect();
        Subspace::from_vectors(self.space.field().clone(), self.space.n(), vecs).expect("n entries")
    }

    /// `x` is the sum of the atoms it contains.
    fn is_subordinate(&self, atoms: &[Vec<Vec<F::Elem>>], x: &Subspace<F>) -> bool {
        let inside: usize = atoms
            .iter()
            .filter(|a| a.iter().all(|v| x.contains_vec(v)))
            .map(|a| a.len())
            .sum();
        inside == x.dim()
    }

    fn subordinates(&self, atoms: &[Vec<Vec<F::Elem>>]) -> Vec<Subspace<F>> {
        (0u32..1 << atoms.len()).map(|m| self.span(atoms, m)).collect()
    }

    fn is_good(&self, atoms: &[Vec<Vec<F::Elem>>]) -> bool {
        self.subordinates(atoms).into_iter().all(|u| {
            self.six.contains(&u) || !self.is_subordinate(atoms, &self.space.perp(&u).expect("same ambient"))
        })
    }

    /// Good, and every subordinate `U ⊇ Iso(W)` outside `{Iso(W), W, W⊥, W+W⊥, V}` has
    /// `U⊥ ∩ W` not subordinate.
    fn is_very_good(&self, atoms: &[Vec<Vec<F::Elem>>]) -> bool {
        self.is_good(atoms)
            && self.subordinates(atoms).into_iter().all(|u| {
                if !self.iso.is_subspace_of(&u) || u == self.iso || self.six.contains(&u) {
                    return true;
                }
                let up_w = self
                    .space
                    .perp(&u)
                    .and_then(|p| p.intersection(&self.w))
                    .expect("same ambient");
                !self.is_subordinate(atoms, &up_w)
            })
    }

    fn span_all(&self, atoms: &[Vec<Vec<F::Elem>>]) -> Subspace<F> {
        let vecs = atoms.iter().flat_map(|a| a.iter().cloned()).collect();
        Subspace::from_vectors(self.space.field().clone(), self.space.n(), vecs).expect("n entries")
    }

    /// `w ∉ U⊥` for every subordinate `U` whose perp does not contain `target`
    /// (`target = None`: every nonzero `U`).
    fn avoids_perps(&self, atoms: &[Vec<Vec<F::Elem>>], w: &[F::Elem], target: Option<&Subspace<F>>) -> bool {
        let f = self.space.field();
        self.subordinates(atoms).into_iter().all(|u| {
            if u.is_zero() {
                return true;
            }
            let up = self.space.perp(&u).expect("same ambient");
            let exempt = match target {
                Some(t) => t.is_subspace_of(&up),
                None => false,
            };
            exempt || u.basis_vectors().iter().any(|b| !f.is_zero(&self.space.form(b, w)))
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stage {
    InW,
    InPerp,
    InV,
}

fn random_in<F: Field, R: Rng + ?Sized>(s: &Subspace<F>, rng: &mut R) -> Vec<F::Elem> {
    let f = s.field();
    let coeffs: Vec<F::Elem> = (0..s.dim()).map(|_| f.random(rng)).collect();
    s.basis().vec_mul(&coeffs)
}

/// Extends a basis of `Iso(W)` to a good basis of `V` by rejection sampling, stage by
/// stage: very good inside `W`, then good inside `W + W⊥` drawing from `W⊥`, then good
/// in `V`.
pub fn good_basis<F: Field>(space: &BilinearSpace<F>, w: &Subspace<F>, rng_seed: u64) -> Result<GoodBasis<F>> {
    good_basis_with_budget(space, w, rng_seed, DEFAULT_RETRY_BUDGET)
}

pub fn good_basis_with_budget<F: Field>(
    space: &BilinearSpace<F>,
    w: &Subspace<F>,
    rng_seed: u64,
    budget: usize,
) -> Result<GoodBasis<F>> {
    let n = space.n();
    if n > MAX_ATOMS {
        return Err(Error::EnumerationTooLarge {
            count: format!("2^{n}"),
            cap: 1 << MAX_ATOMS,
        });
    }
    let f = space.field().clone();
    let checker = Checker::new(space, w)?;
    let d = w.dim();
    let l = checker.iso.dim();
    let skew = space.kind() == FormKind::Skew;
    if skew && n == 2 && d == 1 {
        return Err(Error::NoGoodBasis(
            "every line of a symplectic plane is isotropic, so each basis vector spans a \
             subspace equal to its own perp"
                .into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut atoms: Vec<Vec<Vec<F::Elem>>> = checker.iso.basis_vectors().into_iter().map(|v| vec![v]).collect();
    let mut sizes = [l, 0, 0, 0];
    let full = Subspace::full(f.clone(), n);
    let w_plus = w.sum(&checker.wp)?;
    let stages = [
        (Stage::InW, checker.w.clone(), checker.w.clone()),
        (Stage::InPerp, checker.wp.clone(), w_plus),
        (Stage::InV, full.clone(), full),
    ];
    for (k, (stage, source, target)) in stages.into_iter().enumerate() {
        let block_dim = source.dim() - l;
        let whole_block = skew && block_dim == 2 && stage != Stage::InV;
        if whole_block {
            let rest = checker.iso.complement_in(&source)?;
            atoms.push(rest.basis_vectors());
            sizes[k + 1] = 2;
            continue;
        }
        loop {
            let current = checker.span_all(&atoms);
            if current == target {
                break;
            }
            let mut found = None;
            for _ in 0..budget {
                let cand = random_in(&source, &mut rng);
                if is_zero_vec(&f, &cand) || current.contains_vec(&cand) {
                    continue;
                }
                if !skew && f.is_zero(&space.form(&cand, &cand)) {
                    continue;
                }
                let exempt = match stage {
                    Stage::InW => Some(&checker.w),
                    Stage::InPerp => Some(&checker.wp),
                    Stage::InV => None,
                };
                if !checker.avoids_perps(&atoms, &cand, exempt) {
                    continue;
                }
                atoms.push(vec![cand]);
                let ok = match stage {
                    Stage::InW => checker.is_very_good(&atoms),
                    _ => checker.is_good(&atoms),
                };
                if ok {
                    found = Some(());
                    break;
                }
                atoms.pop();
            }
            if found.is_none() {
                return Err(Error::FieldTooSmall(format!(
                    "no admissible basis vector found in {budget} tries; use a larger field"
                )));
            }
            sizes[k + 1] += 1;
        }
    }
    let mut rows = Vec::with_capacity(n);
    let mut ranges = Vec::with_capacity(atoms.len());
    for a in atoms {
        let start = rows.len();
        rows.extend(a);
        ranges.push(start..rows.len());
    }
    let gb = GoodBasis {
        basis: Matrix::from_rows(f, n, rows)?,
        atoms: ranges,
        stage_sizes: sizes,
    };
    if !gb.verify(space, w) {
        return Err(Error::NoGoodBasis(
            "the assembled basis leaves a self-paired subordinate subspace".into(),
        ));
    }
    Ok(gb)
}

/// Whether A_2..A_r are zero or drawn from the matrices leaving `W` ρ-invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Padding {
    #[default]
    Zero,
    /// Each draw preserves all six subspaces, so the invariant set is unchanged.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness<F: Field> {
    pub tuple: GeneratorTuple<F>,
    pub w: Subspace<F>,
    pub d: usize,
    pub l: usize,
    /// The basis `A_1` is built on, absent for the Jordan-block construction.
    pub basis: Option<GoodBasis<F>>,
    /// True when `A_1` is diagonalizable with distinct eigenvalues in the field.
    pub diagonal: bool,
}

fn nonsquare<F: Field>(f: &F) -> F::Elem {
    (2..)
        .map(|i| f.element(i))
        .find(|x| !f.is_zero(x) && !f.is_square(x))
        .expect("odd characteristic has non-squares")
}

/// An r-tuple leaving `W` ρ-invariant whose ρ-invariant subspaces are exactly
/// `{0, Iso(W), W, W⊥, W+W⊥, V}`. `A_1` is diagonal in a good basis with eigenvalues the
/// first `n` nonzero field elements.
pub fn witness_tuple<F: Field>(
    space: &BilinearSpace<F>,
    w: &Subspace<F>,
    r: usize,
    rng_seed: u64,
    padding: Padding,
) -> Result<Witness<F>> {
    let f = space.field().clone();
    let n = space.n();
    if let Some(q) = f.order() {
        if q - 1 < n as u64 {
            return Err(Error::FieldTooSmall(format!(
                "need {n} distinct nonzero eigenvalues, F_{q} has {}",
                q - 1
            )));
        }
    }
    if r == 0 {
        return Err(Error::DimensionMismatch("a witness needs r ≥ 1".into()));
    }
    let (d, l) = space.profile(w)?;
    let (a1, basis, diagonal) = if space.kind() == FormKind::Skew && n == 2 && d == 1 {
        // single Jordan block whose only eigenline is W
        let x = w.basis_vectors().remove(0);
        let other = w.complement_in(&Subspace::full(f.clone(), 2))?.basis_vectors().remove(0);
        let p = Matrix::from_rows(f.clone(), 2, vec![x, other])?.transpose();
        let j = Matrix::from_i64(f.clone(), &[&[1, 1], &[0, 1]]);
        let a = p.mul(&j).mul(&p.inverse().expect("basis"));
        (a, None, false)
    } else {
        let gb = good_basis(space, w, rng_seed)?;
        let mut m = Matrix::zeros(f.clone(), n, n);
        let a = nonsquare(&f);
        let mut next = 1u64;
        for atom in &gb.atoms {
            let c = f.element(next);
            next += 1;
            match atom.len() {
                1 => m[(atom.start, atom.start)] = c,
                2 => {
                    // companion block of (x − c)² − a, irreducible since a is a non-square
                    let s = atom.start;
                    m[(s, s)] = c.clone();
                    m[(s + 1, s + 1)] = c;
                    m[(s, s + 1)] = a.clone();
                    m[(s + 1, s)] = f.one();
                }
                _ => unreachable!("atoms have one or two vectors"),
            }
        }
        let p = gb.basis.transpose();
        let a1 = p.mul(&m).mul(&p.inverse().expect("basis"));
        let diagonal = gb.is_plain();
        (a1, Some(gb), diagonal)
    };
    let mut mats = vec![a1];
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ 0x5eed);
    for _ in 1..r {
        mats.push(match padding {
            Padding::Zero => Matrix::zeros(f.clone(), n, n),
            Padding::Sampled => sample_zwr_matrix(space, w, &mut rng)?,
        });
    }
    Ok(Witness {
        tuple: GeneratorTuple::new(space.clone(), mats)?,
        w: w.clone(),
        d,
        l,
        basis,
        diagonal,
    })
}

/// Basis `(Iso(W), W_a, W_b, C)` as the columns of a change-of-basis matrix, with the
/// block sizes.
fn decomposition_basis<F: Field>(space: &BilinearSpace<F>, w: &Subspace<F>) -> Result<(Matrix<F>, [usize; 4])> {
    let dec = space.decompose(w)?;
    let sizes = [dec.iso.dim(), dec.wa.dim(), dec.wb.dim(), dec.c.dim()];
    let mut rows = dec.iso.basis_vectors();
    rows.extend(dec.wa.basis_vectors());
    rows.extend(dec.wb.basis_vectors());
    rows.extend(dec.c.basis_vectors());
    Ok((Matrix::from_rows(space.field().clone(), space.n(), rows)?.transpose(), sizes))
}

/// Block positions `(output block, input block)` that may be nonzero in the
/// `(Iso, W_a, W_b, C)` basis.
fn free_block(out: usize, inp: usize) -> bool {
    match out {
        0 => true,
        1 => inp == 1 || inp == 3,
        2 => inp == 2 || inp == 3,
        _ => inp == 3,
    }
}

/// Number of free entries per matrix: `(n−d)² + d² + l²`.
pub fn zwr_free_entries<F: Field>(space: &BilinearSpace<F>, w: &Subspace<F>) -> Result<usize> {
    let (_, s) = decomposition_basis(space, w)?;
    let mut count = 0;
    for (i, &si) in s.iter().enumerate() {
        for (j, &sj) in s.iter().enumerate() {
            if free_block(i, j) {
                count += si * sj;
            }
        }
    }
    Ok(count)
}

fn sample_zwr_matrix<F: Field, R: Rng + ?Sized>(
    space: &BilinearSpace<F>,
    w: &Subspace<F>,
    rng: &mut R,
) -> Result<Matrix<F>> {
    let f = space.field().clone();
    let n = space.n();
    let (p, sizes) = decomposition_basis(space, w)?;
    let starts: Vec<usize> = sizes.iter().scan(0, |acc, &s| {
        let st = *acc;
        *acc += s;
        Some(st)
    }).collect();
    let block_of = |i: usize| (0..4).rev().find(|&b| i >= starts[b] && sizes[b] > 0).unwrap_or(0);
    let mut m = Matrix::zeros(f.clone(), n, n);
    for i in 0..n {
        for j in 0..n {
            if free_block(block_of(i), block_of(j)) {
                m[(i, j)] = f.random(rng);
            }
        }
    }
    Ok(p.mul(&m).mul(&p.inverse().expect("basis")))
}

/// An r-tuple drawn uniformly (over F_q) from the matrices for which `W` is ρ-invariant,
/// via the block form in the `(Iso(W), W_a, W_b, C)` basis.
pub fn sample_zwr<F: Field>(space: &BilinearSpace<F>, w: &Subspace<F>, r: usize, rng_seed: u64) -> Result<GeneratorTuple<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mats = (0..r)
        .map(|_| sample_zwr_matrix(space, w, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    GeneratorTuple::new(space.clone(), mats)
}

/// All ρ-invariant subspaces of a tuple whose first matrix has `n` distinct eigenvalues
/// in the field: the sums of eigenspaces that the whole tuple and its adjoints preserve.
pub fn rho_invariant_via_eigenspaces<F: Field>(t: &GeneratorTuple<F>) -> Result<Vec<Subspace<F>>> {
    let first = t
        .mats()
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty tuple".into()))?;
    let gens = t.with_adjoints();
    Ok(eig_invariant_subspaces(first)?
        .into_iter()
        .filter(|u| gens.iter().all(|g| u.is_invariant_under(g)))
        .collect())
}

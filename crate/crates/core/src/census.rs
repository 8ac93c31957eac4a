//! Finite-field experiments: Grassmannian enumeration, point counts of the incidence
//! variety, exhaustive and sampled generation counts, and log-log degree fits.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bilinear::{BilinearSpace, FormKind};
use crate::dimensions::{dim_stratum, stratum_nonempty, StratumKey};
use crate::error::{Error, Result};
use crate::field::{Field, PrimeField};
use crate::generation::{generates, GeneratorTuple};
use crate::matrix::Matrix;
use crate::subspace::Subspace;

pub const DEFAULT_SUBSPACE_CAP: u64 = 10_000_000;
pub const DEFAULT_TUPLE_CAP: u64 = 100_000_000;

/// Number of `d`-dimensional subspaces of `F_q^n`, saturating at `u128::MAX`.
pub fn gaussian_binomial(q: u64, n: usize, d: usize) -> u128 {
    if d > n {
        return 0;
    }
    let q = q as u128;
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..d {
        let a = q.checked_pow((n - i) as u32).map(|x| x - 1);
        let b = q.checked_pow((i + 1) as u32).map(|x| x - 1);
        match (a.and_then(|a| num.checked_mul(a)), b.and_then(|b| den.checked_mul(b))) {
            (Some(x), Some(y)) => {
                // keep the running quotient small: every prefix ratio is an integer
                let g = gcd(x, y);
                num = x / g;
                den = y / g;
            }
            _ => return u128::MAX,
        }
    }
    num / den
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Walks every `d`-dimensional subspace of `F_p^n` once, in RREF form: pivot patterns in
/// lexicographic order, and for each pattern all fillings of the free entries.
pub struct SubspaceEnumerator {
    field: PrimeField,
    n: usize,
    d: usize,
    pivots: Vec<usize>,
    rows: Vec<u64>,
    free: Vec<usize>,
    started: bool,
    done: bool,
}

impl SubspaceEnumerator {
    pub fn new(field: PrimeField, n: usize, d: usize) -> Self {
        let mut e = SubspaceEnumerator {
            field,
            n,
            d,
            pivots: (0..d).collect(),
            rows: vec![0; d * n],
            free: Vec::new(),
            started: false,
            done: d > n,
        };
        if !e.done {
            e.load_pattern();
        }
        e
    }

    fn load_pattern(&mut self) {
        let n = self.n;
        self.rows.iter_mut().for_each(|x| *x = 0);
        self.free.clear();
        for (i, &p) in self.pivots.iter().enumerate() {
            self.rows[i * n + p] = 1;
            for j in p + 1..n {
                if !self.pivots.contains(&j) {
                    self.free.push(i * n + j);
                }
            }
        }
    }

    fn next_pattern(&mut self) -> bool {
        let (n, d) = (self.n, self.d);
        let mut i = d;
        while i > 0 {
            i -= 1;
            if self.pivots[i] < n - d + i {
                self.pivots[i] += 1;
                for j in i + 1..d {
                    self.pivots[j] = self.pivots[j - 1] + 1;
                }
                self.load_pattern();
                return true;
            }
        }
        false
    }

    /// Advances and exposes the flat `d × n` RREF basis and its pivots.
    pub fn next_raw(&mut self) -> Option<(&[u64], &[usize])> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some((&self.rows, &self.pivots));
        }
        let p = self.field.modulus();
        for &k in self.free.iter().rev() {
            self.rows[k] += 1;
            if self.rows[k] < p {
                return Some((&self.rows, &self.pivots));
            }
            self.rows[k] = 0;
        }
        if self.next_pattern() {
            Some((&self.rows, &self.pivots))
        } else {
            self.done = true;
            None
        }
    }

    /// The subspace most recently returned by `next_raw`.
    pub fn current_subspace(&self) -> Subspace<PrimeField> {
        let basis = Matrix::new(self.field, self.d, self.n, self.rows.clone()).expect("d·n entries");
        Subspace::from_rref_unchecked(basis, self.pivots.clone())
    }
}

impl Iterator for SubspaceEnumerator {
    type Item = Subspace<PrimeField>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_raw()?;
        Some(self.current_subspace())
    }
}

fn check_cap(count: u128, cap: u64) -> Result<()> {
    if count > cap as u128 {
        return Err(Error::EnumerationTooLarge {
            count: if count == u128::MAX {
                "more than 2^128".into()
            } else {
                count.to_string()
            },
            cap,
        });
    }
    Ok(())
}

pub fn enumerate_subspaces(field: PrimeField, n: usize, d: usize, cap: u64) -> Result<SubspaceEnumerator> {
    check_cap(gaussian_binomial(field.modulus(), n, d), cap)?;
    Ok(SubspaceEnumerator::new(field, n, d))
}

/// Rank of the restricted Gram `B Q Bᵀ` for a flat `d × n` basis.
fn restricted_rank(space: &BilinearSpace<PrimeField>, d: usize, rows: &[u64]) -> usize {
    let f = *space.field();
    let b = Matrix::new(f, d, space.n(), rows.to_vec()).expect("d·n entries");
    space.gram_of(&b).rank()
}

/// Isotropy rank of every `d`-dimensional subspace, tallied. Keys cover every `l`
/// admitted by the stratum rule, so absent strata show up as zero.
pub fn isotropy_counts(space: &BilinearSpace<PrimeField>, d: usize, cap: u64) -> Result<BTreeMap<usize, u64>> {
    let n = space.n();
    let mut it = enumerate_subspaces(*space.field(), n, d, cap)?;
    let mut out: BTreeMap<usize, u64> = (0..=d)
        .filter(|&l| stratum_nonempty(space.kind(), n, d, l))
        .map(|l| (l, 0))
        .collect();
    while let Some((rows, _)) = it.next_raw() {
        let l = d - restricted_rank(space, d, rows);
        *out.entry(l).or_insert(0) += 1;
    }
    Ok(out)
}

/// Number of pairs `(A_•, W)` with `W` of profile `(d, l)` and ρ-invariant under every
/// `A_i`: `|Gr(l,d)(F_q)| · q^{r((n−d)² + d² + l²)}`.
pub fn incidence_count(
    space: &BilinearSpace<PrimeField>,
    d: usize,
    l: usize,
    r: usize,
    cap: u64,
) -> Result<BigUint> {
    let n = space.n();
    if d > n || l > d.min(n - d) {
        return Ok(BigUint::zero());
    }
    let grass = isotropy_counts(space, d, cap)?.get(&l).copied().unwrap_or(0);
    let exp = r * ((n - d).pow(2) + d * d + l * l);
    Ok(BigUint::from(grass) * BigUint::from(space.field().modulus()).pow(exp as u32))
}

/// Whether the row space of a flat RREF basis is invariant under every flat `n × n`
/// matrix in `mats`.
pub(crate) fn rref_rows_invariant(p: u64, n: usize, rows: &[u64], pivots: &[usize], mats: &[Vec<u64>]) -> bool {
    let mut img = vec![0u64; n];
    mats.iter().all(|m| {
        (0..pivots.len()).all(|i| {
            let w = &rows[i * n..(i + 1) * n];
            for (r, out) in img.iter_mut().enumerate() {
                let row = &m[r * n..(r + 1) * n];
                let acc: u128 = row
                    .iter()
                    .zip(w)
                    .filter(|(_, &wc)| wc != 0)
                    .map(|(&a, &wc)| a as u128 * wc as u128)
                    .sum();
                *out = (acc % p as u128) as u64;
            }
            for (k, &pk) in pivots.iter().enumerate() {
                let c = img[pk];
                if c == 0 {
                    continue;
                }
                for (x, &y) in img.iter_mut().zip(&rows[k * n..(k + 1) * n]) {
                    if y != 0 {
                        *x = (*x + p - (c as u128 * y as u128 % p as u128) as u64) % p;
                    }
                }
            }
            img.iter().all(|&x| x == 0)
        })
    })
}

/// For each subspace of profile `(d, l)`, the number of single matrices leaving it
/// ρ-invariant.
///
/// For each `W` the matrices with `A W ⊆ W` are enumerated one by one (in a basis starting
/// with a basis of `W` they are the block upper-triangular ones), and `ρ(A) W ⊆ W` is
/// tested on each. The cap bounds the total number of matrices visited.
pub fn invariance_tallies(space: &BilinearSpace<PrimeField>, d: usize, l: usize, cap: u64) -> Result<Vec<u64>> {
    let f = *space.field();
    let p = f.modulus();
    let n = space.n();
    check_cap(gaussian_binomial(p, n, d), cap)?;
    let targets = profile_targets(space, d, l);
    let free = n * n - d * (n - d);
    let per_w = (p as u128).checked_pow(free as u32).unwrap_or(u128::MAX);
    check_cap(per_w.saturating_mul(targets.len() as u128), cap)?;
    targets
        .par_iter()
        .map(|(rows, pivots)| Ok(parabolic_tally(space, d, rows, pivots, per_w as u64)))
        .collect()
}

/// RREF bases (flat rows, pivots) of the `d`-subspaces with isotropy rank `l`.
fn profile_targets(space: &BilinearSpace<PrimeField>, d: usize, l: usize) -> Vec<(Vec<u64>, Vec<usize>)> {
    let mut targets = Vec::new();
    let mut it = SubspaceEnumerator::new(*space.field(), space.n(), d);
    while let Some((rows, pivots)) = it.next_raw() {
        if d - restricted_rank(space, d, rows) == l {
            targets.push((rows.to_vec(), pivots.to_vec()));
        }
    }
    targets
}

/// Number of `A` with `A W ⊆ W` and `ρ(A) W ⊆ W`, visiting all `per_w` matrices of the first
/// kind. Works in the basis `P` whose first `d` columns span `W` (the rest are the
/// standard vectors off the pivots): there `A' = P⁻¹AP` has a zero lower-left block,
/// `ρ` becomes `Q'⁻¹A'ᵀQ'` with `Q' = PᵀQP`, and the test is that the lower-left block of
/// `ρ(A')` vanishes.
fn parabolic_tally(space: &BilinearSpace<PrimeField>, d: usize, rows: &[u64], pivots: &[usize], per_w: u64) -> u64 {
    let f = *space.field();
    let p = f.modulus();
    let n = space.n();
    let mut cols: Vec<Vec<u64>> = rows.chunks(n).map(|r| r.to_vec()).collect();
    cols.extend((0..n).filter(|j| !pivots.contains(j)).map(|j| {
        let mut e = vec![0; n];
        e[j] = 1;
        e
    }));
    let pm = Matrix::from_rows(f, n, cols).expect("n vectors").transpose();
    let qp = pm.transpose().mul(space.gram()).mul(&pm);
    let qp_inv = qp.inverse().expect("nondegenerate form");
    let (qp, qi) = (qp.entries().to_vec(), qp_inv.entries().to_vec());
    let free: Vec<usize> = (0..n * n).filter(|&k| !(k / n >= d && k % n < d)).collect();
    let mulmod = |a: u64, b: u64| (a as u128 * b as u128 % p as u128) as u64;
    let mut a = vec![0u64; n * n];
    let mut t = vec![0u64; n * d];
    let mut count = 0u64;
    for _ in 0..per_w {
        // T = A'ᵀ Q' restricted to the first d columns
        for k in 0..n {
            for j in 0..d {
                let mut acc = 0u64;
                for m in 0..n {
                    let x = a[m * n + k];
                    if x != 0 {
                        acc = (acc + mulmod(x, qp[m * n + j])) % p;
                    }
                }
                t[k * d + j] = acc;
            }
        }
        let invariant = (d..n).all(|i| {
            (0..d).all(|j| {
                let mut acc = 0u64;
                for k in 0..n {
                    acc = (acc + mulmod(qi[i * n + k], t[k * d + j])) % p;
                }
                acc == 0
            })
        });
        count += invariant as u64;
        for &k in &free {
            a[k] += 1;
            if a[k] < p {
                break;
            }
            a[k] = 0;
        }
    }
    count
}

/// The same tallies by running over all `q^{n²}` matrices; used to cross-check.
#[cfg(test)]
fn invariance_tallies_all_matrices(space: &BilinearSpace<PrimeField>, d: usize, l: usize) -> Vec<u64> {
    let f = *space.field();
    let p = f.modulus();
    let n = space.n();
    let targets = profile_targets(space, d, l);
    let mut acc = vec![0u64; targets.len()];
    for idx in 0..p.pow((n * n) as u32) {
        let a = matrix_from_index(f, n, idx);
        let ra = space.adjoint(&a).expect("square").into_entries();
        for (k, (rows, pivots)) in targets.iter().enumerate() {
            let both = [a.entries().to_vec(), ra.clone()];
            if rref_rows_invariant(p, n, rows, pivots, &both) {
                acc[k] += 1;
            }
        }
    }
    acc
}

/// Exact pair count `Σ_W c_W^r` from enumerated invariance tallies.
pub fn direct_pair_count(space: &BilinearSpace<PrimeField>, d: usize, l: usize, r: usize, cap: u64) -> Result<BigUint> {
    let tallies = invariance_tallies(space, d, l, cap)?;
    Ok(sum_of_powers(&tallies, r))
}

pub fn sum_of_powers(tallies: &[u64], r: usize) -> BigUint {
    tallies
        .iter()
        .map(|&c| BigUint::from(c).pow(r as u32))
        .sum()
}

/// The `idx`-th matrix in base-`p` digit order (entry 0 least significant).
fn matrix_from_index(f: PrimeField, n: usize, mut idx: u64) -> Matrix<PrimeField> {
    let p = f.modulus();
    let entries = (0..n * n)
        .map(|_| {
            let e = idx % p;
            idx /= p;
            e
        })
        .collect();
    Matrix::new(f, n, n, entries).expect("n² entries")
}

/// Number of `r`-tuples over F_q that fail to generate, by trying all `q^{rn²}` of them.
pub fn exhaustive_nongenerating_count(space: &BilinearSpace<PrimeField>, r: usize, cap: u64) -> Result<u64> {
    let f = *space.field();
    let n = space.n();
    let per = (f.modulus() as u128).checked_pow((n * n) as u32).unwrap_or(u128::MAX);
    let total = per.checked_pow(r as u32).unwrap_or(u128::MAX);
    check_cap(total, cap)?;
    let per = per as u64;
    let count = (0..total as u64)
        .into_par_iter()
        .filter(|&idx| {
            let mut rest = idx;
            let mats = (0..r)
                .map(|_| {
                    let m = matrix_from_index(f, n, rest % per);
                    rest /= per;
                    m
                })
                .collect();
            let t = GeneratorTuple::new(space.clone(), mats).expect("sizes match");
            !generates(&t)
        })
        .count();
    Ok(count as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub samples: u64,
    pub generating: u64,
    pub rate: f64,
}

/// Sample `i` draws from a ChaCha8 stream keyed by `(seed, i)`, so the result does not
/// depend on how samples are split across workers.
pub fn random_tuple<F: Field>(space: &BilinearSpace<F>, r: usize, seed: u64, index: u64) -> GeneratorTuple<F> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = space.n();
    let f = space.field().clone();
    let mats = (0..r)
        .map(|_| Matrix::new(f.clone(), n, n, (0..n * n).map(|_| f.random(&mut rng)).collect()).expect("n²"))
        .collect();
    GeneratorTuple::new(space.clone(), mats).expect("sizes match")
}

pub fn monte_carlo_rate<F: Field>(space: &BilinearSpace<F>, r: usize, samples: u64, seed: u64) -> MonteCarloReport {
    let generating = (0..samples)
        .into_par_iter()
        .filter(|&i| generates(&random_tuple(space, r, seed, i)))
        .count() as u64;
    MonteCarloReport {
        samples,
        generating,
        rate: if samples == 0 {
            0.0
        } else {
            generating as f64 / samples as f64
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeFit {
    pub degree: i64,
    pub slope: f64,
    /// Sum of squared residuals of the least-squares line.
    pub residual: f64,
}

/// Least-squares slope of `ln count` against `ln q`, over the positive counts.
pub fn degree_fit(counts: &BTreeMap<u64, BigUint>) -> Result<DegreeFit> {
    if !counts.is_empty() && counts.values().all(|c| c.is_zero()) {
        return Err(Error::AllZeroCounts);
    }
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(&q, c)| ((q as f64).ln(), ln_big(c)))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} positive counts, need at least 3",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    Ok(DegreeFit {
        degree: slope.round() as i64,
        slope,
        residual,
    })
}

fn ln_big(c: &BigUint) -> f64 {
    match c.to_f64() {
        Some(x) if x.is_finite() => x.ln(),
        _ => {
            let bits = c.bits();
            let shift = bits - 64;
            ((c >> shift).to_f64().expect("fits")).ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

/// Which standard Gram a census builds at each prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GramChoice {
    /// Identity (symmetric) or `diag(Ω₂, …)` (skew).
    Standard,
    /// Anti-diagonal symmetric Gram, split over every field.
    Split,
}

impl GramChoice {
    pub fn build(self, f: PrimeField, n: usize, kind: FormKind) -> Result<BilinearSpace<PrimeField>> {
        match (self, kind) {
            (GramChoice::Split, FormKind::Symmetric) => Ok(BilinearSpace::split_symmetric(f, n)),
            _ => BilinearSpace::standard(f, n, kind),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub d: usize,
    pub l: usize,
    pub q: u64,
    #[serde(with = "big_string")]
    pub count: BigUint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub d: usize,
    pub l: usize,
    pub degree: Option<i64>,
    pub residual: Option<f64>,
    pub dim_stratum: u64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub kind: FormKind,
    pub n: usize,
    pub r: usize,
    pub gram: GramChoice,
    pub rows: Vec<CountRow>,
    pub fits: Vec<FitRow>,
}

mod big_string {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl CountTable {
    pub fn counts_for(&self, d: usize, l: usize) -> BTreeMap<u64, BigUint> {
        self.rows
            .iter()
            .filter(|row| row.d == d && row.l == l)
            .map(|row| (row.q, row.count.clone()))
            .collect()
    }

    pub fn fit_for(&self, d: usize, l: usize) -> Option<&FitRow> {
        self.fits.iter().find(|f| f.d == d && f.l == l)
    }

    /// Columns `kind, n, r, d, l, q, count, degree, residual`; the fit columns repeat on
    /// every row of a stratum and stay empty when no fit was possible.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["kind", "n", "r", "d", "l", "q", "count", "degree", "residual"])
            .map_err(io)?;
        for row in &self.rows {
            let fit = self.fit_for(row.d, row.l);
            let degree = fit.and_then(|f| f.degree).map(|x| x.to_string()).unwrap_or_default();
            let residual = fit.and_then(|f| f.residual).map(|x| format!("{x:.6}")).unwrap_or_default();
            w.write_record([
                self.kind.to_string(),
                self.n.to_string(),
                self.r.to_string(),
                row.d.to_string(),
                row.l.to_string(),
                row.q.to_string(),
                row.count.to_string(),
                degree,
                residual,
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Incidence counts for every nonempty `(d, l)` with `1 ≤ d ≤ ⌊n/2⌋`, at each prime, with
/// a degree fit per stratum when at least three primes give positive counts.
pub fn incidence_table(
    kind: FormKind,
    n: usize,
    r: usize,
    qs: &[u64],
    gram: GramChoice,
    cap: u64,
) -> Result<CountTable> {
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    let spaces = qs
        .iter()
        .map(|&q| gram.build(PrimeField::new(q)?, n, kind))
        .collect::<Result<Vec<_>>>()?;
    for d in 1..=n / 2 {
        let counts_by_q = spaces
            .iter()
            .map(|s| isotropy_counts(s, d, cap))
            .collect::<Result<Vec<_>>>()?;
        for l in 0..=d {
            if !stratum_nonempty(kind, n, d, l) {
                continue;
            }
            let exp = (r * ((n - d).pow(2) + d * d + l * l)) as u32;
            let mut by_q = BTreeMap::new();
            for (s, counts) in spaces.iter().zip(&counts_by_q) {
                let q = s.field().modulus();
                let grass = counts.get(&l).copied().unwrap_or(0);
                let count = BigUint::from(grass) * BigUint::from(q).pow(exp);
                rows.push(CountRow {
                    d,
                    l,
                    q,
                    count: count.clone(),
                });
                by_q.insert(q, count);
            }
            let dim = dim_stratum(&StratumKey { kind, n, d, l, r })?;
            let (degree, residual, note) = match degree_fit(&by_q) {
                Ok(fit) => (Some(fit.degree), Some(fit.residual), None),
                Err(e) => (None, None, Some(e.to_string())),
            };
            fits.push(FitRow {
                d,
                l,
                degree,
                residual,
                dim_stratum: dim,
                note,
            });
        }
    }
    Ok(CountTable {
        kind,
        n,
        r,
        gram,
        rows,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fp(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(SubspaceEnumerator::new(fp(3), 2, 1).count(), 4);
        assert_eq!(SubspaceEnumerator::new(fp(3), 4, 2).count(), 130);
        assert_eq!(gaussian_binomial(3, 4, 2), 130);
        assert_eq!(SubspaceEnumerator::new(fp(5), 3, 0).count(), 1);
        assert_eq!(SubspaceEnumerator::new(fp(5), 3, 3).count(), 1);
        assert!(matches!(
            enumerate_subspaces(fp(101), 6, 3, DEFAULT_SUBSPACE_CAP),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn enumeration_yields_distinct_canonical_subspaces() {
        let all: Vec<_> = SubspaceEnumerator::new(fp(3), 4, 2).collect();
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), all.len());
        for w in &all {
            assert_eq!(&Subspace::row_space(w.basis()), w);
        }
    }

    #[test]
    fn isotropy_examples() {
        let id3 = BilinearSpace::standard(fp(3), 2, FormKind::Symmetric).unwrap();
        let c = isotropy_counts(&id3, 1, DEFAULT_SUBSPACE_CAP).unwrap();
        assert_eq!(c, BTreeMap::from([(0, 4), (1, 0)]));
        let id5 = BilinearSpace::standard(fp(5), 2, FormKind::Symmetric).unwrap();
        let c = isotropy_counts(&id5, 1, DEFAULT_SUBSPACE_CAP).unwrap();
        assert_eq!(c, BTreeMap::from([(0, 4), (1, 2)]));
        for q in [3, 5, 7, 11] {
            let s = BilinearSpace::standard(fp(q), 2, FormKind::Skew).unwrap();
            let c = isotropy_counts(&s, 1, DEFAULT_SUBSPACE_CAP).unwrap();
            assert_eq!(c, BTreeMap::from([(1, q + 1)]));
        }
    }

    #[test]
    fn incidence_examples() {
        let id3 = BilinearSpace::standard(fp(3), 2, FormKind::Symmetric).unwrap();
        assert_eq!(incidence_count(&id3, 1, 0, 1, DEFAULT_SUBSPACE_CAP).unwrap(), big(36));
        assert_eq!(direct_pair_count(&id3, 1, 0, 1, DEFAULT_TUPLE_CAP).unwrap(), big(36));
        let id5 = BilinearSpace::standard(fp(5), 2, FormKind::Symmetric).unwrap();
        assert_eq!(incidence_count(&id5, 1, 1, 1, DEFAULT_SUBSPACE_CAP).unwrap(), big(250));
        assert_eq!(incidence_count(&id5, 1, 0, 1, DEFAULT_SUBSPACE_CAP).unwrap(), big(100));
        assert_eq!(incidence_count(&id3, 1, 1, 1, DEFAULT_SUBSPACE_CAP).unwrap(), big(0));
        assert_eq!(incidence_count(&id3, 1, 2, 1, DEFAULT_SUBSPACE_CAP).unwrap(), big(0));
    }

    #[test]
    fn incidence_matches_pairs_for_tiny_cases() {
        for q in [3, 5] {
            for kind in [FormKind::Symmetric, FormKind::Skew] {
                let s = BilinearSpace::standard(fp(q), 2, kind).unwrap();
                for l in 0..=1 {
                    let tallies = invariance_tallies(&s, 1, l, DEFAULT_TUPLE_CAP).unwrap();
                    for r in 1..=2 {
                        assert_eq!(
                            sum_of_powers(&tallies, r),
                            incidence_count(&s, 1, l, r, DEFAULT_SUBSPACE_CAP).unwrap(),
                            "{kind} q={q} l={l} r={r}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tallies_match_enumeration_of_all_matrices() {
        let spaces = vec![
            BilinearSpace::standard(fp(3), 2, FormKind::Symmetric).unwrap(),
            BilinearSpace::split_symmetric(fp(5), 2),
            BilinearSpace::standard(fp(5), 2, FormKind::Skew).unwrap(),
            BilinearSpace::standard(fp(3), 3, FormKind::Symmetric).unwrap(),
            BilinearSpace::split_symmetric(fp(3), 3),
        ];
        for s in spaces {
            for d in 1..s.n() {
                for l in 0..=d {
                    if !stratum_nonempty(s.kind(), s.n(), d, l) {
                        continue;
                    }
                    assert_eq!(
                        invariance_tallies(&s, d, l, DEFAULT_TUPLE_CAP).unwrap(),
                        invariance_tallies_all_matrices(&s, d, l),
                        "{} n={} d={d} l={l}",
                        s.kind(),
                        s.n()
                    );
                }
            }
        }
    }

    #[test]
    fn exhaustive_examples() {
        let skew = BilinearSpace::standard(fp(3), 2, FormKind::Skew).unwrap();
        assert_eq!(exhaustive_nongenerating_count(&skew, 1, DEFAULT_TUPLE_CAP).unwrap(), 81);
        let sym = BilinearSpace::standard(fp(3), 2, FormKind::Symmetric).unwrap();
        assert_eq!(exhaustive_nongenerating_count(&sym, 1, DEFAULT_TUPLE_CAP).unwrap(), 33);
        let pairs = exhaustive_nongenerating_count(&sym, 2, DEFAULT_TUPLE_CAP).unwrap();
        assert_eq!(pairs, 369);
        assert!(pairs < 6561);
        let big_space = BilinearSpace::standard(fp(101), 3, FormKind::Symmetric).unwrap();
        assert!(matches!(
            exhaustive_nongenerating_count(&big_space, 1, DEFAULT_TUPLE_CAP),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn union_bound_over_strata() {
        // Only tuples with an F_q-rational invariant subspace are covered by the bound;
        // over F_3 some non-generating pairs have none, so the raw count can exceed it.
        for kind in [FormKind::Symmetric, FormKind::Skew] {
            let s = BilinearSpace::standard(fp(3), 2, kind).unwrap();
            for r in 1..=2usize {
                let bound: BigUint = (0..=1)
                    .map(|l| incidence_count(&s, 1, l, r, DEFAULT_SUBSPACE_CAP).unwrap())
                    .sum();
                let per = 81u64;
                let mut with_witness = 0u64;
                for idx in 0..per.pow(r as u32) {
                    let mut rest = idx;
                    let mats = (0..r)
                        .map(|_| {
                            let m = matrix_from_index(fp(3), 2, rest % per);
                            rest /= per;
                            m
                        })
                        .collect();
                    let t = GeneratorTuple::new(s.clone(), mats).unwrap();
                    let prof = crate::generation::invariant_profile(&t, 1, DEFAULT_SUBSPACE_CAP).unwrap();
                    if !prof.is_empty() {
                        assert!(!generates(&t));
                        with_witness += 1;
                    }
                }
                assert!(big(with_witness) <= bound, "{kind} r={r}");
            }
        }
        let sym = BilinearSpace::standard(fp(3), 2, FormKind::Symmetric).unwrap();
        let bound = incidence_count(&sym, 1, 0, 2, DEFAULT_SUBSPACE_CAP).unwrap();
        assert!(big(exhaustive_nongenerating_count(&sym, 2, DEFAULT_TUPLE_CAP).unwrap()) > bound);
    }

    #[test]
    fn monte_carlo_examples() {
        for q in [3, 5, 101] {
            let skew = BilinearSpace::standard(fp(q), 2, FormKind::Skew).unwrap();
            assert_eq!(monte_carlo_rate(&skew, 1, 200, 9).rate, 0.0);
        }
        let sym = BilinearSpace::standard(fp(7), 3, FormKind::Symmetric).unwrap();
        assert_eq!(monte_carlo_rate(&sym, 2, 100, 4), monte_carlo_rate(&sym, 2, 100, 4));
    }

    #[test]
    fn fit_examples() {
        let cubes = BTreeMap::from([(3, big(27)), (5, big(125)), (7, big(343))]);
        let fit = degree_fit(&cubes).unwrap();
        assert_eq!(fit.degree, 3);
        assert!(fit.residual < 1e-12);
        let flat = BTreeMap::from([(3, big(4)), (5, big(4)), (7, big(4))]);
        assert_eq!(degree_fit(&flat).unwrap().degree, 0);
        let zeros = BTreeMap::from([(3, big(0)), (5, big(0)), (7, big(0))]);
        assert_eq!(degree_fit(&zeros), Err(Error::AllZeroCounts));
        let two = BTreeMap::from([(3, big(9)), (5, big(25))]);
        assert!(matches!(degree_fit(&two), Err(Error::InsufficientData(_))));
        let huge = BTreeMap::from([(3, big(3).pow(700)), (5, big(5).pow(700)), (7, big(7).pow(700))]);
        assert_eq!(degree_fit(&huge).unwrap().degree, 700);
    }

    #[test]
    fn incidence_table_fits_the_anisotropic_line_stratum() {
        let t = incidence_table(FormKind::Symmetric, 2, 1, &[3, 5, 7], GramChoice::Standard, DEFAULT_SUBSPACE_CAP).unwrap();
        let counts: Vec<_> = t.counts_for(1, 0).into_values().collect();
        assert_eq!(counts, vec![big(36), big(100), big(392)]);
        let fit = t.fit_for(1, 0).unwrap();
        assert_eq!(fit.degree, Some(3));
        assert_eq!(fit.dim_stratum, 3);
        assert!(t.fit_for(1, 1).unwrap().degree.is_none());
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("kind,n,r,d,l,q,count,degree,residual\n"));
        assert!(csv.contains("symmetric,2,1,1,0,5,100,3,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn isotropy_counts_sum_to_gaussian_binomial(p in prop::sample::select(vec![3u64, 5, 7]), n in 1usize..5, d in 0usize..5, skew in any::<bool>()) {
            prop_assume!(d <= n);
            let kind = if skew { FormKind::Skew } else { FormKind::Symmetric };
            prop_assume!(!(skew && n % 2 == 1));
            let s = BilinearSpace::standard(fp(p), n, kind).unwrap();
            let c = isotropy_counts(&s, d, DEFAULT_SUBSPACE_CAP).unwrap();
            prop_assert_eq!(c.values().sum::<u64>() as u128, gaussian_binomial(p, n, d));
            for (&l, &count) in &c {
                if count > 0 {
                    prop_assert!(stratum_nonempty(kind, n, d, l));
                }
            }
        }
    }
}

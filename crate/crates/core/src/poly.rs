//! Univariate polynomials as coefficient vectors (constant term first), characteristic
//! polynomials, and root finding over F_p and ℚ.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::{is_prime_u64, Field, PrimeField, Rationals};
use crate::matrix::Matrix;

pub fn trim<F: Field>(f: &F, mut p: Vec<F::Elem>) -> Vec<F::Elem> {
    while p.last().is_some_and(|c| f.is_zero(c)) {
        p.pop();
    }
    p
}

/// Degree of a trimmed polynomial; `None` for the zero polynomial.
pub fn degree<F: Field>(p: &[F::Elem]) -> Option<usize> {
    p.len().checked_sub(1)
}

pub fn add<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let n = a.len().max(b.len());
    let z = f.zero();
    let out = (0..n)
        .map(|i| f.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
        .collect();
    trim(f, out)
}

pub fn sub<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let n = a.len().max(b.len());
    let z = f.zero();
    let out = (0..n)
        .map(|i| f.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
        .collect();
    trim(f, out)
}

pub fn mul<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    trim(f, out)
}

/// Quotient and remainder; panics on division by the zero polynomial.
pub fn divrem<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> (Vec<F::Elem>, Vec<F::Elem>) {
    let b = trim(f, b.to_vec());
    let db = degree::<F>(&b).expect("division by zero polynomial");
    let lead_inv = f.inv(&b[db]).expect("nonzero leading coefficient");
    let mut r = trim(f, a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![f.zero(); r.len() - db];
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let c = f.mul(&r[dr], &lead_inv);
        let shift = dr - db;
        for (j, bj) in b.iter().enumerate() {
            r[shift + j] = f.sub(&r[shift + j], &f.mul(&c, bj));
        }
        q[shift] = c;
        r = trim(f, r);
    }
    (trim(f, q), r)
}

pub fn rem<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    divrem(f, a, b).1
}

pub fn monic<F: Field>(f: &F, a: &[F::Elem]) -> Vec<F::Elem> {
    let a = trim(f, a.to_vec());
    match a.last() {
        None => a,
        Some(l) => {
            let li = f.inv(l).expect("nonzero");
            a.iter().map(|c| f.mul(c, &li)).collect()
        }
    }
}

/// Monic greatest common divisor (zero if both inputs are zero).
pub fn gcd<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let mut a = trim(f, a.to_vec());
    let mut b = trim(f, b.to_vec());
    while !b.is_empty() {
        let r = rem(f, &a, &b);
        a = b;
        b = r;
    }
    monic(f, &a)
}

pub fn derivative<F: Field>(f: &F, a: &[F::Elem]) -> Vec<F::Elem> {
    let out = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| f.mul(c, &f.from_i64(i as i64)))
        .collect();
    trim(f, out)
}

pub fn eval<F: Field>(f: &F, a: &[F::Elem], x: &F::Elem) -> F::Elem {
    a.iter()
        .rev()
        .fold(f.zero(), |acc, c| f.add(&f.mul(&acc, x), c))
}

/// True iff the polynomial has no repeated factor over an algebraic closure.
pub fn is_squarefree<F: Field>(f: &F, a: &[F::Elem]) -> bool {
    let d = derivative(f, a);
    gcd(f, a, &d).len() <= 1
}

/// Characteristic polynomial `det(xI − A)`, monic, via reduction to upper Hessenberg form.
pub fn char_poly<F: Field>(a: &Matrix<F>) -> Vec<F::Elem> {
    assert!(a.is_square());
    let f = a.field().clone();
    let n = a.rows();
    let mut h = a.clone();
    for j in 0..n.saturating_sub(2) {
        let Some(i) = (j + 1..n).find(|&i| !f.is_zero(&h[(i, j)])) else {
            continue;
        };
        if i != j + 1 {
            for c in 0..n {
                let t = h[(i, c)].clone();
                h[(i, c)] = h[(j + 1, c)].clone();
                h[(j + 1, c)] = t;
            }
            for r in 0..n {
                let t = h[(r, i)].clone();
                h[(r, i)] = h[(r, j + 1)].clone();
                h[(r, j + 1)] = t;
            }
        }
        let piv_inv = f.inv(&h[(j + 1, j)]).expect("nonzero pivot");
        for k in j + 2..n {
            if f.is_zero(&h[(k, j)]) {
                continue;
            }
            let u = f.mul(&h[(k, j)], &piv_inv);
            for c in 0..n {
                let v = f.mul(&u, &h[(j + 1, c)]);
                h[(k, c)] = f.sub(&h[(k, c)], &v);
            }
            for r in 0..n {
                let v = f.mul(&u, &h[(r, k)]);
                h[(r, j + 1)] = f.add(&h[(r, j + 1)], &v);
            }
        }
    }
    // p[m] = char poly of the leading m×m block
    let mut p: Vec<Vec<F::Elem>> = vec![vec![f.one()]];
    for m in 0..n {
        let x_minus = vec![f.neg(&h[(m, m)]), f.one()];
        let mut next = mul(&f, &x_minus, &p[m]);
        let mut prod = f.one();
        for i in (0..m).rev() {
            prod = f.mul(&prod, &h[(i + 1, i)]);
            let coef = f.mul(&h[(i, m)], &prod);
            if f.is_zero(&coef) {
                continue;
            }
            let term: Vec<F::Elem> = p[i].iter().map(|c| f.mul(c, &coef)).collect();
            next = sub(&f, &next, &term);
        }
        p.push(next);
    }
    p.pop().expect("nonempty")
}

fn mulmod_poly(f: &PrimeField, a: &[u64], b: &[u64], m: &[u64]) -> Vec<u64> {
    rem(f, &mul(f, a, b), m)
}

fn powmod_poly(f: &PrimeField, base: &[u64], mut e: u64, m: &[u64]) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = rem(f, base, m);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod_poly(f, &acc, &b, m);
        }
        b = mulmod_poly(f, &b, &b, m);
        e >>= 1;
    }
    rem(f, &acc, m)
}

const BRUTE_FORCE_LIMIT: u64 = 4096;

/// Distinct roots in F_p, sorted. Small fields are scanned; larger ones use
/// `gcd(x^p − x, f)` followed by Cantor–Zassenhaus splitting with a fixed seed.
pub fn prime_field_roots(f: &PrimeField, a: &[u64]) -> Vec<u64> {
    let a = monic(f, a);
    if a.len() <= 1 {
        return Vec::new();
    }
    let p = f.modulus();
    if p <= BRUTE_FORCE_LIMIT {
        return (0..p).filter(|x| eval(f, &a, x) == 0).collect();
    }
    let xp = powmod_poly(f, &[0, 1], p, &a);
    let split = gcd(f, &a, &sub(f, &xp, &[0, 1]));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut roots = Vec::new();
    let mut stack = vec![split];
    while let Some(g) = stack.pop() {
        match g.len() {
            0 | 1 => {}
            2 => roots.push(f.neg(&g[0])),
            _ => loop {
                let shift = f.random(&mut rng);
                let t = powmod_poly(f, &[shift, 1], (p - 1) / 2, &g);
                let h = gcd(f, &g, &sub(f, &t, &[1]));
                if h.len() > 1 && h.len() < g.len() {
                    let (q, _) = divrem(f, &g, &h);
                    stack.push(h);
                    stack.push(monic(f, &q));
                    break;
                }
            },
        }
    }
    roots.sort_unstable();
    roots
}

fn eval_int(g: &[BigInt], x: &BigInt) -> BigInt {
    g.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// Distinct rational roots, sorted. The polynomial is rescaled to a monic integer
/// polynomial, simple roots are found modulo a small prime where it stays squarefree,
/// lifted by Newton iteration past the Cauchy bound, and verified exactly.
pub fn rational_roots(a: &[BigRational]) -> Vec<BigRational> {
    let q = Rationals;
    let a = monic(&q, a);
    if a.len() <= 1 {
        return Vec::new();
    }
    // Work with the squarefree part so every root is simple.
    let a = {
        let g = gcd(&q, &a, &derivative(&q, &a));
        monic(&q, &divrem(&q, &a, &g).0)
    };
    let n = a.len() - 1;
    if n == 1 {
        return vec![-a[0].clone()];
    }
    let den = a
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    // g(y) = den^n a(y / den) is monic with integer coefficients.
    let g: Vec<BigInt> = a
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let scaled = c * BigRational::from_integer(num_traits::pow(den.clone(), n - i));
            scaled.to_integer()
        })
        .collect();
    let g_prime: Vec<BigInt> = g
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect();
    let bound = g.iter().map(|c| c.abs()).max().unwrap_or_default() + BigInt::one();

    let mut p = 3u64;
    let field = loop {
        if is_prime_u64(p) {
            let f = PrimeField::new(p).expect("prime");
            let gp: Vec<u64> = g.iter().map(|c| reduce_bigint(c, p)).collect();
            if is_squarefree(&f, &gp) {
                break f;
            }
        }
        p += 2;
    };
    let gp: Vec<u64> = g.iter().map(|c| reduce_bigint(c, p)).collect();
    let mut roots = Vec::new();
    for r0 in prime_field_roots(&field, &gp) {
        let mut m = BigInt::from(p);
        let mut r = BigInt::from(r0);
        while m <= &bound * 2u32 {
            m = &m * &m;
            let val = eval_int(&g, &r);
            let der = eval_int(&g_prime, &r);
            let Some(inv) = mod_inverse(&der, &m) else {
                break;
            };
            r = (r - val * inv).mod_floor(&m);
        }
        // symmetric representative
        if &r * 2u32 > m {
            r -= &m;
        }
        if eval_int(&g, &r).is_zero() {
            roots.push(BigRational::new(r, den.clone()));
        }
    }
    roots.sort();
    roots.dedup();
    roots
}

fn reduce_bigint(c: &BigInt, p: u64) -> u64 {
    let r = c.mod_floor(&BigInt::from(p));
    r.try_into().expect("residue fits in u64")
}

//! Exact scalar fields: prime fields F_p (p odd) and the rationals.
//!
//! Algorithms throughout the crate are generic over [`Field`]. A field value is a small
//! descriptor (the modulus, or nothing for ℚ) and every arithmetic operation goes through
//! it, so elements themselves stay plain data (`u64` residues or `BigRational`).

use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serializable description of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldSpec {
    Prime { p: u64 },
    Rational,
}

impl FieldSpec {
    /// Parses the command-line shorthand: `p=101`, `101`, `rational` or `Q`.
    pub fn parse(s: &str) -> Result<FieldSpec> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("rational") || t == "Q" || t.eq_ignore_ascii_case("qq") {
            return Ok(FieldSpec::Rational);
        }
        let digits = t.strip_prefix("p=").unwrap_or(t);
        let p: u64 = digits
            .parse()
            .map_err(|_| Error::InvalidField(format!("cannot parse field '{s}'")))?;
        PrimeField::new(p)?;
        Ok(FieldSpec::Prime { p })
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, FieldSpec::Prime { .. })
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Prime { p } => write!(f, "F_{p}"),
            FieldSpec::Rational => write!(f, "Q"),
        }
    }
}

pub trait Field: Clone + fmt::Debug + PartialEq + Eq + Send + Sync + 'static {
    type Elem: Clone + fmt::Debug + PartialEq + Eq + Hash + Ord + Send + Sync;

    fn spec(&self) -> FieldSpec;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    /// Some square root of `a`, if one exists in the field.
    fn sqrt(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// Number of elements, `None` for infinite fields.
    fn order(&self) -> Option<u64>;
    /// The `index`-th element in a fixed enumeration `0, 1, …, q−1` (finite fields only;
    /// for ℚ this returns the integer `index`).
    fn element(&self, index: u64) -> Self::Elem;
    /// A random element: uniform for finite fields, a small integer for ℚ.
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;
    fn format(&self, a: &Self::Elem) -> String;
    fn parse(&self, s: &str) -> Result<Self::Elem>;
    /// Distinct roots in the field of a polynomial given by coefficients, constant term first.
    fn roots(&self, poly: &[Self::Elem]) -> Vec<Self::Elem>;

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    fn is_square(&self, a: &Self::Elem) -> bool {
        self.sqrt(a).is_some()
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

/// The prime field F_p for an odd prime p < 2^62.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

const MAX_PRIME: u64 = 1 << 62;

impl PrimeField {
    pub fn new(p: u64) -> Result<PrimeField> {
        if p == 2 {
            return Err(Error::InvalidField(
                "characteristic 2 is not supported".into(),
            ));
        }
        if p >= MAX_PRIME {
            return Err(Error::InvalidField(format!("p = {p} is not below 2^62")));
        }
        if !is_prime_u64(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    fn powmod(&self, a: u64, e: u64) -> u64 {
        pow_mod(a, e, self.p)
    }

    /// Tonelli–Shanks.
    fn tonelli_shanks(&self, a: u64) -> Option<u64> {
        let p = self.p;
        if a == 0 {
            return Some(0);
        }
        if self.powmod(a, (p - 1) / 2) != 1 {
            return None;
        }
        if p % 4 == 3 {
            return Some(self.powmod(a, (p + 1) / 4));
        }
        let mut q = p - 1;
        let mut s = 0u32;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let mut z = 2u64;
        while self.powmod(z, (p - 1) / 2) != p - 1 {
            z += 1;
        }
        let mut m = s;
        let mut c = self.powmod(z, q);
        let mut t = self.powmod(a, q);
        let mut r = self.powmod(a, (q + 1) / 2);
        while t != 1 {
            let mut i = 0u32;
            let mut tt = t;
            while tt != 1 {
                tt = self.mulmod(tt, tt);
                i += 1;
            }
            let b = self.powmod(c, 1u64 << (m - i - 1));
            m = i;
            c = self.mulmod(b, b);
            t = self.mulmod(t, c);
            r = self.mulmod(r, b);
        }
        Some(r)
    }
}

pub(crate) fn pow_mod(a: u64, mut e: u64, p: u64) -> u64 {
    let mut base = (a % p) as u128;
    let mut acc: u128 = 1 % p as u128;
    let m = p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc as u64
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &sp in &SMALL {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

impl Field for PrimeField {
    type Elem = u64;

    fn spec(&self) -> FieldSpec {
        FieldSpec::Prime { p: self.p }
    }
    #[inline]
    fn zero(&self) -> u64 {
        0
    }
    #[inline]
    fn one(&self) -> u64 {
        1
    }
    fn from_i64(&self, v: i64) -> u64 {
        self.reduce_i64(v)
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.mulmod(*a, *b)
    }
    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(self.powmod(*a, self.p - 2))
        }
    }
    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn sqrt(&self, a: &u64) -> Option<u64> {
        self.tonelli_shanks(*a)
    }
    fn order(&self) -> Option<u64> {
        Some(self.p)
    }
    fn element(&self, index: u64) -> u64 {
        index % self.p
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }
    fn format(&self, a: &u64) -> String {
        a.to_string()
    }
    fn roots(&self, poly: &[u64]) -> Vec<u64> {
        crate::poly::prime_field_roots(self, poly)
    }
    fn parse(&self, s: &str) -> Result<u64> {
        let t = s.trim();
        if let Some((num, den)) = t.split_once('/') {
            let n = self.parse(num)?;
            let d = self.parse(den)?;
            return self
                .div(&n, &d)
                .ok_or_else(|| Error::Parse(format!("division by zero in '{s}'")));
        }
        let v: i128 = t
            .parse()
            .map_err(|_| Error::Parse(format!("not an integer: '{s}'")))?;
        Ok(v.rem_euclid(self.p as i128) as u64)
    }
    fn pow(&self, a: &u64, e: u64) -> u64 {
        self.powmod(*a, e)
    }
    fn is_square(&self, a: &u64) -> bool {
        *a == 0 || self.powmod(*a, (self.p - 1) / 2) == 1
    }
}

/// The field of rational numbers with arbitrary-precision numerators and denominators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rationals;

fn exact_sqrt(v: &BigInt) -> Option<BigInt> {
    if v.is_negative() {
        return None;
    }
    let r = v.sqrt();
    if &r * &r == *v {
        Some(r)
    } else {
        None
    }
}

impl Field for Rationals {
    type Elem = BigRational;

    fn spec(&self) -> FieldSpec {
        FieldSpec::Rational
    }
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn sqrt(&self, a: &BigRational) -> Option<BigRational> {
        let n = exact_sqrt(a.numer())?;
        let d = exact_sqrt(a.denom())?;
        Some(BigRational::new(n, d))
    }
    fn order(&self) -> Option<u64> {
        None
    }
    fn element(&self, index: u64) -> BigRational {
        BigRational::from_integer(BigInt::from(index))
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> BigRational {
        self.from_i64(rng.gen_range(-9..=9))
    }
    fn format(&self, a: &BigRational) -> String {
        if a.is_integer() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }
    fn roots(&self, poly: &[BigRational]) -> Vec<BigRational> {
        crate::poly::rational_roots(poly)
    }
    fn parse(&self, s: &str) -> Result<BigRational> {
        let t = s.trim();
        let bad = || Error::Parse(format!("not a rational: '{s}'"));
        match t.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(Error::Parse(format!("zero denominator in '{s}'")));
                }
                Ok(BigRational::new(n, d))
            }
            None => {
                let n: BigInt = t.parse().map_err(|_| bad())?;
                Ok(BigRational::from_integer(n))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_characteristic_two_and_composites() {
        assert!(PrimeField::new(2).is_err());
        assert!(PrimeField::new(9).is_err());
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(101).is_ok());
        assert!(PrimeField::new((1u64 << 61) - 1).is_ok());
        assert!(FieldSpec::parse("p=2").is_err());
    }

    #[test]
    fn field_spec_parsing() {
        assert_eq!(FieldSpec::parse("p=101").unwrap(), FieldSpec::Prime { p: 101 });
        assert_eq!(FieldSpec::parse("7").unwrap(), FieldSpec::Prime { p: 7 });
        assert_eq!(FieldSpec::parse("rational").unwrap(), FieldSpec::Rational);
        let json = serde_json::to_string(&FieldSpec::Prime { p: 101 }).unwrap();
        assert_eq!(json, r#"{"kind":"prime","p":101}"#);
    }

    #[test]
    fn scalar_strings() {
        let q = Rationals;
        let x = q.parse("6/-14").unwrap();
        assert_eq!(q.format(&x), "-3/7");
        assert_eq!(q.format(&q.parse("4/2").unwrap()), "2");
        let f = PrimeField::new(5).unwrap();
        assert_eq!(f.parse("-1").unwrap(), 4);
        assert_eq!(f.parse("1/2").unwrap(), 3);
        assert_eq!(f.format(&(17 % 5)), "2");
    }

    #[test]
    fn square_roots() {
        let f = PrimeField::new(101).unwrap();
        let r = f.sqrt(&100).unwrap();
        assert_eq!(f.mul(&r, &r), 100);
        let f3 = PrimeField::new(3).unwrap();
        assert!(f3.sqrt(&2).is_none());
        // p ≡ 1 mod 8 exercises the full Tonelli–Shanks loop.
        let f17 = PrimeField::new(17).unwrap();
        for a in 0..17u64 {
            let brute = (0..17u64).any(|x| x * x % 17 == a);
            match f17.sqrt(&a) {
                Some(r) => assert_eq!(r * r % 17, a),
                None => assert!(!brute),
            }
        }
        let q = Rationals;
        assert_eq!(q.sqrt(&q.parse("9/4").unwrap()), Some(q.parse("3/2").unwrap()));
        assert!(q.sqrt(&q.from_i64(2)).is_none());
        assert!(q.sqrt(&q.from_i64(-4)).is_none());
    }

    proptest! {
        #[test]
        fn prime_field_axioms(a in 0u64..1_000_003, b in 0u64..1_000_003, c in 0u64..1_000_003) {
            let f = PrimeField::new(1_000_003).unwrap();
            prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
            prop_assert_eq!(f.add(&f.add(&a, &b), &c), f.add(&a, &f.add(&b, &c)));
            prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
            prop_assert_eq!(f.add(&a, &f.neg(&a)), 0);
            if a != 0 {
                prop_assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), 1);
            }
        }

        #[test]
        fn rational_field_axioms(an in -50i64..50, ad in 1i64..20, bn in -50i64..50, bd in 1i64..20, cn in -50i64..50) {
            let q = Rationals;
            let a = BigRational::new(an.into(), ad.into());
            let b = BigRational::new(bn.into(), bd.into());
            let c = q.from_i64(cn);
            prop_assert_eq!(q.mul(&q.mul(&a, &b), &c), q.mul(&a, &q.mul(&b, &c)));
            prop_assert_eq!(q.mul(&a, &q.add(&b, &c)), q.add(&q.mul(&a, &b), &q.mul(&a, &c)));
            if !a.is_zero() {
                prop_assert!(q.is_one(&q.mul(&a, &q.inv(&a).unwrap())));
            }
            // lowest terms with positive denominator
            prop_assert!(a.denom().is_positive());
        }
    }
}

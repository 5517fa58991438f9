use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A finite sum `sum_d q_d * sqrt(d)` with rational `q_d` and distinct
/// squarefree radicands `d >= 1`.
///
/// Square roots of distinct squarefree integers are linearly independent
/// over the rationals, so this representation is canonical: two sums are
/// equal iff their term maps are equal. That makes equality and "is this a
/// rational multiple of that" decidable without floating point.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SurdSum {
    terms: BTreeMap<BigInt, BigRational>,
}

impl SurdSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(q: BigRational) -> Self {
        let mut s = Self::zero();
        s.add_term(BigInt::one(), q);
        s
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value when it is rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&BigInt::one()).cloned(),
            _ => None,
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, d: BigInt, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let e = self.terms.entry(d).or_insert_with(BigRational::zero);
        *e += q;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (d, q) in &other.terms {
            out.add_term(d.clone(), q.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        SurdSum {
            terms: self.terms.iter().map(|(d, q)| (d.clone(), -q)).collect(),
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        SurdSum {
            terms: self.terms.iter().map(|(d, q)| (d.clone(), q * r)).collect(),
        }
    }

    /// Multiplies by `sqrt(m)` for squarefree `m >= 1`.
    pub fn mul_sqrt(&self, m: &BigInt) -> Self {
        debug_assert!(m.is_positive());
        let mut out = Self::zero();
        for (d, q) in &self.terms {
            // d and m squarefree: sqrt(d m) = g sqrt(d m / g^2), g = gcd(d, m)
            let g = d.gcd(m);
            let rad = (d / &g) * (m / &g);
            out.add_term(rad, q * BigRational::from_integer(g));
        }
        out
    }

    /// `r` with `self = r * other`, if such a rational exists.
    ///
    /// `None` when `other` is zero or the quotient is irrational.
    pub fn ratio(&self, other: &Self) -> Option<BigRational> {
        let (d, q) = other.terms.iter().next()?;
        let r = self.terms.get(d).cloned().unwrap_or_else(BigRational::zero) / q;
        (other.scale(&r) == *self).then_some(r)
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(d, q)| q.to_f64().unwrap_or(f64::NAN) * d.to_f64().unwrap_or(f64::NAN).sqrt())
            .sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigInt, &BigRational)> {
        self.terms.iter()
    }
}

impl fmt::Display for SurdSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (d, q)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if d.is_one() {
                write!(f, "{q}")?;
            } else {
                write!(f, "{q}*sqrt({d})")?;
            }
        }
        Ok(())
    }
}

const TRIAL_LIMIT: u64 = 1 << 20;

/// Writes `n > 0` as `k^2 * m` with `m` squarefree.
///
/// Factors by trial division up to about 10^6. A cofactor left over after
/// that has no prime below the limit. Perfect squares are handled exactly,
/// and so is anything below the cube of the limit (a prime or a product of
/// two distinct primes). Larger non-square cofactors might hide a square
/// factor, so `None` is returned for them.
pub fn squarefree_split(n: &BigInt) -> Option<(BigInt, BigInt)> {
    if !n.is_positive() {
        return None;
    }
    if let Some(small) = n.to_u128() {
        return split_u128(small).map(|(k, m)| (BigInt::from(k), BigInt::from(m)));
    }
    let mut rem = n.clone();
    let mut k = BigInt::one();
    let mut m = BigInt::one();
    let mut p = 2u64;
    while p <= TRIAL_LIMIT {
        let bp = BigInt::from(p);
        if &bp * &bp > rem {
            break;
        }
        let mut e = 0u32;
        while (&rem % &bp).is_zero() {
            rem /= &bp;
            e += 1;
        }
        if e / 2 > 0 {
            k *= num_traits::pow(bp.clone(), (e / 2) as usize);
        }
        if e % 2 == 1 {
            m *= &bp;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    finish(rem, k, m, p)
}

fn finish(rem: BigInt, mut k: BigInt, m: BigInt, p: u64) -> Option<(BigInt, BigInt)> {
    if rem.is_one() {
        return Some((k, m));
    }
    let bp = BigInt::from(p);
    if &bp * &bp > rem {
        // rem is prime
        return Some((k, m * rem));
    }
    let r = rem.sqrt();
    if &r * &r == rem {
        k *= r;
        return Some((k, m));
    }
    if rem < num_traits::pow(BigInt::from(TRIAL_LIMIT), 3) {
        // a prime or a product of two distinct primes
        return Some((k, m * rem));
    }
    None
}

fn split_u128(n: u128) -> Option<(u128, u128)> {
    let mut rem = n;
    let mut k = 1u128;
    let mut m = 1u128;
    let mut p = 2u128;
    while p <= TRIAL_LIMIT as u128 && p * p <= rem {
        if rem.is_multiple_of(p) {
            let mut e = 0;
            while rem.is_multiple_of(p) {
                rem /= p;
                e += 1;
            }
            for _ in 0..e / 2 {
                k = k.checked_mul(p)?;
            }
            if e % 2 == 1 {
                m *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let (k, m) = finish(BigInt::from(rem), BigInt::from(k), BigInt::from(m), p as u64)?;
    Some((k.to_u128()?, m.to_u128()?))
}

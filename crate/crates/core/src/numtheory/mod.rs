//! Exact integer and rational arithmetic: reduced fractions, Jacobi symbols,
//! quadratic Gauss sums by direct summation, odd/odd rationals between two
//! reals, and exact sums of square roots.

mod surd;

pub use surd::{squarefree_split, SurdSum};

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumTheoryError {
    #[error("invalid denominator: zero")]
    ZeroDenominator,
    #[error("Jacobi symbol needs an odd positive modulus, got {0}")]
    JacobiDomain(BigInt),
    #[error("unsupported modulus {0}: Gauss sums are evaluated for odd positive moduli only")]
    UnsupportedModulus(BigInt),
    #[error("u = {u} and v = {v} share a factor; reduce the fraction first")]
    NotReduced { u: BigInt, v: BigInt },
    #[error("modulus {0} is too large for direct summation")]
    ModulusTooLarge(BigInt),
    #[error("empty interval ({x}, {y})")]
    EmptyInterval { x: f64, y: f64 },
    #[error("interval endpoints must be finite")]
    NonFinite,
}

/// An exact fraction, always reduced with a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self, NumTheoryError> {
        reduce_fraction(&p.into(), &q.into())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Option<Self> {
        (!self.is_zero()).then(|| Rational(self.0.recip()))
    }

    /// Denominator is odd (membership in the 2-local rationals).
    pub fn has_odd_denominator(&self) -> bool {
        self.denom().is_odd()
    }

    /// Numerator and denominator both odd.
    pub fn is_odd_over_odd(&self) -> bool {
        self.numer().is_odd() && self.denom().is_odd()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// The exact binary value of a finite float.
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    /// Parses `p/q`, an integer, or a decimal literal such as `-1.25e-3`.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            return reduce_fraction(&p, &q).ok();
        }
        parse_decimal(s)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn into_big(self) -> BigRational {
        self.0
    }

    pub fn from_big(r: BigRational) -> Self {
        // BigRational keeps itself reduced with a positive denominator
        Rational(r)
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.as_bytes().first()? {
        b'-' => (true, &mant[1..]),
        b'+' => (false, &mant[1..]),
        _ => (false, mant),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    // keep exponents sane: 10^±4000 is far outside any f64 anyway
    if exp.abs() > 4000 {
        return None;
    }
    let digits: BigInt = format!("0{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Some(Rational(r))
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Rational {
    type Err = NumTheoryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // the only structured failure worth reporting is a zero denominator
        if let Some((p, q)) = s.split_once('/') {
            if let (Ok(p), Ok(q)) = (p.trim().parse::<BigInt>(), q.trim().parse::<BigInt>()) {
                return reduce_fraction(&p, &q);
            }
        }
        Rational::parse(s).ok_or(NumTheoryError::ZeroDenominator)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational($tr::$m(&self.0, &rhs.0))
            }
        }
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational($tr::$m(self.0, rhs.0))
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// `p/q` in lowest terms with a positive denominator.
pub fn reduce_fraction(p: &BigInt, q: &BigInt) -> Result<Rational, NumTheoryError> {
    if q.is_zero() {
        return Err(NumTheoryError::ZeroDenominator);
    }
    let g = p.gcd(q);
    let (mut u, mut v) = (p / &g, q / &g);
    if v.is_negative() {
        u = -u;
        v = -v;
    }
    Ok(Rational(BigRational::new_raw(u, v)))
}

/// Jacobi symbol `(a/n)` for odd `n >= 1`, by the binary algorithm.
pub fn jacobi_symbol(a: &BigInt, n: &BigInt) -> Result<i8, NumTheoryError> {
    if !n.is_positive() || n.is_even() {
        return Err(NumTheoryError::JacobiDomain(n.clone()));
    }
    let mut n = n.clone();
    let mut a = a.mod_floor(&n);
    let mut t = 1i8;
    let eight = BigInt::from(8);
    let four = BigInt::from(4);
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        a >>= tz;
        if tz % 2 == 1 {
            let r = (&n % &eight).to_u8().unwrap_or(0);
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if (&a % &four) == BigInt::from(3) && (&n % &four) == BigInt::from(3) {
            t = -t;
        }
        a = a.mod_floor(&n);
    }
    Ok(if n.is_one() { t } else { 0 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussSumValue {
    pub value: Complex64,
    pub modulus_v: BigInt,
    pub residue_u: BigInt,
    pub shift_nprime: BigInt,
}

/// Direct moduli beyond this are refused; summation is O(v).
pub const GAUSS_SUM_MAX_MODULUS: u64 = 1 << 32;

/// `sum_{m=0}^{v-1} exp(2 pi i (m^2 u + m n') / v)` by direct summation.
///
/// Phases are reduced modulo `v` in exact integer arithmetic before any
/// trigonometry, so accuracy does not degrade with `m`.
pub fn gauss_sum(u: &BigInt, v: &BigInt, nprime: &BigInt) -> Result<GaussSumValue, NumTheoryError> {
    if !v.is_positive() || v.is_even() {
        return Err(NumTheoryError::UnsupportedModulus(v.clone()));
    }
    if !u.gcd(v).is_one() {
        return Err(NumTheoryError::NotReduced { u: u.clone(), v: v.clone() });
    }
    let vv = v
        .to_u64()
        .filter(|&x| x <= GAUSS_SUM_MAX_MODULUS)
        .ok_or_else(|| NumTheoryError::ModulusTooLarge(v.clone()))?;
    let uu = u.mod_floor(v).to_u64().unwrap_or(0) as u128;
    let nn = nprime.mod_floor(v).to_u64().unwrap_or(0) as u128;
    let m128 = vv as u128;
    let step = std::f64::consts::TAU / vv as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..m128 {
        let k = ((m * m % m128) * uu + m * nn) % m128;
        acc += Complex64::from_polar(1.0, step * k as f64);
    }
    Ok(GaussSumValue {
        value: acc,
        modulus_v: v.clone(),
        residue_u: u.clone(),
        shift_nprime: nprime.clone(),
    })
}

/// An odd/odd rational strictly between `x` and `y`.
///
/// Takes the smallest `beta >= 1` with `3/(2 beta + 1) < y - x`, then the
/// smallest odd `2 alpha + 1 > (2 beta + 1) x`. Both inputs are converted to
/// exact rationals first, so the choice is never perturbed by rounding.
pub fn qodd_between(x: f64, y: f64) -> Result<Rational, NumTheoryError> {
    if !x.is_finite() || !y.is_finite() {
        return Err(NumTheoryError::NonFinite);
    }
    if x >= y {
        return Err(NumTheoryError::EmptyInterval { x, y });
    }
    let xr = BigRational::from_float(x).ok_or(NumTheoryError::NonFinite)?;
    let yr = BigRational::from_float(y).ok_or(NumTheoryError::NonFinite)?;
    let gap = &yr - &xr;
    // 2 beta + 1 > 3 / gap
    let bound: BigInt = (BigRational::from_integer(3.into()) / &gap).floor().to_integer();
    let mut den: BigInt = bound + 1;
    if den.is_even() {
        den += 1;
    }
    if den < BigInt::from(3) {
        den = BigInt::from(3);
    }
    // smallest odd integer strictly above den * x
    let lo = (BigRational::from_integer(den.clone()) * &xr).floor().to_integer();
    let mut num: BigInt = lo + 1;
    if num.is_even() {
        num += 1;
    }
    let r = reduce_fraction(&num, &den)?;
    debug_assert!(r.is_odd_over_odd());
    Ok(r)
}

/// The simplest rational (smallest denominator) in the closed interval
/// `[lo, hi]`, via the continued-fraction walk of the Stern-Brocot tree.
pub fn simplest_in_interval(lo: &BigRational, hi: &BigRational) -> BigRational {
    debug_assert!(lo <= hi);
    if lo.is_positive() {
        simplest_pos(lo, hi)
    } else if hi.is_negative() {
        -simplest_pos(&-hi, &-lo)
    } else {
        BigRational::zero()
    }
}

fn simplest_pos(lo: &BigRational, hi: &BigRational) -> BigRational {
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    // an integer in (lo, hi]
    if fl.clone() + BigRational::one() <= *hi {
        return fl + BigRational::one();
    }
    let rest = simplest_pos(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + rest.recip()
}

//! Exact scalars: rationals, Gaussian rationals, and extended naturals/integers.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Arbitrary-precision rational in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(num: i64, den: i64) -> Rat {
        assert!(den != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn int(n: i64) -> Rat {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Rat {
        Rat(BigRational::zero())
    }

    pub fn one() -> Rat {
        Rat(BigRational::one())
    }

    pub fn from_big(r: BigRational) -> Rat {
        Rat(r)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        self.0.cmp(&BigRational::zero())
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn square(&self) -> Rat {
        Rat(&self.0 * &self.0)
    }

    pub fn recip(&self) -> Rat {
        Rat(self.0.recip())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // both parts overflow f64; scale down first
            let n = self.0.numer().to_f64().unwrap_or(f64::INFINITY);
            let d = self.0.denom().to_f64().unwrap_or(f64::INFINITY);
            n / d
        })
    }

    /// Dyadic rational nearest to `x` with denominator `2^bits`.
    pub fn from_f64_dyadic(x: f64, bits: u32) -> Rat {
        let scale = 2f64.powi(bits as i32);
        let n = (x * scale).round();
        let num = BigInt::from(n as i128);
        let den = BigInt::one() << bits as usize;
        Rat(BigRational::new(num, den))
    }

    pub fn floor(&self) -> Rat {
        Rat(self.0.floor())
    }

    /// Exact square root when `self` is the square of a rational.
    pub fn sqrt_exact(&self) -> Option<Rat> {
        if self.0.is_negative() {
            return None;
        }
        let n = self.0.numer().sqrt();
        let d = self.0.denom().sqrt();
        if &(&n * &n) == self.0.numer() && &(&d * &d) == self.0.denom() {
            Some(Rat(BigRational::new(n, d)))
        } else {
            None
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rat, Error> {
        let bad = || Error::Parse(format!("invalid rational `{s}`"));
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = match den {
            Some(d) => d.parse().map_err(|_| bad())?,
            None => BigInt::one(),
        };
        if den.is_zero() {
            return Err(bad());
        }
        Ok(Rat(BigRational::new(num, den)))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! rat_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$m(&rhs.0))
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(self.0.$m(rhs.0))
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat(self.0.$m(&rhs.0))
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat((&self.0).$m(rhs.0))
            }
        }
    };
}

rat_binop!(Add, add);
rat_binop!(Sub, sub);
rat_binop!(Mul, mul);
rat_binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

/// Gaussian rational `re + im·i`; the spectral parameter λ lives here.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GQ {
    pub re: Rat,
    pub im: Rat,
}

impl GQ {
    pub fn new(re: Rat, im: Rat) -> GQ {
        GQ { re, im }
    }

    pub fn real(re: Rat) -> GQ {
        GQ { re, im: Rat::zero() }
    }

    pub fn int(re: i64, im: i64) -> GQ {
        GQ::new(Rat::int(re), Rat::int(im))
    }

    pub fn zero() -> GQ {
        GQ::default()
    }

    pub fn one() -> GQ {
        GQ::int(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> GQ {
        GQ::new(self.re.clone(), -&self.im)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn to_complex(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Exact inverse; `None` for zero.
    pub fn inv(&self) -> Option<GQ> {
        if self.is_zero() {
            return None;
        }
        let n = abs2(self);
        Some(GQ::new(&self.re / &n, -(&self.im / &n)))
    }
}

/// Exact squared modulus `re² + im²`.
pub fn abs2(z: &GQ) -> Rat {
    z.re.square() + z.im.square()
}

impl fmt::Debug for GQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Same syntax the expression language accepts: `re`, `re+imi`, `imi`.
impl fmt::Display for GQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            return write!(f, "{}i", self.im);
        }
        if self.im.signum() == Ordering::Less {
            write!(f, "{}-{}i", self.re, self.im.abs())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add<&GQ> for &GQ {
    type Output = GQ;
    fn add(self, rhs: &GQ) -> GQ {
        GQ::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&GQ> for &GQ {
    type Output = GQ;
    fn sub(self, rhs: &GQ) -> GQ {
        GQ::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&GQ> for &GQ {
    type Output = GQ;
    fn mul(self, rhs: &GQ) -> GQ {
        GQ::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GQ {
    type Output = GQ;
    fn neg(self) -> GQ {
        GQ::new(-&self.re, -&self.im)
    }
}

/// Element of ℕ ∪ {∞}. `Fin(n) < Inf` for every `n`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ExtNat {
    Fin(u64),
    Inf,
}

impl ExtNat {
    pub const ZERO: ExtNat = ExtNat::Fin(0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtNat::Fin(_))
    }

    pub fn is_zero(self) -> bool {
        self == ExtNat::ZERO
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            ExtNat::Fin(n) => Some(n),
            ExtNat::Inf => None,
        }
    }

    /// Fredholm-style difference `self ⊖ other`.
    pub fn index_sub(self, other: ExtNat) -> ExtInt {
        match (self, other) {
            (ExtNat::Fin(a), ExtNat::Fin(b)) => ExtInt::Fin(a as i64 - b as i64),
            (ExtNat::Inf, ExtNat::Fin(_)) => ExtInt::PlusInf,
            (ExtNat::Fin(_), ExtNat::Inf) => ExtInt::MinusInf,
            (ExtNat::Inf, ExtNat::Inf) => ExtInt::Undefined,
        }
    }

    /// Truncated subtraction for finite values; `Inf - finite = Inf`.
    pub fn saturating_sub(self, k: u64) -> ExtNat {
        match self {
            ExtNat::Fin(n) => ExtNat::Fin(n.saturating_sub(k)),
            ExtNat::Inf => ExtNat::Inf,
        }
    }
}

pub fn extnat_add(a: ExtNat, b: ExtNat) -> ExtNat {
    match (a, b) {
        (ExtNat::Fin(m), ExtNat::Fin(n)) => ExtNat::Fin(m + n),
        _ => ExtNat::Inf,
    }
}

/// `mult` orthogonal copies of a space of dimension `v`.
pub fn extnat_scale(mult: ExtNat, v: ExtNat) -> ExtNat {
    match (mult, v) {
        (ExtNat::Fin(0), _) | (_, ExtNat::Fin(0)) => ExtNat::ZERO,
        (ExtNat::Fin(m), ExtNat::Fin(n)) => ExtNat::Fin(m * n),
        _ => ExtNat::Inf,
    }
}

impl Add for ExtNat {
    type Output = ExtNat;
    fn add(self, rhs: ExtNat) -> ExtNat {
        extnat_add(self, rhs)
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(n) => write!(f, "{n}"),
            ExtNat::Inf => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtNat {
    type Err = Error;

    fn from_str(s: &str) -> Result<ExtNat, Error> {
        let s = s.trim();
        if s == "inf" {
            return Ok(ExtNat::Inf);
        }
        s.parse::<u64>()
            .map(ExtNat::Fin)
            .map_err(|_| Error::Parse(format!("invalid multiplicity `{s}`")))
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtNat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<ExtNat, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Extended integer carrying a Fredholm index. `Undefined` only arises as ∞ ⊖ ∞.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ExtInt {
    Fin(i64),
    PlusInf,
    MinusInf,
    Undefined,
}

impl ExtInt {
    /// Sum of indices; `None` when the result is not determined.
    pub fn checked_add(self, other: ExtInt) -> Option<ExtInt> {
        use ExtInt::*;
        match (self, other) {
            (Undefined, _) | (_, Undefined) => None,
            (Fin(a), Fin(b)) => Some(Fin(a + b)),
            (PlusInf, MinusInf) | (MinusInf, PlusInf) => None,
            (PlusInf, _) | (_, PlusInf) => Some(PlusInf),
            (MinusInf, _) | (_, MinusInf) => Some(MinusInf),
        }
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::Fin(k) => write!(f, "{k}"),
            ExtInt::PlusInf => f.write_str("+inf"),
            ExtInt::MinusInf => f.write_str("-inf"),
            ExtInt::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for ExtInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

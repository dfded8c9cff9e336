//! Exact rationals in canonical reduced form.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational, reduced with a positive denominator. Values whose
/// numerator and denominator fit in `i64` stay on a machine-word path and
/// only spill to big integers on overflow, so equal values have equal
/// representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(i64, i64),
    Big(BigRational),
}

impl Rational {
    /// `n / d` from a reduced `i128` pair with `d > 0`.
    fn from_wide(n: i128, d: i128) -> Self {
        let g = n.gcd(&d);
        let (n, d) = if g > 1 { (n / g, d / g) } else { (n, d) };
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(BigRational::new(BigInt::from(n), BigInt::from(d)))),
        }
    }

    fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(r)),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(r) => r.clone(),
        }
    }

    /// `n / d`; panics on a zero denominator.
    pub fn new(n: BigInt, d: BigInt) -> Self {
        Self::from_big(BigRational::new(n, d))
    }

    pub fn from_integer(n: BigInt) -> Self {
        Self::from_big(BigRational::from_integer(n))
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// `1 / self`; panics on zero.
    pub fn recip(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => {
                assert!(*n != 0, "reciprocal of zero");
                let (n, d) = (*n as i128, *d as i128);
                if n < 0 {
                    Self::from_wide(-d, -n)
                } else {
                    Self::from_wide(d, n)
                }
            }
            Repr::Big(r) => Self::from_big(r.recip()),
        }
    }

    fn add_ref(&self, o: &Self) -> Self {
        match (&self.0, &o.0) {
            (Repr::Small(a, 1), Repr::Small(c, 1)) => match a.checked_add(*c) {
                Some(s) => Rational(Repr::Small(s, 1)),
                None => Self::from_wide(*a as i128 + *c as i128, 1),
            },
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                Self::from_wide(a * d + c * b, b * d)
            }
            _ => Self::from_big(self.to_big() + o.to_big()),
        }
    }

    fn mul_ref(&self, o: &Self) -> Self {
        match (&self.0, &o.0) {
            (Repr::Small(a, 1), Repr::Small(c, 1)) => match a.checked_mul(*c) {
                Some(p) => Rational(Repr::Small(p, 1)),
                None => Self::from_wide(*a as i128 * *c as i128, 1),
            },
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                Self::from_wide(a * c, b * d)
            }
            _ => Self::from_big(self.to_big() * o.to_big()),
        }
    }

    fn neg_ref(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => match n.checked_neg() {
                Some(m) => Rational(Repr::Small(m, *d)),
                None => Self::from_wide(-(*n as i128), *d as i128),
            },
            Repr::Big(r) => Self::from_big(-r),
        }
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }

    fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }
}

impl Ord for Rational {
    fn cmp(&self, o: &Self) -> Ordering {
        match (&self.0, &o.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big().cmp(&o.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(self))
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(self))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $body:expr) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, o: &Rational) -> Rational {
                $body(self, o)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $m(self, o: Rational) -> Rational {
                $body(self, &o)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, o: &Rational) -> Rational {
                $body(&self, o)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, o: Rational) -> Rational {
                $body(&self, &o)
            }
        }
        impl $atr<&Rational> for Rational {
            fn $am(&mut self, o: &Rational) {
                *self = $body(&*self, o);
            }
        }
        impl $atr<Rational> for Rational {
            fn $am(&mut self, o: Rational) {
                *self = $body(&*self, &o);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, |a: &Rational, b: &Rational| a.add_ref(b));
binop!(Sub, sub, SubAssign, sub_assign, |a: &Rational, b: &Rational| a.add_ref(&b.neg_ref()));
binop!(Mul, mul, MulAssign, mul_assign, |a: &Rational, b: &Rational| a.mul_ref(b));
binop!(Div, div, DivAssign, div_assign, |a: &Rational, b: &Rational| a.mul_ref(&b.recip()));

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::one(), |a, b| a * b)
    }
}

impl<'a> Product<&'a Rational> for Rational {
    fn product<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::one(), |a, b| a * b)
    }
}

pub fn int(n: i64) -> Rational {
    Rational(Repr::Small(n, 1))
}

/// `p / q`; panics when `q = 0`.
pub fn frac(p: i64, q: i64) -> Rational {
    assert!(q != 0, "zero denominator");
    let (p, q) = (p as i128, q as i128);
    if q < 0 {
        Rational::from_wide(-p, -q)
    } else {
        Rational::from_wide(p, q)
    }
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn zero() -> Rational {
    Rational::zero()
}

/// Prints `p` or `p/q`.
pub fn format(r: &Rational) -> String {
    match &r.0 {
        Repr::Small(n, 1) => n.to_string(),
        Repr::Small(n, d) => format!("{n}/{d}"),
        Repr::Big(b) if b.denom().is_one() => b.numer().to_string(),
        Repr::Big(b) => format!("{}/{}", b.numer(), b.denom()),
    }
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse {
        line: 1,
        column: 1,
        message: format!("invalid rational `{s}`"),
    };
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

/// Generalized binomial coefficient `binom(r, k)` for rational `r`.
pub fn binomial(r: &Rational, k: u32) -> Rational {
    let mut acc = one();
    for j in 0..k {
        acc = acc * (r - int(j as i64)) / int(j as i64 + 1);
    }
    acc
}

pub fn factorial(n: u32) -> Rational {
    (1..=n as i64).fold(one(), |acc, j| acc * int(j))
}

/// `(-1)^parity` as a rational.
pub fn sign(parity: bool) -> Rational {
    if parity {
        -one()
    } else {
        one()
    }
}

pub fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}

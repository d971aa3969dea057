//! Coefficient fields used by [`Polynomial`](super::Polynomial).
//!
//! Exact work (Groebner bases) runs over [`Rational`]; numerical work runs over
//! `f64` or [`Complex64`]. Floating coefficients below [`FLOAT_ZERO`] in
//! magnitude are dropped whenever a polynomial is canonicalized.

use std::fmt::{self, Debug};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always kept in lowest terms.
pub type Rational = BigRational;

/// Absolute threshold below which a floating coefficient counts as zero.
pub const FLOAT_ZERO: f64 = 1e-14;

/// A coefficient field.
pub trait Coeff: Clone + PartialEq + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse. Callers guarantee `!self.is_zero()`.
    fn inv(&self) -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_complex(&self) -> Complex64;

    fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    /// True when the rendered form should be written as `- |c|`.
    fn is_negative(&self) -> bool;

    /// Writes the magnitude of the coefficient (sign handled by the caller).
    fn fmt_abs(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;
}

impl Coeff for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        self.recip()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn fmt_abs(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.abs();
        if a.is_integer() {
            write!(f, "{}", a.numer())
        } else {
            write!(f, "{}/{}", a.numer(), a.denom())
        }
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        self.abs() < FLOAT_ZERO
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        1.0 / self
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn fmt_abs(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.abs())
    }
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.norm() < FLOAT_ZERO
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        Complex64::new(1.0, 0.0) / self
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_rational(r: &Rational) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn is_negative(&self) -> bool {
        self.im == 0.0 && self.re < 0.0
    }
    fn fmt_abs(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0.0 {
            write!(f, "{}", self.re.abs())
        } else if self.re == 0.0 {
            write!(f, "{}i", self.im)
        } else {
            write!(f, "({}{:+}i)", self.re, self.im)
        }
    }
}

/// Nearest `f64` to an arbitrary rational, robust to huge numerators/denominators.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Scale both parts down to avoid overflow to inf/inf.
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let ns = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let ds = (d >> shift).to_f64().unwrap_or(f64::NAN);
    ns / ds
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued fractions). Exact for dyadic values with small denominators.
pub fn rational_approx(x: f64, max_den: u64) -> Rational {
    assert!(x.is_finite(), "cannot rationalize a non-finite value");
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let ai = a as u128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 > max_den as u128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac < 1e-15 * v.max(1.0) {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return <Rational as Zero>::zero();
    }
    let r = Rational::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        -r
    } else {
        r
    }
}

//! Scalar abstraction shared by every evaluator.
//!
//! Map evaluation is generic over [`Scalar`] so the same expression trees run
//! in plain `f64` or in double-double ([`DoubleDouble`]). Words that pass
//! through strongly contracted regions lose roughly `log2(contraction)` bits
//! per round trip; the double-double mode keeps those words verifiable.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

/// Double-double scalar (about 106 bits of mantissa).
///
/// Wraps [`TwoFloat`] for addition and multiplication; division and square
/// root get a correction step because the upstream versions round to `f64`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct DoubleDouble(pub TwoFloat);

impl DoubleDouble {
    pub fn hi(self) -> f64 {
        self.0.hi()
    }

    pub fn lo(self) -> f64 {
        self.0.lo()
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        DoubleDouble(self.0 + o.0)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        DoubleDouble(self.0 - o.0)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        DoubleDouble(self.0 * o.0)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        DoubleDouble(-self.0)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        // long division: two f64 quotient digits plus a remainder correction
        let q1 = self.0.hi() / o.0.hi();
        let r = self.0 - o.0 * q1;
        let q2 = r.hi() / o.0.hi();
        let r = r - o.0 * q2;
        let q3 = r.hi() / o.0.hi();
        DoubleDouble(TwoFloat::new_add(q1, q2) + q3)
    }
}

pub trait Scalar:
    Copy
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Step size below which a fixed-point iteration is considered converged.
    const ITER_TOL: f64;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;

    #[inline]
    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    #[inline]
    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const ITER_TOL: f64 = 1e-14;

    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

impl Scalar for DoubleDouble {
    const ITER_TOL: f64 = 1e-30;

    #[inline]
    fn from_f64(v: f64) -> Self {
        DoubleDouble(TwoFloat::from(v))
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self.0.hi() + self.0.lo()
    }
    #[inline]
    fn sqrt(self) -> Self {
        let h = self.0.hi();
        if h <= 0.0 {
            return Self::zero();
        }
        // one Newton step from the f64 root
        let s = h.sqrt();
        let r = self.0 - TwoFloat::new_mul(s, s);
        DoubleDouble(TwoFloat::new_add(s, r.hi() / (2.0 * s)))
    }
}

/// Arithmetic used when evaluating words and verifying identities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    #[default]
    Double,
    DoubleDouble,
}

#[inline]
pub fn norm<S: Scalar>(x: &[S]) -> S {
    let mut acc = S::zero();
    for &c in x {
        acc = acc + c * c;
    }
    acc.sqrt()
}

#[inline]
pub fn dist<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for (&p, &q) in a.iter().zip(b) {
        let d = p - q;
        acc = acc + d * d;
    }
    acc.sqrt()
}

pub fn lift<S: Scalar>(x: &[f64]) -> Vec<S> {
    x.iter().map(|&c| S::from_f64(c)).collect()
}

pub fn lower<S: Scalar>(x: &[S]) -> Vec<f64> {
    x.iter().map(|c| c.to_f64()).collect()
}

pub fn norm_f64(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub fn dist_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

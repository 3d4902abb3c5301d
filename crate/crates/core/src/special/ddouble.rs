//! Double-double arithmetic: an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
//!
//! Only the operations needed by the series and Taylor integrators are provided.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn mul_f64_f64(a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        Self { hi: p, lo: e }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let y = self.hi.sqrt();
        let r = self - Self::mul_f64_f64(y, y);
        Self::from(y) + r.hi / (2.0 * y)
    }

    pub fn exp(self) -> Self {
        const LN2: DoubleDouble = DoubleDouble::new(std::f64::consts::LN_2, 2.3190468138462996e-17);
        if self.hi > 709.0 {
            return Self::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        // r = (x - k ln2) / 16, then exp(r) by Taylor and four squarings
        let r = (self - LN2 * k) / 16.0;
        let mut term = Self::ONE;
        let mut sum = Self::ONE;
        for j in 1..=30 {
            term = term * r / j as f64;
            sum += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..4 {
            sum = sum * sum;
        }
        // scale by 2^k in two halves so neither factor overflows
        let k1 = (k / 2.0).trunc();
        let k2 = k - k1;
        sum * 2f64.powi(k1 as i32) * 2f64.powi(k2 as i32)
    }

    pub fn powi(self, n: u32) -> Self {
        let mut acc = Self::ONE;
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Add<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, rhs: f64) -> Self {
        let (s, e) = two_sum(self.hi, rhs);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Sub<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: f64) -> Self {
        self + (-rhs)
    }
}

impl AddAssign for DoubleDouble {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for DoubleDouble {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        let (p, e) = two_prod(self.hi, rhs);
        let (hi, lo) = quick_two_sum(p, e + self.lo * rhs);
        Self { hi, lo }
    }
}

impl Div<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, rhs: f64) -> Self {
        let q1 = self.hi / rhs;
        let r = self - Self::mul_f64_f64(q1, rhs);
        let q2 = r.hi / rhs;
        let r = r - Self::mul_f64_f64(q2, rhs);
        let q3 = r.hi / rhs;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + q3
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * q1;
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * q2;
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + q3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_is_accurate_beyond_double() {
        let third = DoubleDouble::ONE / 3.0;
        let back = third * 3.0 - 1.0;
        assert!(back.to_f64().abs() < 1e-31);
        assert!(third.lo != 0.0);
    }

    #[test]
    fn products_keep_low_bits() {
        let a = DoubleDouble::from(1.0 + f64::EPSILON);
        let sq = a * a;
        // (1+e)^2 = 1 + 2e + e^2, e^2 survives in the low word
        let rest = sq - 1.0 - 2.0 * f64::EPSILON;
        assert_eq!(rest.to_f64(), f64::EPSILON * f64::EPSILON);
    }

    #[test]
    fn division_by_dd_inverts_multiplication() {
        let a = DoubleDouble::new(std::f64::consts::PI, 1.2246467991473532e-16);
        let b = DoubleDouble::ONE / 7.0;
        let c = (a * b) / b - a;
        assert!(c.to_f64().abs() < 1e-30);
    }

    #[test]
    fn exp_and_sqrt_to_double_double_accuracy() {
        let two = DoubleDouble::from(2.0);
        let r = two.sqrt();
        assert!((r * r - 2.0).to_f64().abs() < 1e-31);
        let e = DoubleDouble::ONE.exp();
        // e = 2.718281828459045 + 1.4456468917292502e-16
        assert_eq!(e.hi, std::f64::consts::E);
        assert!((e.lo - 1.4456468917292502e-16).abs() < 2e-30, "{:e}", e.lo);
        let x = DoubleDouble::from(-42.5);
        let back = x.exp() * DoubleDouble::from(42.5).exp();
        assert!((back - 1.0).to_f64().abs() < 1e-30);
    }

    #[test]
    fn integer_power() {
        let x = DoubleDouble::from(1.5);
        assert_eq!(x.powi(3).to_f64(), 3.375);
        assert_eq!(x.powi(0).to_f64(), 1.0);
    }
}

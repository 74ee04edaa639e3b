//! Double-double arithmetic: an unevaluated sum `hi + lo` carrying about 106
//! bits of significand. Used for exact-ish products in reconstruction formulas
//! and for integer sequences that leave the 53-bit range.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
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

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact product of two doubles.
    pub fn prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    /// Nearest integer (ties to even) and the remainder `self - k`.
    ///
    /// The integer is returned as `i128` so callers can range-check it.
    pub fn round_ties_even(self) -> (i128, f64) {
        let k_hi = self.hi.round_ties_even();
        // hi - k_hi is exact: either hi is integral or |hi| < 2^53.
        let rem = Dd::from_f64(self.hi - k_hi) + Dd::from_f64(self.lo);
        let k_lo = rem.hi.round_ties_even();
        let rem = rem - Dd::from_f64(k_lo);
        let mut k = k_hi as i128 + k_lo as i128;
        let mut r = rem.to_f64();
        if r > 0.5 || (r == 0.5 && k % 2 != 0) {
            k += 1;
            r -= 1.0;
        } else if r < -0.5 || (r == -0.5 && k % 2 != 0) {
            k -= 1;
            r += 1.0;
        }
        (k, r)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

/// `a*b - c*d` with a single final rounding error.
pub fn diff_of_products(a: f64, b: f64, c: f64, d: f64) -> f64 {
    (Dd::prod(a, b) - Dd::prod(c, d)).to_f64()
}

/// Complex number with double-double parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub fn from_c64(z: Complex64) -> Self {
        CDd { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl Mul for CDd {
    type Output = CDd;
    fn mul(self, o: CDd) -> CDd {
        CDd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

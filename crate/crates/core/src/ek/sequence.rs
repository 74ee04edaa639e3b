use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wide::CDd;

/// Largest magnitude for which double arithmetic still resolves the
/// fractional part.
pub const EXACT_LIMIT: f64 = 9_007_199_254_740_992.0;

/// Largest magnitude accepted in wide mode (integers are stored as `i64`).
pub const WIDE_LIMIT: f64 = 4_611_686_018_427_387_904.0;

/// Integer/error split of `Re(theta^n t)` for `n = 1..=N`.
///
/// Entry `i` of each vector belongs to `n = i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EkSequence {
    pub theta: Complex64,
    pub t: Complex64,
    pub k: Vec<i64>,
    pub eps: Vec<f64>,
    pub y: Vec<f64>,
}

impl EkSequence {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn k_at(&self, n: usize) -> i64 {
        self.k[n - 1]
    }

    pub fn eps_at(&self, n: usize) -> f64 {
        self.eps[n - 1]
    }

    /// `x_n = K_n + eps_n`.
    pub fn x_at(&self, n: usize) -> f64 {
        self.k[n - 1] as f64 + self.eps[n - 1]
    }

    /// `[K_first, ..., K_{first + 4}]`.
    pub fn window5(&self, first: usize) -> [i64; 5] {
        let mut w = [0; 5];
        w.copy_from_slice(&self.k[first - 1..first + 4]);
        w
    }
}

/// Nearest integer with ties to even, and the remainder.
pub fn split_nearest(x: f64) -> (i64, f64) {
    let k = x.round_ties_even();
    (k as i64, x - k)
}

fn check_inputs(theta: Complex64, t: Complex64) -> Result<()> {
    let r = theta.norm();
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::param("theta", "must satisfy |theta| > 1"));
    }
    let ta = t.norm();
    if !(ta >= 1.0 - 1e-12 && ta <= r * (1.0 + 1e-12)) {
        return Err(Error::param("t", "|t| must lie in [1, |theta|]"));
    }
    Ok(())
}

/// `K_n, eps_n, Y_n` for `n = 1..=n_max` in double precision.
///
/// Fails with an overflow error once `|theta|^N |t|` passes `2^53`; use
/// [`ek_sequence_wide`] or a smaller `N` beyond that.
pub fn ek_sequence(theta: Complex64, t: Complex64, n_max: usize) -> Result<EkSequence> {
    check_inputs(theta, t)?;
    let top = theta.norm().powi(n_max as i32) * t.norm();
    if top > EXACT_LIMIT {
        return Err(Error::Overflow(format!(
            "|theta|^N |t| = {top:e} exceeds 2^53; use wide mode or a smaller N"
        )));
    }
    let mut seq = EkSequence {
        theta,
        t,
        k: Vec::with_capacity(n_max),
        eps: Vec::with_capacity(n_max),
        y: Vec::with_capacity(n_max),
    };
    let mut z = t;
    for _ in 0..n_max {
        z *= theta;
        let (k, e) = split_nearest(z.re);
        seq.k.push(k);
        seq.eps.push(e);
        seq.y.push(z.im);
    }
    Ok(seq)
}

/// Same as [`ek_sequence`] with powers accumulated in double-double
/// arithmetic, valid while `|theta|^N |t| < 2^62`.
pub fn ek_sequence_wide(theta: Complex64, t: Complex64, n_max: usize) -> Result<EkSequence> {
    check_inputs(theta, t)?;
    let top = theta.norm().powi(n_max as i32) * t.norm();
    if top > WIDE_LIMIT {
        return Err(Error::Overflow(format!(
            "|theta|^N |t| = {top:e} exceeds 2^62 even in wide mode"
        )));
    }
    let th = CDd::from_c64(theta);
    let mut z = CDd::from_c64(t);
    let mut seq = EkSequence {
        theta,
        t,
        k: Vec::with_capacity(n_max),
        eps: Vec::with_capacity(n_max),
        y: Vec::with_capacity(n_max),
    };
    for _ in 0..n_max {
        z = z * th;
        let (k, e) = z.re.round_ties_even();
        seq.k.push(k as i64);
        seq.eps.push(e);
        seq.y.push(z.im.to_f64());
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn examples() {
        let s = ek_sequence(c(2.0, 0.0), c(1.0, 0.0), 20).unwrap();
        for n in 1..=20 {
            assert_eq!(s.k_at(n), 1 << n);
            assert_eq!(s.eps_at(n), 0.0);
        }
        assert_eq!(split_nearest(0.5), (0, 0.5));
        assert_eq!(split_nearest(-0.5), (0, -0.5));
        assert_eq!(split_nearest(1.5), (2, -0.5));

        let s = ek_sequence(c(1.2, 0.5), c(1.0, 0.0), 3).unwrap();
        assert_eq!(s.k, vec![1, 1, 1]);
        for (e, want) in s.eps.iter().zip([0.2, 0.19, -0.172]) {
            assert!((e - want).abs() < 1e-14);
        }
        assert!((s.y[2] - 2.035).abs() < 1e-14);
    }

    #[test]
    fn guards() {
        assert!(matches!(ek_sequence(c(2.0, 0.0), c(1.0, 0.0), 60), Err(Error::Overflow(_))));
        assert!(ek_sequence(c(0.9, 0.0), c(1.0, 0.0), 5).is_err());
        assert!(ek_sequence(c(1.2, 0.5), c(3.0, 0.0), 5).is_err());
        let w = ek_sequence_wide(c(2.0, 0.0), c(1.0, 0.0), 60).unwrap();
        assert_eq!(w.k_at(60), 1 << 60);
        assert!(matches!(ek_sequence_wide(c(2.0, 0.0), c(1.0, 0.0), 64), Err(Error::Overflow(_))));
    }

    #[test]
    fn wide_agrees_in_double_range() {
        let theta = c(1.25, 0.4);
        let a = ek_sequence(theta, c(1.1, 0.2), 40).unwrap();
        let b = ek_sequence_wide(theta, c(1.1, 0.2), 40).unwrap();
        assert_eq!(a.k, b.k);
        for (x, y) in a.eps.iter().zip(&b.eps) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn split_invariants(re in -1.4f64..1.4, im in 0.3f64..1.4, arg in 0.0f64..6.28, frac in 0.0f64..1.0) {
            let theta = c(re, im);
            prop_assume!(theta.norm() > 1.05 && theta.norm() < 1.45);
            let t = Complex64::from_polar(1.0 + frac * (theta.norm() - 1.0), arg);
            let s = ek_sequence(theta, t, 30).unwrap();
            let mut z = t;
            for n in 1..=30 {
                z *= theta;
                prop_assert!(s.eps_at(n).abs() <= 0.5);
                prop_assert_eq!(s.k_at(n) as f64 + s.eps_at(n), z.re);
            }
        }
    }
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::reconstruct::CoverBall;
use super::sequence::{split_nearest, EXACT_LIMIT};
use crate::error::{Error, Result};

/// Paired integer sequences for `t` and `u t` under `theta = 1/lambda`.
///
/// Index `i` holds `n = i + 1`; `x` and `y` are the exact real and imaginary
/// parts of `theta^n t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationEkSequence {
    pub lambda: Complex64,
    pub u: Complex64,
    pub t: Complex64,
    pub k: Vec<i64>,
    pub l: Vec<i64>,
    pub eps: Vec<f64>,
    pub delt: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TranslationEkSequence {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn k_at(&self, n: usize) -> i64 {
        self.k[n - 1]
    }

    pub fn l_at(&self, n: usize) -> i64 {
        self.l[n - 1]
    }

    pub fn theta(&self) -> Complex64 {
        self.lambda.inv()
    }
}

pub fn ek_sequence_translation(
    lambda: Complex64,
    u: Complex64,
    t: Complex64,
    n_max: usize,
) -> Result<TranslationEkSequence> {
    if lambda.im == 0.0 {
        return Err(Error::param("lambda", "must be non-real (beta = Im lambda is zero)"));
    }
    let r = lambda.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::param("lambda", "must satisfy 0 < |lambda| < 1"));
    }
    let ta = t.norm();
    if !(ta >= 1.0 - 1e-12 && ta <= (1.0 + 1e-12) / r) {
        return Err(Error::param("t", "|t| must lie in [1, 1/|lambda|]"));
    }
    if !u.is_finite() {
        return Err(Error::param("u", "must be finite"));
    }
    let top = r.powi(-(n_max as i32)) * ta * u.norm().max(1.0);
    if top > EXACT_LIMIT {
        return Err(Error::Overflow(format!(
            "|theta|^N |t| max(1,|u|) = {top:e} exceeds 2^53; use a smaller N"
        )));
    }
    let theta = lambda.inv();
    let mut seq = TranslationEkSequence {
        lambda,
        u,
        t,
        k: Vec::with_capacity(n_max),
        l: Vec::with_capacity(n_max),
        eps: Vec::with_capacity(n_max),
        delt: Vec::with_capacity(n_max),
        x: Vec::with_capacity(n_max),
        y: Vec::with_capacity(n_max),
    };
    let mut z = t;
    let mut w = u * t;
    for _ in 0..n_max {
        z *= theta;
        w *= theta;
        let (k, e) = split_nearest(z.re);
        let (l, d) = split_nearest(w.re);
        seq.k.push(k);
        seq.eps.push(e);
        seq.l.push(l);
        seq.delt.push(d);
        seq.x.push(z.re);
        seq.y.push(z.im);
    }
    Ok(seq)
}

/// `y_{n+1} = (alpha x_{n+1} - x_n) / beta` with `lambda = alpha + i beta`.
pub fn y_from_x(x_n: f64, x_n1: f64, lambda: Complex64) -> f64 {
    (lambda.re * x_n1 - x_n) / lambda.im
}

/// `x_{n+2} = |theta|^2 (2 alpha x_{n+1} - x_n)`.
pub fn x_next(x_n: f64, x_n1: f64, lambda: Complex64) -> f64 {
    (2.0 * lambda.re * x_n1 - x_n) / lambda.norm_sqr()
}

/// Ball around the estimate of `u` from `K_n, K_{n+1}, L_n, L_{n+1}`, radius
/// `C2_hat |theta|^{-n}`.
pub fn reconstruct_u(
    k_n: i64,
    k_n1: i64,
    l_n: i64,
    l_n1: i64,
    lambda: Complex64,
    n: usize,
    c2_hat: f64,
) -> Result<CoverBall> {
    if lambda.im == 0.0 {
        return Err(Error::param("lambda", "must be non-real (beta = Im lambda is zero)"));
    }
    let num = Complex64::new(l_n1 as f64, y_from_x(l_n as f64, l_n1 as f64, lambda));
    let den = Complex64::new(k_n1 as f64, y_from_x(k_n as f64, k_n1 as f64, lambda));
    if den.norm() == 0.0 {
        return Err(Error::Degenerate(format!(
            "zero denominator for K_n = {k_n}, K_n+1 = {k_n1}"
        )));
    }
    Ok(CoverBall {
        center: num / den,
        radius: c2_hat * lambda.norm().powi(n as i32),
        source_k: vec![k_n, k_n1, l_n, l_n1],
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::linear_fit;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_u_repeats_k() {
        let s = ek_sequence_translation(c(0.6, 0.3), c(1.0, 0.0), c(1.0, 0.0), 20).unwrap();
        assert_eq!(s.k, s.l);
        assert_eq!(s.eps, s.delt);
    }

    #[test]
    fn real_lambda_rejected() {
        let e = ek_sequence_translation(c(0.6, 0.0), c(1.0, 0.0), c(1.0, 0.0), 5).unwrap_err();
        assert!(matches!(e, Error::InvalidParameter { .. }));
        assert!(reconstruct_u(1, 2, 1, 2, c(0.5, 0.0), 2, 1.0).is_err());
        assert!(matches!(reconstruct_u(0, 0, 1, 2, c(0.6, 0.3), 2, 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn forward_ball_contains_u() {
        let (lambda, u) = (c(0.6, 0.3), c(0.8, 0.2));
        let s = ek_sequence_translation(lambda, u, c(1.0, 0.0), 16).unwrap();
        let n = 15;
        let ball = reconstruct_u(s.k_at(n), s.k_at(n + 1), s.l_at(n), s.l_at(n + 1), lambda, n, 10.0)
            .unwrap();
        assert!((ball.center - u).norm() <= ball.radius);
    }

    #[test]
    fn exact_data_gives_u() {
        // lambda = (1 - i)/2 gives theta = 1 + i; Gaussian-integer u keeps every error zero.
        let (lambda, u) = (c(0.5, -0.5), c(2.0, 1.0));
        let s = ek_sequence_translation(lambda, u, c(1.0, 0.0), 12).unwrap();
        assert!(s.eps.iter().chain(&s.delt).all(|&e| e == 0.0));
        let ball = reconstruct_u(s.k_at(5), s.k_at(6), s.l_at(5), s.l_at(6), lambda, 5, 1.0).unwrap();
        assert_eq!(ball.center, u);
    }

    #[test]
    fn error_slope_tracks_theta() {
        let (lambda, u) = (c(0.6, 0.3), c(0.8, 0.2));
        let s = ek_sequence_translation(lambda, u, c(1.0, 0.0), 41).unwrap();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for n in 10..=40 {
            let b = reconstruct_u(s.k_at(n), s.k_at(n + 1), s.l_at(n), s.l_at(n + 1), lambda, n, 1.0)
                .unwrap();
            let err = (b.center - u).norm();
            if err > 0.0 {
                xs.push(n as f64);
                ys.push(err.ln());
            }
        }
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!(fit.slope <= lambda.norm().ln() + 0.05, "slope {}", fit.slope);
    }

    proptest! {
        #[test]
        fn identities_and_bounds(
            lr in 0.3f64..0.95, la in 0.1f64..3.0, ur in -2.0f64..2.0, ui in -2.0f64..2.0,
            tr in 0.0f64..1.0, ta in 0.0f64..6.28,
        ) {
            let lambda = Complex64::from_polar(lr, la);
            prop_assume!(lambda.im.abs() > 1e-3);
            let t = Complex64::from_polar(1.0 + tr * (1.0 / lr - 1.0), ta);
            let n = ((1e12f64).ln() / -lr.ln()).floor().min(30.0) as usize;
            let s = ek_sequence_translation(lambda, c(ur, ui), t, n).unwrap();
            prop_assert!(s.eps.iter().chain(&s.delt).all(|e| e.abs() <= 0.5));
            for i in 0..n.saturating_sub(2) {
                let scale = s.x[i + 2].abs().max(s.x[i].abs()).max(1.0);
                prop_assert!((x_next(s.x[i], s.x[i + 1], lambda) - s.x[i + 2]).abs() <= 1e-10 * scale);
                prop_assert!((y_from_x(s.x[i], s.x[i + 1], lambda) - s.y[i + 1]).abs() <= 1e-10 * scale / lambda.im.abs().min(1.0));
            }
        }
    }
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wide::diff_of_products;

/// Recovers `theta = alpha + i beta` (upper half-plane) and `y_3` from four
/// consecutive real parts `x_j = Re(theta^j z_0)`.
///
/// `|theta|^2 = (x_2^2 - x_1 x_3)/(x_1^2 - x_0 x_2)`,
/// `alpha = (x_1 x_2 - x_0 x_3)/(2(x_1^2 - x_0 x_2))`,
/// `y_0 = (alpha x_0 - x_1)/beta` and `y_3 = Im(theta^3) x_0 + Re(theta^3) y_0`.
pub fn reconstruct_theta(x: [f64; 4]) -> Result<(Complex64, f64)> {
    let [x0, x1, x2, x3] = x;
    let den = diff_of_products(x1, x1, x0, x2);
    let scale = x1 * x1 + (x0 * x2).abs();
    if den == 0.0 || den.abs() <= 8.0 * f64::EPSILON * scale {
        return Err(Error::Degenerate(format!(
            "x1^2 - x0 x2 vanishes for window {x:?} (z0 = 0 or real theta)"
        )));
    }
    let modulus2 = diff_of_products(x2, x2, x1, x3) / den;
    let alpha = diff_of_products(x1, x2, x0, x3) / (2.0 * den);
    let beta2 = modulus2 - alpha * alpha;
    if !(beta2 > 0.0) {
        return Err(Error::Degenerate(format!(
            "non-real beta (|theta|^2 - alpha^2 = {beta2:e}) for window {x:?}"
        )));
    }
    let beta = beta2.sqrt();
    let y0 = (alpha * x0 - x1) / beta;
    let y3 = (3.0 * alpha * alpha * beta - beta * beta * beta) * x0
        + (alpha * alpha * alpha - 3.0 * alpha * beta * beta) * y0;
    Ok((Complex64::new(alpha, beta), y3))
}

/// The imaginary-part estimate computed from four integers.
pub fn g_value(k4: &[i64]) -> Result<f64> {
    let x = [k4[0] as f64, k4[1] as f64, k4[2] as f64, k4[3] as f64];
    Ok(reconstruct_theta(x)?.1)
}

/// `(K_{N+1} + i G(K_{N-2..N+1})) / (K_N + i G(K_{N-3..N}))` for the window
/// `K_{N-3..N+1}`.
pub fn psi(k5: &[i64; 5]) -> Result<Complex64> {
    let lo = Complex64::new(k5[3] as f64, g_value(&k5[0..4])?);
    let hi = Complex64::new(k5[4] as f64, g_value(&k5[1..5])?);
    if lo.norm() == 0.0 {
        return Err(Error::Degenerate("zero denominator in Psi".into()));
    }
    Ok(hi / lo)
}

/// Ball `B(center, radius)` in parameter space produced from an integer
/// window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverBall {
    pub center: Complex64,
    pub radius: f64,
    pub source_k: Vec<i64>,
    #[serde(rename = "N")]
    pub n: usize,
}

/// Ball of radius `C4_hat b1^{-N}` around `Psi(K_{N-3..N+1})`.
pub fn theta_ball(k5: &[i64; 5], b1: f64, n: usize, c4_hat: f64) -> Result<CoverBall> {
    Ok(CoverBall {
        center: psi(k5)?,
        radius: c4_hat * b1.powi(-(n as i32)),
        source_k: k5.to_vec(),
        n,
    })
}

/// `Re((K_{n+1} + i Y~_{n+1})^2 / (K_n + i Y~_n))` for the window
/// `K_{n-3..n+1}`: the real-valued guess for `K_{n+2}` before rounding.
pub fn predict_k(k5: &[i64; 5]) -> Result<f64> {
    let w0 = Complex64::new(k5[3] as f64, g_value(&k5[0..4])?);
    let w1 = Complex64::new(k5[4] as f64, g_value(&k5[1..5])?);
    if w0.norm() == 0.0 {
        return Err(Error::Degenerate("zero denominator in predictor".into()));
    }
    Ok((w1 * w1 / w0).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ek::ek_sequence;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn worked_example() {
        let (theta, y3) = reconstruct_theta([10.0, 12.0, 11.9, 8.28]).unwrap();
        assert!((theta - c(1.2, 0.5)).norm() < 1e-14);
        assert!((y3 - 20.35).abs() < 1e-12);
        assert!(matches!(reconstruct_theta([1.0, 1.0, 1.0, 1.0]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn exact_windows_reproduce_theta() {
        // theta = 2i, t = 1: real parts 0, -4, 0, 16 ... are integers, eps = 0.
        let theta = c(0.0, 2.0);
        let s = ek_sequence(theta, c(1.0, 0.0), 9).unwrap();
        assert!(s.eps.iter().all(|&e| e == 0.0));
        let w = s.window5(4);
        assert!((psi(&w).unwrap() - theta).norm() < 1e-12);
        let theta = c(1.0, 1.0);
        let s = ek_sequence(theta, c(1.0, 0.0), 12).unwrap();
        assert!(s.eps.iter().all(|&e| e == 0.0));
        let w = s.window5(5);
        assert!((psi(&w).unwrap() - theta).norm() < 1e-14);
        assert_eq!(predict_k(&w).unwrap(), s.k_at(10) as f64);
    }

    #[test]
    fn ball_contains_theta() {
        let theta = c(1.25, 0.4);
        let s = ek_sequence(theta, c(1.0, 0.0), 21).unwrap();
        let ball = theta_ball(&s.window5(17), 1.2, 20, 10.0).unwrap();
        assert!((ball.center - theta).norm() <= ball.radius);
        assert_eq!(ball.source_k.len(), 5);
    }

    proptest! {
        #[test]
        fn round_trip(re in -1.4f64..1.4, im in 0.05f64..1.4, zr in 0.0f64..6.28, lz in 3.0f64..6.0) {
            let theta = c(re, im);
            prop_assume!(theta.norm() >= 1.05 && theta.norm() <= 1.4);
            let z0 = Complex64::from_polar(10f64.powf(lz), zr);
            let zs: Vec<Complex64> = (0..4).map(|j| theta.powu(j) * z0).collect();
            let (got, y3) = reconstruct_theta([zs[0].re, zs[1].re, zs[2].re, zs[3].re]).unwrap();
            prop_assert!((got - theta).norm() <= 1e-9 * theta.norm());
            prop_assert!((y3 - zs[3].im).abs() <= 1e-9 * zs[3].norm());
        }
    }
}

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reconstruct::{predict_k, psi};
use super::sequence::ek_sequence;
use crate::error::{Error, Result};
use crate::ifs::RegionH;
use crate::rng;

/// Uniform sample from the region (rejection from its bounding box).
pub fn random_theta<R: Rng>(region: &RegionH, rng: &mut R) -> Complex64 {
    let (re_min, re_max, im_min, im_max) = region.bounding_box();
    loop {
        let z = Complex64::new(rng.gen_range(re_min..re_max), rng.gen_range(im_min..im_max));
        if region.contains(z) {
            return z;
        }
    }
}

/// `t` with `|t|` uniform in `[1, |theta|]` and uniform argument.
pub fn random_t<R: Rng>(theta: Complex64, rng: &mut R) -> Complex64 {
    Complex64::from_polar(rng.gen_range(1.0..=theta.norm()), rng.gen_range(0.0..TAU))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationParams {
    pub samples: usize,
    /// Smallest index `N` (resp. `n`) used for the ball (resp. predictor)
    /// ratios.
    pub n_min: usize,
    pub n_max: usize,
    pub seed: u64,
}

impl Default for CalibrationParams {
    fn default() -> Self {
        CalibrationParams { samples: 10_000, n_min: 8, n_max: 40, seed: 0 }
    }
}

/// Empirical stand-ins for the existential constants of the argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub region: RegionH,
    pub params: CalibrationParams,
    /// Largest observed `|Psi_N - theta| b1^N`.
    pub max_ball_ratio: f64,
    /// Largest observed `|predict - K_{n+2}| / max |eps|` over the six errors
    /// of the window.
    pub max_predictor_ratio: f64,
    pub c4_hat: f64,
    pub c5_hat: f64,
    /// `1 / (2 C5_hat)`.
    pub rho: f64,
    /// `ceil(2 C5_hat) + 1`.
    pub m: u64,
    /// Windows where the reconstruction was undefined.
    pub failures: u64,
}

/// Runs forward sequences for random `(theta, t)` and records the worst
/// ratios; constants are twice the observed maxima.
pub fn calibrate(region: &RegionH, params: &CalibrationParams) -> Result<Calibration> {
    if params.samples == 0 || params.n_min < 4 || params.n_max < params.n_min {
        return Err(Error::param("calibration", "need samples > 0 and 4 <= n_min <= n_max"));
    }
    let b1 = region.b1();
    let per_sample: Vec<(f64, f64, u64)> = (0..params.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(params.seed, i as u64);
            let theta = random_theta(region, &mut rng);
            let t = random_t(theta, &mut rng);
            let mut ball: f64 = 0.0;
            let mut pred: f64 = 0.0;
            let mut failures = 0u64;
            let Ok(seq) = ek_sequence(theta, t, params.n_max + 2) else {
                return (0.0, 0.0, 1);
            };
            for n in params.n_min..=params.n_max {
                let w = seq.window5(n - 3);
                match psi(&w) {
                    Ok(center) => ball = ball.max((center - theta).norm() * b1.powi(n as i32)),
                    Err(_) => failures += 1,
                }
                match predict_k(&w) {
                    Ok(p) => {
                        let max_eps = (n - 3..=n + 2)
                            .map(|j| seq.eps_at(j).abs())
                            .fold(0.0, f64::max);
                        let miss = (p - seq.k_at(n + 2) as f64).abs();
                        if max_eps > 0.0 {
                            pred = pred.max(miss / max_eps);
                        }
                    }
                    Err(_) => failures += 1,
                }
            }
            (ball, pred, failures)
        })
        .collect();
    let max_ball_ratio = per_sample.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_predictor_ratio = per_sample.iter().map(|r| r.1).fold(0.0, f64::max);
    let failures = per_sample.iter().map(|r| r.2).sum();
    let c4_hat = 2.0 * max_ball_ratio;
    let c5_hat = (2.0 * max_predictor_ratio).max(1.0);
    Ok(Calibration {
        region: *region,
        params: *params,
        max_ball_ratio,
        max_predictor_ratio,
        c4_hat,
        c5_hat,
        rho: 1.0 / (2.0 * c5_hat),
        m: (2.0 * c5_hat).ceil() as u64 + 1,
        failures,
    })
}

//! Fourier transform of self-similar measures via the infinite product,
//! power-decay fits and the absolute-continuity diagnostic.
//!
//! The transform is `nu^(xi) = prod_{n>=0} sum_j p_j exp(2 pi i Re(lambda^n a_j conj(xi)))`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ifs::{IfsDocument, IfsSpec};
use crate::measure::decimate_ifs;
use crate::separation::{
    concentration_diagnostic, Classification, ConcentrationParams, ConcentrationReport, DeltaMethod,
};
use crate::stats::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierSample {
    pub xi: Complex64,
    pub value: Complex64,
    /// Index of the last factor kept.
    pub truncation_n: usize,
    /// Bound on `|true / truncated - 1|`.
    pub tail_error: f64,
}

/// Smallest `N` with `exp(B_N) - 1 <= tol`, where
/// `B_N = 2 pi max|a| |xi| |lambda|^{N+1} / (1 - |lambda|)` bounds the sum of
/// `|factor_n - 1|` over the omitted factors. Returns `(N, exp(B_N) - 1)`.
pub fn truncation_rule(spec: &IfsSpec, xi_abs: f64, tol: f64) -> (usize, f64) {
    let r = spec.lambda().norm();
    let scale = TAU * spec.max_translation() * xi_abs / (1.0 - r);
    let mut n = 0usize;
    let mut rn1 = r;
    loop {
        let err = (scale * rn1).exp_m1();
        if err <= tol || n > 100_000 {
            return (n, err);
        }
        n += 1;
        rn1 *= r;
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol <= 0.1) {
        return Err(Error::param("tol", "must lie in (0, 0.1]"));
    }
    Ok(())
}

/// Evaluates the truncated product at `xi`.
///
/// Factors are computed from `sin_cos` of the phase, and the truncation
/// depends on `|xi|` only, so `ft_eval(-xi)` is exactly the conjugate of
/// `ft_eval(xi)`.
pub fn ft_eval(spec: &IfsSpec, xi: Complex64, tol: f64) -> Result<FourierSample> {
    check_tol(tol)?;
    Ok(ft_eval_unchecked(spec, xi, tol))
}

fn ft_eval_unchecked(spec: &IfsSpec, xi: Complex64, tol: f64) -> FourierSample {
    if xi == Complex64::new(0.0, 0.0) {
        return FourierSample { xi, value: Complex64::new(1.0, 0.0), truncation_n: 0, tail_error: 0.0 };
    }
    let (n_trunc, tail_error) = truncation_rule(spec, xi.norm(), tol);
    let a = spec.translations();
    let p = spec.weights().entries();
    let mut w = xi.conj();
    let lambda = spec.lambda();
    let mut value = Complex64::new(1.0, 0.0);
    for _ in 0..=n_trunc {
        let mut factor = Complex64::new(0.0, 0.0);
        for (aj, &pj) in a.iter().zip(p) {
            let (s, c) = (TAU * (aj * w).re).sin_cos();
            factor += Complex64::new(pj * c, pj * s);
        }
        value *= factor;
        w *= lambda;
    }
    FourierSample { xi, value, truncation_n: n_trunc, tail_error }
}

/// Evaluates many frequencies in parallel, preserving order.
pub fn ft_eval_many(spec: &IfsSpec, xis: &[Complex64], tol: f64) -> Result<Vec<FourierSample>> {
    check_tol(tol)?;
    Ok(xis.par_iter().map(|&xi| ft_eval_unchecked(spec, xi, tol)).collect())
}

/// Frequencies probed by [`ft_sup_on_annulus`] on `|xi| in [r, 2r]`.
///
/// For measures supported on a line only the direction along that line
/// matters, and the frequencies are log-spaced on it. Otherwise a golden-angle
/// sequence covers angle and log-radius quasi-uniformly (only a half-plane is
/// needed, by conjugate symmetry). In both cases orbit probes
/// `conj(c theta^N / d)` are appended, with `theta = 1/lambda`, `d = a_2 - a_1`
/// and small even `c`: these are the frequencies where an algebraic `theta`
/// keeps many factors close to modulus 1.
pub fn annulus_frequencies(spec: &IfsSpec, r: f64, samples: usize) -> Vec<Complex64> {
    let mut xis = Vec::with_capacity(samples + 16);
    let denom = (samples.max(2) - 1) as f64;
    match spec.support_line() {
        Some(dir) => {
            for k in 0..samples {
                xis.push(dir * (r * 2f64.powf(k as f64 / denom)));
            }
        }
        None => {
            let golden = (5f64.sqrt() - 1.0) / 2.0;
            for k in 0..samples {
                let angle = PI * ((k as f64 + 0.5) * golden).fract();
                let rad = r * 2f64.powf(k as f64 / denom);
                xis.push(Complex64::from_polar(rad, angle));
            }
        }
    }
    let a = spec.translations();
    let d = a[1] - a[0];
    let theta = spec.lambda().inv();
    let t_abs = theta.norm();
    if d.norm() > 0.0 {
        let c_max = ((t_abs / 2.0).ceil() as u32).max(1);
        let cs = std::iter::once(1.0).chain((1..=c_max).map(|c| 2.0 * c as f64));
        for c in cs {
            let base = c / d.norm();
            let lo = ((r / base).ln() / t_abs.ln()).ceil().max(0.0) as i32;
            let hi = ((2.0 * r / base).ln() / t_abs.ln()).floor() as i32;
            for n in lo..=hi {
                let xi = (theta.powi(n) * c / d).conj();
                let m = xi.norm();
                if m >= r && m <= 2.0 * r {
                    xis.push(xi);
                }
            }
        }
    }
    xis
}

const REFINE_STARTS: usize = 32;
const REFINE_HALVINGS: u32 = 24;

/// Largest `|nu^(xi)|` found on `R <= |xi| <= 2R`, a lower bound on the true
/// supremum.
///
/// The frequencies of [`annulus_frequencies`] are scored and the best few are
/// improved by a compass search that stays in the annulus (and on the support
/// line when there is one). Off a line, the search also starts from the best
/// points of the annulus one scale down mapped by `xi -> conj(theta) xi`,
/// which carries `nu^(xi)` to `f(conj(theta) xi) nu^(xi)` where `f` is the
/// leading factor; this keeps peaks that random sampling misses at large `R`.
pub fn ft_sup_on_annulus(spec: &IfsSpec, r: f64, samples: usize, tol: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("R", "must be positive"));
    }
    if samples < 8 {
        return Err(Error::param("samples", "must be at least 8"));
    }
    check_tol(tol)?;
    let line = spec.support_line();
    let theta_bar = spec.lambda().inv().conj();
    let mut radii = vec![r];
    if line.is_none() {
        while radii.last().unwrap() / theta_bar.norm() >= 1.0 {
            radii.push(radii.last().unwrap() / theta_bar.norm());
        }
    }
    let mut carried: Vec<Complex64> = Vec::new();
    let mut best = 0.0;
    for &rk in radii.iter().rev() {
        let mut starts = annulus_frequencies(spec, rk, samples);
        starts.extend(carried.iter().map(|&xi| theta_bar * xi));
        let top = refine_top(spec, rk, &starts, line, tol);
        best = top.first().map_or(0.0, |t| t.0);
        carried = top.into_iter().map(|t| t.1).collect();
    }
    Ok(best)
}

/// Scores `starts`, then compass-searches the best [`REFINE_STARTS`] within
/// the annulus. Returns them sorted by decreasing `|nu^|`.
fn refine_top(
    spec: &IfsSpec,
    r: f64,
    starts: &[Complex64],
    line: Option<Complex64>,
    tol: f64,
) -> Vec<(f64, Complex64)> {
    let abs_at = |xi: Complex64| ft_eval_unchecked(spec, xi, tol).value.norm();
    let mut scored: Vec<(f64, Complex64)> = starts
        .par_iter()
        .filter(|xi| {
            let m = xi.norm();
            m >= r && m <= 2.0 * r
        })
        .map(|&xi| (abs_at(xi), xi))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.re.total_cmp(&b.1.re)));
    scored.truncate(REFINE_STARTS);

    let dirs: Vec<Complex64> = match line {
        Some(d) => vec![d, -d],
        None => vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ],
    };
    let h0 = 0.125 / spec.max_translation().max(f64::MIN_POSITIVE);
    let mut refined: Vec<(f64, Complex64)> = scored
        .par_iter()
        .map(|&(mut best, mut xi)| {
            let mut h = h0;
            for _ in 0..REFINE_HALVINGS {
                let mut moved = true;
                while moved {
                    moved = false;
                    for &d in &dirs {
                        let cand = xi + d * h;
                        let m = cand.norm();
                        if m < r || m > 2.0 * r {
                            continue;
                        }
                        let v = abs_at(cand);
                        if v > best {
                            best = v;
                            xi = cand;
                            moved = true;
                        }
                    }
                }
                h *= 0.5;
            }
            (best, xi)
        })
        .collect();
    refined.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.re.total_cmp(&b.1.re)));
    refined
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    pub r_min: f64,
    pub r_max: f64,
    pub n_annuli: usize,
    pub samples: usize,
    pub tol: f64,
}

impl Default for DecayParams {
    fn default() -> Self {
        DecayParams { r_min: 1.0, r_max: 256.0, n_annuli: 12, samples: 1024, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub gamma_hat: f64,
    pub c_hat: f64,
    pub r_range: Vec<f64>,
    pub sup_values: Vec<f64>,
    pub fit_residual: f64,
    /// Set when some supremum was zero and clamped to the smallest positive
    /// double before taking logs.
    pub clamped: bool,
}

impl DecayEstimate {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,sup,log_R,log_sup\n");
        for (r, s) in self.r_range.iter().zip(&self.sup_values) {
            let s_fit = s.max(f64::MIN_POSITIVE);
            out.push_str(&format!("{r:e},{s:e},{:e},{:e}\n", r.ln(), s_fit.ln()));
        }
        out
    }
}

/// Fits `log sup_{|xi| in [R, 2R]} |nu^| ~ log C - gamma log R` over
/// geometrically spaced `R` from `r_min` to `r_max`.
pub fn decay_exponent(spec: &IfsSpec, params: &DecayParams) -> Result<DecayEstimate> {
    if !(params.r_min >= 1.0) {
        return Err(Error::param("r_min", "must be at least 1"));
    }
    if !(params.r_max > params.r_min) {
        return Err(Error::param("r_max", "must exceed r_min"));
    }
    if params.n_annuli < 4 {
        return Err(Error::param("n_annuli", "must be at least 4"));
    }
    let ratio = (params.r_max / params.r_min).powf(1.0 / (params.n_annuli - 1) as f64);
    let r_range: Vec<f64> = (0..params.n_annuli)
        .map(|k| params.r_min * ratio.powi(k as i32))
        .collect();
    let sup_values = r_range
        .iter()
        .map(|&r| ft_sup_on_annulus(spec, r, params.samples, params.tol))
        .collect::<Result<Vec<f64>>>()?;
    let clamped = sup_values.iter().any(|&s| s <= 0.0);
    let xs: Vec<f64> = r_range.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = sup_values.iter().map(|s| s.max(f64::MIN_POSITIVE).ln()).collect();
    let fit = linear_fit(&xs, &ys).expect("distinct radii");
    Ok(DecayEstimate {
        gamma_hat: -fit.slope,
        c_hat: fit.intercept.exp(),
        r_range,
        sup_values,
        fit_residual: fit.rms,
        clamped,
    })
}

/// `prod_{n=1}^N (1 - c1 ||Re(theta^n t)||^2)`, `||.||` the distance to the
/// nearest integer.
pub fn ek_upper_bound(theta: Complex64, t: Complex64, n: usize, c1: f64) -> Result<f64> {
    if !(theta.norm() > 1.0) {
        return Err(Error::param("theta", "must satisfy |theta| > 1"));
    }
    if !(0.0..=1.0).contains(&c1) {
        return Err(Error::param("c1", "must lie in [0, 1]"));
    }
    let mut z = t;
    let mut prod = 1.0;
    for _ in 0..n {
        z *= theta;
        let x = z.re;
        let dist = (x - x.round()).abs();
        prod *= 1.0 - c1 * dist * dist;
    }
    Ok(prod)
}

/// Default constant for [`ek_upper_bound`] built from the first two atoms:
/// `0.5 p_1 p_2`. For a two-atom factor `|p_1 e(x_1) + p_2 e(x_2)| <= 1 - 8 p_1 p_2 ||x_1 - x_2||^2`,
/// and extra atoms only help, so any `c1 <= 8 p_1 p_2` is admissible.
pub fn default_c1(spec: &IfsSpec) -> f64 {
    let p = spec.weights().entries();
    0.5 * p[0] * p[1]
}

/// Largest `k` with `ell * gamma > k + 2`, or `-1` when `ell * gamma <= 2`.
pub fn smoothness_order(gamma: f64, ell: u32) -> Result<i64> {
    if !(gamma >= 0.0) {
        return Err(Error::param("gamma", "must be nonnegative"));
    }
    if ell == 0 {
        return Err(Error::param("ell", "must be at least 1"));
    }
    let x = ell as f64 * gamma;
    if x <= 2.0 {
        return Ok(-1);
    }
    Ok((x - 2.0).ceil() as i64 - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "consistent-with-AC")]
    ConsistentWithAc,
    #[serde(rename = "inconclusive")]
    Inconclusive,
    #[serde(rename = "singular-indicator")]
    SingularIndicator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcParams {
    pub decay: DecayParams,
    /// Largest `n` for the concentration diagnostic of the `mu` part.
    pub n_max: usize,
    pub overlap_tol: f64,
    pub slope_threshold: f64,
    /// Largest RMS residual of the decay fit accepted as a clean power law.
    pub residual_threshold: f64,
    /// Fitted exponents at or below this count as no decay.
    pub singular_gamma: f64,
}

impl Default for AcParams {
    fn default() -> Self {
        AcParams {
            decay: DecayParams { r_min: 16.0, r_max: 4096.0, n_annuli: 12, samples: 512, tol: 1e-9 },
            n_max: 3,
            overlap_tol: 1e-10,
            slope_threshold: -0.15,
            residual_threshold: 0.5,
            singular_gamma: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcReport {
    pub spec: IfsDocument,
    pub params: AcParams,
    pub s_value: f64,
    pub decimation_k: usize,
    /// Similarity dimension of the `mu` part, `(1 - 1/k) s`.
    pub mu_s_value: f64,
    /// Largest `|nu^ - mu^ eta^|` over the check frequencies.
    pub identity_error: f64,
    pub identity_tolerance: f64,
    pub mu_dimension_diagnostic: ConcentrationReport,
    pub eta_decay: DecayEstimate,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

/// Decimates with step `k`, checks the splitting numerically, then combines a
/// separation diagnostic of `mu` with a decay fit of `eta`.
///
/// The verdict is a labelled heuristic: `consistent-with-AC` requires
/// `s > 2`, no concentration flag on `mu`, and a clean positive decay
/// exponent for `eta`; a decay exponent at or below `singular_gamma` with
/// `s > 2` is reported as `singular-indicator`.
pub fn ac_report(spec: &IfsSpec, k: usize, params: &AcParams, budget: Budget) -> Result<AcReport> {
    if k < 3 {
        return Err(Error::param("k", "must be at least 3"));
    }
    let s_value = spec.similarity_dimension();
    let (mu, eta) = decimate_ifs(spec, k, budget)?;
    let mu_s_value = (1.0 - 1.0 / k as f64) * s_value;

    let tol = params.decay.tol;
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let check_xi: Vec<Complex64> = (0..8)
        .map(|j| Complex64::from_polar(0.5 * 1.6f64.powi(j), TAU * golden * j as f64))
        .collect();
    let mut identity_error: f64 = 0.0;
    let mut identity_tolerance: f64 = 0.0;
    for &xi in &check_xi {
        let nu = ft_eval(spec, xi, tol)?;
        let m = ft_eval(&mu, xi, tol)?;
        let e = ft_eval(&eta, xi, tol)?;
        identity_error = identity_error.max((nu.value - m.value * e.value).norm());
        identity_tolerance =
            identity_tolerance.max(2.0 * (nu.tail_error + m.tail_error + e.tail_error) + 1e-12);
    }

    let conc = concentration_diagnostic(
        &mu,
        &ConcentrationParams {
            n_max: params.n_max,
            overlap_tol: params.overlap_tol,
            slope_threshold: params.slope_threshold,
            method: DeltaMethod::Auto,
        },
        budget,
    )?;
    let eta_decay = decay_exponent(&eta, &params.decay)?;

    let mut notes = Vec::new();
    if identity_error > identity_tolerance {
        notes.push(format!(
            "decimation identity error {identity_error:e} exceeds tolerance {identity_tolerance:e}"
        ));
    }
    let verdict = if s_value <= 2.0 {
        notes.push("similarity dimension at most 2: subcritical".into());
        Verdict::Inconclusive
    } else if eta_decay.gamma_hat <= params.singular_gamma {
        notes.push("no Fourier decay detected for the eta part".into());
        Verdict::SingularIndicator
    } else if conc.classification != Classification::NoConcentrationEvidence {
        notes.push(format!("mu part flagged: {:?}", conc.classification));
        Verdict::Inconclusive
    } else if eta_decay.fit_residual < params.residual_threshold {
        Verdict::ConsistentWithAc
    } else {
        notes.push("decay fit residual above threshold".into());
        Verdict::Inconclusive
    };
    notes.push("heuristic decision rule; not a proof of absolute continuity".into());

    Ok(AcReport {
        spec: spec.to_document(),
        params: *params,
        s_value,
        decimation_k: k,
        mu_s_value,
        identity_error,
        identity_tolerance,
        mu_dimension_diagnostic: conc,
        eta_decay,
        verdict,
        notes,
    })
}

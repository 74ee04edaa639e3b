//! Integer polynomials, polynomial roots and complex Pisot classification.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ifs::Annulus;

/// Highest degree accepted by the root finder.
pub const MAX_DEGREE: usize = 64;

/// Modulus tolerance used when deciding whether a root is inside, on or
/// outside the unit circle.
const UNIT_CIRCLE_TOL: f64 = 1e-9;

/// Cap on the factor search performed by the irreducibility screen.
const FACTOR_SEARCH_CAP: u64 = 5_000_000;

/// Polynomial with integer coefficients, stored in ascending order
/// `c_0 + c_1 z + ... + c_d z^d` with `c_d != 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct IntPolynomial {
    coeffs: Vec<i64>,
}

impl TryFrom<Vec<i64>> for IntPolynomial {
    type Error = Error;
    fn try_from(coeffs: Vec<i64>) -> Result<Self> {
        IntPolynomial::new(coeffs)
    }
}

impl From<IntPolynomial> for Vec<i64> {
    fn from(p: IntPolynomial) -> Self {
        p.coeffs
    }
}

impl IntPolynomial {
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::validation("polynomial", "degree must be at least 1"));
        }
        if *coeffs.last().unwrap() == 0 {
            return Err(Error::validation("polynomial", "leading coefficient is zero"));
        }
        Ok(IntPolynomial { coeffs })
    }

    /// Builds from coefficients listed highest degree first.
    pub fn from_descending(mut coeffs: Vec<i64>) -> Result<Self> {
        coeffs.reverse();
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_monic(&self) -> bool {
        *self.coeffs.last().unwrap() == 1
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|&c| Complex64::new(c as f64, 0.0)).collect()
    }

    /// Exact evaluation at an integer, `None` on overflow.
    fn eval_int(&self, x: i128) -> Option<i128> {
        let mut acc: i128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc.checked_mul(x)?.checked_add(c as i128)?;
        }
        Some(acc)
    }

    fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|&c| (c as f64).powi(2)).sum::<f64>().sqrt()
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.unsigned_abs();
            match (k, a) {
                (0, _) => write!(f, "{a}")?,
                (1, 1) => write!(f, "z")?,
                (1, _) => write!(f, "{a}z")?,
                (_, 1) => write!(f, "z^{k}")?,
                _ => write!(f, "{a}z^{k}")?,
            }
            first = false;
        }
        Ok(())
    }
}

/// Horner evaluation of `p` and `p'` at `z`, coefficients ascending.
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// `sum |c_i| |z|^i`, the natural scale for residuals of `p(z)`.
pub fn residual_scale(coeffs: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

/// All complex roots, with multiplicity, of a polynomial with complex
/// coefficients given in ascending order.
///
/// Zero roots are split off exactly; the rest are found by Aberth–Ehrlich
/// simultaneous iteration followed by a guarded Newton polish.
pub fn roots_complex(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut hi = coeffs.len();
    while hi > 0 && coeffs[hi - 1] == Complex64::new(0.0, 0.0) {
        hi -= 1;
    }
    if hi < 2 {
        return Err(Error::validation("polynomial", "degree must be at least 1"));
    }
    let zeros = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let core: Vec<Complex64> = coeffs[zeros..hi].to_vec();
    let degree = core.len() - 1;
    if degree + zeros > MAX_DEGREE {
        return Err(Error::param("polynomial", format!("degree above {MAX_DEGREE}")));
    }
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    roots.extend(aberth(&core));
    Ok(roots)
}

fn aberth(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    if d == 1 {
        return vec![-coeffs[0] / lead];
    }
    let deriv: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect();

    // Fujiwara-type radius: every root satisfies |z| <= 2 * radius.
    let radius = (0..d)
        .map(|k| (coeffs[k] / lead).norm().powf(1.0 / (d - k) as f64))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / d as f64 + 0.4)
        })
        .collect();

    for _ in 0..1000 {
        let mut max_step: f64 = 0.0;
        for k in 0..d {
            let p = eval(coeffs, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let dp = eval(&deriv, z[k]);
            let ratio = p / dp;
            let repulsion: Complex64 = (0..d)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }

    for root in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval_with_derivative(coeffs, *root);
            if dp.norm() == 0.0 {
                break;
            }
            let cand = *root - p / dp;
            if eval(coeffs, cand).norm() < p.norm() {
                *root = cand;
            } else {
                break;
            }
        }
    }
    z
}

/// All complex roots of an integer polynomial, with multiplicity.
pub fn poly_roots(p: &IntPolynomial) -> Result<Vec<Complex64>> {
    roots_complex(&p.to_complex())
}

/// Power sums `sum_i r_i^n` of the roots of a monic integer polynomial, via
/// Newton's identities. These are integers.
pub fn power_sums(p: &IntPolynomial, count: usize) -> Option<Vec<i128>> {
    let d = p.degree();
    // e_k in terms of monic coefficients: c_{d-k} = (-1)^k e_k.
    let c = p.coeffs();
    let mut sums = Vec::with_capacity(count + 1);
    sums.push(d as i128);
    for n in 1..=count {
        // p_n + c_{d-1} p_{n-1} + ... + c_{d-n+1} p_1 + n c_{d-n} = 0 for n <= d,
        // p_n + c_{d-1} p_{n-1} + ... + c_0 p_{n-d} = 0 for n > d.
        let mut acc: i128 = 0;
        for j in 1..=n.min(d) {
            let coeff = c[d - j] as i128;
            let term = if j == n { coeff.checked_mul(n as i128)? } else { coeff.checked_mul(sums[n - j])? };
            acc = acc.checked_add(term)?;
        }
        sums.push(-acc);
    }
    Some(sums)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PisotClass {
    ComplexPisot,
    RealPisot,
    NotPisot,
    ReducibleUnknown,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootInfo {
    pub root: Complex64,
    pub modulus: f64,
}

/// Classification of a monic integer polynomial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PisotReport {
    pub polynomial: IntPolynomial,
    pub roots: Vec<RootInfo>,
    pub classification: PisotClass,
    /// Distinguished root outside the unit disk (positive imaginary part in
    /// the complex case).
    pub theta: Option<Complex64>,
    /// Non-real `theta` with `|theta|` in `(1, sqrt 2)`, i.e. `1/theta` lies in the
    /// supercritical region of the unbiased complex Bernoulli convolution.
    pub lambda_inverse_in_u: bool,
    /// Why the irreducibility screen failed, when it did.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub screen_note: Option<String>,
}

/// Outcome of the irreducibility screen.
#[derive(Debug, Clone, PartialEq)]
enum Screen {
    Irreducible,
    Factor(String),
    Undecided(String),
}

fn divisors(n: i64) -> Vec<i64> {
    let n = n.unsigned_abs();
    let mut out = Vec::new();
    let mut k = 1u64;
    while k * k <= n {
        if n % k == 0 {
            out.push(k as i64);
            if k * k != n {
                out.push((n / k) as i64);
            }
        }
        k += 1;
    }
    out.sort_unstable();
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact division test of `f` by monic `g` (both ascending).
fn divides(g: &[i64], f: &[i64]) -> bool {
    let k = g.len() - 1;
    let mut rem: Vec<i128> = f.iter().map(|&c| c as i128).collect();
    for top in (k..rem.len()).rev() {
        let q = rem[top];
        if q == 0 {
            continue;
        }
        for (j, &gj) in g.iter().enumerate() {
            let idx = top - k + j;
            match q.checked_mul(gj as i128).and_then(|v| rem[idx].checked_sub(v)) {
                Some(v) => rem[idx] = v,
                None => return false,
            }
        }
    }
    rem[..k].iter().all(|&r| r == 0)
}

fn screen_irreducible(p: &IntPolynomial) -> Screen {
    let c = p.coeffs();
    let d = p.degree();
    if c[0] == 0 {
        return Screen::Factor("z divides the polynomial".into());
    }
    for r in divisors(c[0]) {
        for x in [r, -r] {
            match p.eval_int(x as i128) {
                Some(0) => return Screen::Factor(format!("rational root {x}")),
                Some(_) => {}
                None => return Screen::Undecided(format!("overflow evaluating at {x}")),
            }
        }
    }
    // Monic factors of degree k have coefficients bounded by C(k, j) * ||p||_2.
    let norm = p.l2_norm();
    for k in 2..=d / 2 {
        let bounds: Vec<i64> = (0..k).map(|j| (binomial(k, j) * norm).floor() as i64).collect();
        let consts: Vec<i64> = divisors(c[0])
            .into_iter()
            .flat_map(|v| [v, -v])
            .filter(|v| v.abs() <= bounds[0])
            .collect();
        let space: f64 = consts.len() as f64
            * bounds[1..].iter().map(|&b| (2 * b + 1) as f64).product::<f64>();
        if space > FACTOR_SEARCH_CAP as f64 {
            return Screen::Undecided(format!(
                "degree-{k} factor search needs {space:.3e} candidates"
            ));
        }
        let mut g = vec![0i64; k + 1];
        g[k] = 1;
        for &c0 in &consts {
            g[0] = c0;
            if search_factor(&mut g, 1, &bounds, c) {
                return Screen::Factor(format!("monic factor of degree {k}: {:?}", g));
            }
        }
    }
    Screen::Irreducible
}

fn search_factor(g: &mut Vec<i64>, pos: usize, bounds: &[i64], f: &[i64]) -> bool {
    if pos == bounds.len() {
        return divides(g, f);
    }
    for v in -bounds[pos]..=bounds[pos] {
        g[pos] = v;
        if search_factor(g, pos + 1, bounds, f) {
            return true;
        }
    }
    false
}

/// Classifies a monic integer polynomial as complex Pisot, real Pisot or
/// neither.
///
/// A polynomial is complex Pisot when it passes the irreducibility screen and
/// has exactly one non-real conjugate pair outside the closed unit disk with
/// every other root strictly inside. Irreducibility is screened by a rational
/// root test plus an exhaustive Mignotte-bounded search for monic factors;
/// when the search is too large or a factor is found the polynomial is
/// reported as `reducible-unknown`.
pub fn is_complex_pisot(p: &IntPolynomial) -> Result<PisotReport> {
    if !p.is_monic() {
        return Err(Error::validation("polynomial", "Pisot classification needs a monic polynomial"));
    }
    let roots = poly_roots(p)?;
    let infos: Vec<RootInfo> = roots
        .iter()
        .map(|&r| RootInfo { root: r, modulus: r.norm() })
        .collect();

    let screen = screen_irreducible(p);
    let mut report = PisotReport {
        polynomial: p.clone(),
        roots: infos,
        classification: PisotClass::NotPisot,
        theta: None,
        lambda_inverse_in_u: false,
        screen_note: None,
    };
    match screen {
        Screen::Irreducible => {}
        Screen::Factor(note) | Screen::Undecided(note) => {
            report.classification = PisotClass::ReducibleUnknown;
            report.screen_note = Some(note);
            return Ok(report);
        }
    }

    let scale = 1e-7;
    let outside: Vec<Complex64> = roots
        .iter()
        .copied()
        .filter(|r| r.norm() > 1.0 + UNIT_CIRCLE_TOL)
        .collect();
    let inside = roots.iter().filter(|r| r.norm() < 1.0 - UNIT_CIRCLE_TOL).count();
    let all_others_inside = inside + outside.len() == roots.len();

    if all_others_inside && outside.len() == 2 {
        let (a, b) = (outside[0], outside[1]);
        let nonreal = a.im.abs() > scale * a.norm();
        if nonreal && (a - b.conj()).norm() <= scale * a.norm() {
            let theta = if a.im > 0.0 { a } else { b };
            report.classification = PisotClass::ComplexPisot;
            report.theta = Some(theta);
            report.lambda_inverse_in_u = theta.norm() < std::f64::consts::SQRT_2;
        }
    } else if all_others_inside && outside.len() == 1 {
        let a = outside[0];
        if a.im.abs() <= scale * a.norm() {
            report.classification = PisotClass::RealPisot;
            report.theta = Some(Complex64::new(a.re, 0.0));
        }
    }
    Ok(report)
}

/// Result of [`pisot_scan`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PisotScan {
    pub reports: Vec<PisotReport>,
    pub polynomials_checked: u64,
    pub truncated: bool,
}

/// Progress record emitted once per finished degree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanProgress {
    pub degree: usize,
    pub checked: u64,
    pub found: usize,
}

/// All monic integer polynomials of degree `2..=max_degree` with lower
/// coefficients in `[-coeff_bound, coeff_bound]` that are complex Pisot with
/// `theta` in the given annulus, deduplicated by `theta`.
pub fn pisot_scan(
    max_degree: usize,
    coeff_bound: i64,
    theta_annulus: &Annulus,
    budget: Budget,
) -> Result<PisotScan> {
    pisot_scan_with_progress(max_degree, coeff_bound, theta_annulus, budget, |_| {})
}

pub fn pisot_scan_with_progress<F>(
    max_degree: usize,
    coeff_bound: i64,
    theta_annulus: &Annulus,
    budget: Budget,
    mut on_progress: F,
) -> Result<PisotScan>
where
    F: FnMut(&ScanProgress),
{
    if coeff_bound < 1 {
        return Err(Error::param("coeff_bound", "must be at least 1"));
    }
    if max_degree > MAX_DEGREE {
        return Err(Error::param("max_degree", format!("must be at most {MAX_DEGREE}")));
    }
    let width = (2 * coeff_bound + 1) as u64;
    let mut remaining = budget.get();
    let mut truncated = false;
    let mut checked = 0u64;
    let mut found: Vec<PisotReport> = Vec::new();

    for degree in 2..=max_degree {
        let full = (width as f64).powi(degree as i32);
        let count = if full > remaining as f64 {
            truncated = true;
            remaining
        } else {
            full as u64
        };
        let hits: Vec<PisotReport> = (0..count)
            .into_par_iter()
            .filter_map(|idx| {
                let mut coeffs = Vec::with_capacity(degree + 1);
                let mut rest = idx;
                for _ in 0..degree {
                    coeffs.push((rest % width) as i64 - coeff_bound);
                    rest /= width;
                }
                coeffs.push(1);
                if coeffs[0] == 0 {
                    return None;
                }
                let p = IntPolynomial::new(coeffs).ok()?;
                let report = is_complex_pisot(&p).ok()?;
                let theta = report.theta?;
                (report.classification == PisotClass::ComplexPisot && theta_annulus.contains(theta))
                    .then_some(report)
            })
            .collect();
        checked += count;
        remaining -= count;
        for r in hits {
            let t = r.theta.unwrap();
            if !found.iter().any(|f| (f.theta.unwrap() - t).norm() < 1e-9) {
                found.push(r);
            }
        }
        on_progress(&ScanProgress { degree, checked, found: found.len() });
        if truncated || remaining == 0 {
            truncated = truncated || degree < max_degree;
            break;
        }
    }
    found.sort_by(|a, b| {
        let (ta, tb) = (a.theta.unwrap(), b.theta.unwrap());
        ta.norm()
            .total_cmp(&tb.norm())
            .then(ta.arg().total_cmp(&tb.arg()))
            .then(a.polynomial.degree().cmp(&b.polynomial.degree()))
    });
    Ok(PisotScan { reports: found, polynomials_checked: checked, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(desc: &[i64]) -> IntPolynomial {
        IntPolynomial::from_descending(desc.to_vec()).unwrap()
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn display() {
        assert_eq!(poly(&[1, 0, 1, -1]).to_string(), "z^3 + z - 1");
        assert_eq!(poly(&[1, -1, -1]).to_string(), "z^2 - z - 1");
    }

    #[test]
    fn roots_of_z2_minus_1() {
        let r = sorted(poly_roots(&poly(&[1, 0, -1])).unwrap());
        assert!((r[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn roots_match_companion_eigenvalues() {
        for desc in [vec![1, 0, 1, -1], vec![1, -1, 0, 0, -1], vec![1, 2, -3, 1, 5, -2]] {
            let p = poly(&desc);
            let d = p.degree();
            let c = p.coeffs();
            let companion = nalgebra::DMatrix::from_fn(d, d, |i, j| {
                if j == d - 1 {
                    -(c[i] as f64)
                } else if i == j + 1 {
                    1.0
                } else {
                    0.0
                }
            });
            let eig = sorted(companion.complex_eigenvalues().iter().copied().collect());
            let roots = sorted(poly_roots(&p).unwrap());
            for (a, b) in eig.iter().zip(&roots) {
                assert!((a - b).norm() < 1e-9, "{p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn roots_of_cubic() {
        let p = poly(&[1, 0, 1, -1]);
        let r = sorted(poly_roots(&p).unwrap());
        assert!((r[0] - Complex64::new(-0.3411639, -1.1615414)).norm() < 1e-7);
        assert!((r[1] - Complex64::new(-0.3411639, 1.1615414)).norm() < 1e-7);
        assert!((r[2] - Complex64::new(0.6823278, 0.0)).norm() < 1e-7);
        assert!((r[1].norm() - 1.2106077944060867).abs() < 1e-12);
        assert!((r[1].norm() - 1.2106079).abs() < 1e-6);
        let sum: Complex64 = r.iter().sum();
        let prod: Complex64 = r.iter().product();
        assert!(sum.norm() < 1e-12);
        assert!((prod - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let c = p.to_complex();
        for z in &r {
            assert!(eval(&c, *z).norm() <= 1e-10 * residual_scale(&c, *z));
        }
    }

    #[test]
    fn zero_roots_split_off() {
        let r = roots_complex(&[0.0, 0.0, 1.0].map(|x| Complex64::new(x, 0.0))).unwrap();
        assert_eq!(r, vec![Complex64::new(0.0, 0.0); 2]);
    }

    #[test]
    fn power_sums_match_roots() {
        let p = poly(&[1, 0, 1, -1]);
        let roots = poly_roots(&p).unwrap();
        let sums = power_sums(&p, 20).unwrap();
        for (n, &s) in sums.iter().enumerate() {
            let direct: Complex64 = roots.iter().map(|r| r.powu(n as u32)).sum();
            assert!((direct.re - s as f64).abs() < 1e-8 * (1.0 + s.abs() as f64), "n={n}");
        }
    }

    #[test]
    fn pisot_examples() {
        let rep = is_complex_pisot(&poly(&[1, 0, 1, -1])).unwrap();
        assert_eq!(rep.classification, PisotClass::ComplexPisot);
        let theta = rep.theta.unwrap();
        assert!(theta.im > 0.0);
        assert!((theta.norm() - 1.2106079).abs() < 1e-6);
        assert!((1.0 / theta.norm() - 0.8260313).abs() < 1e-6);
        assert!(rep.lambda_inverse_in_u);

        let golden = is_complex_pisot(&poly(&[1, -1, -1])).unwrap();
        assert_eq!(golden.classification, PisotClass::RealPisot);
        assert!((golden.theta.unwrap().re - 1.618033988749895).abs() < 1e-12);

        let circle = is_complex_pisot(&poly(&[1, 0, 1])).unwrap();
        assert_eq!(circle.classification, PisotClass::NotPisot);

        assert!(is_complex_pisot(&poly(&[2, 0, 1])).is_err());
    }

    #[test]
    fn screen_detects_factors() {
        // (z^2 + z + 1)(z^2 - 2) has no rational root but a quadratic factor.
        let p = poly(&[1, 1, -1, -2, -2]);
        assert_eq!(is_complex_pisot(&p).unwrap().classification, PisotClass::ReducibleUnknown);
        // (z - 1)(z^2 + z - 1)
        let q = poly(&[1, 0, -2, 1]);
        assert_eq!(is_complex_pisot(&q).unwrap().classification, PisotClass::ReducibleUnknown);
        assert_eq!(screen_irreducible(&poly(&[1, 0, 0, 1, -1])), Screen::Irreducible);
    }

    #[test]
    fn scan_examples() {
        let ann = Annulus::theta_side(1.0, std::f64::consts::SQRT_2).unwrap();
        let scan = pisot_scan(3, 1, &ann, Budget::default()).unwrap();
        assert!(!scan.truncated);
        assert!(scan
            .reports
            .iter()
            .any(|r| r.polynomial == poly(&[1, 0, 1, -1])));
        assert!(scan.reports.iter().all(|r| r.lambda_inverse_in_u));
        assert!(pisot_scan(1, 1, &ann, Budget::default()).unwrap().reports.is_empty());

        let small = pisot_scan(4, 1, &ann, Budget(30)).unwrap();
        assert!(small.truncated);
    }
}

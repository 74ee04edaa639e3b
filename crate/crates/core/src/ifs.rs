//! Domain types for homogeneous complex IFSs and the entropy/dimension formulas.
//!
//! An IFS here is a family of maps `z -> lambda * z + a_i` sharing one
//! complex contraction ratio, together with a probability vector that selects
//! the self-similar measure. Complex numbers are serialized as two-element
//! arrays `[re, im]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum(p) - 1|` accepted when validating probability vectors.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// Strictly positive probability vector of length at least two.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validates and renormalizes. Sums off by more than [`PROBABILITY_SUM_TOL`]
    /// are rejected; smaller discrepancies are divided out.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::validation("weights", "need at least two entries"));
        }
        if let Some((i, p)) = entries
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > 0.0))
        {
            return Err(Error::validation(
                "weights",
                format!("entry {i} = {p} is not a positive finite number"),
            ));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::validation(
                "weights",
                format!("entries sum to {sum}, expected 1"),
            ));
        }
        Ok(ProbabilityVector(entries.into_iter().map(|p| p / sum).collect()))
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Shannon entropy `-sum p_i log p_i` in nats.
pub fn entropy(p: &ProbabilityVector) -> f64 {
    -p.entries().iter().map(|&q| q * q.ln()).sum::<f64>()
}

/// Similarity dimension `h(p) / (-log |lambda|)`.
///
/// Only the modulus of `lambda` enters.
pub fn similarity_dimension(lambda: Complex64, p: &ProbabilityVector) -> Result<f64> {
    let r = lambda.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::param(
            "lambda",
            format!("|lambda| = {r} is not in (0, 1)"),
        ));
    }
    Ok(entropy(p) / -r.ln())
}

/// Wire form of an IFS as read from or written to JSON. Not validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfsDocument {
    pub lambda: Complex64,
    pub translations: Vec<Complex64>,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_duplicate_translations: bool,
}

/// A validated homogeneous complex IFS `(lambda, a, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsSpec {
    lambda: Complex64,
    translations: Vec<Complex64>,
    weights: ProbabilityVector,
    allow_duplicate_translations: bool,
}

impl IfsSpec {
    pub fn new(lambda: Complex64, translations: Vec<Complex64>, weights: Vec<f64>) -> Result<Self> {
        Self::build(lambda, translations, weights, false)
    }

    /// Same as [`IfsSpec::new`] but permits repeated translations, as needed for
    /// convolution and decimation systems.
    pub fn with_duplicates(
        lambda: Complex64,
        translations: Vec<Complex64>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        Self::build(lambda, translations, weights, true)
    }

    /// Uniform weights over the given translations.
    pub fn uniform(lambda: Complex64, translations: Vec<Complex64>) -> Result<Self> {
        let m = translations.len();
        Self::new(lambda, translations, vec![1.0 / m as f64; m])
    }

    fn build(
        lambda: Complex64,
        translations: Vec<Complex64>,
        weights: Vec<f64>,
        allow_duplicate_translations: bool,
    ) -> Result<Self> {
        let r = lambda.norm();
        if !(r.is_finite() && r > 0.0 && r < 1.0) {
            return Err(Error::validation(
                "lambda",
                format!("contraction violated: |lambda| = {r} must lie in (0, 1)"),
            ));
        }
        if translations.len() < 2 {
            return Err(Error::validation(
                "translations",
                "need at least two maps",
            ));
        }
        if let Some(a) = translations.iter().find(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::validation(
                "translations",
                format!("non-finite translation {a}"),
            ));
        }
        if !allow_duplicate_translations {
            for i in 0..translations.len() {
                for j in 0..i {
                    if translations[i] == translations[j] {
                        return Err(Error::validation(
                            "translations",
                            format!("entries {j} and {i} coincide ({})", translations[i]),
                        ));
                    }
                }
            }
        }
        if weights.len() != translations.len() {
            return Err(Error::validation(
                "weights",
                format!(
                    "length {} does not match {} translations",
                    weights.len(),
                    translations.len()
                ),
            ));
        }
        let weights = ProbabilityVector::new(weights)?;
        Ok(IfsSpec {
            lambda,
            translations,
            weights,
            allow_duplicate_translations,
        })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn translations(&self) -> &[Complex64] {
        &self.translations
    }

    pub fn weights(&self) -> &ProbabilityVector {
        &self.weights
    }

    pub fn allows_duplicates(&self) -> bool {
        self.allow_duplicate_translations
    }

    /// Number of maps.
    pub fn len(&self) -> usize {
        self.translations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.translations.is_empty()
    }

    pub fn max_translation(&self) -> f64 {
        self.translations.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Radius of a disk about the origin containing the attractor.
    pub fn attractor_radius(&self) -> f64 {
        self.max_translation() / (1.0 - self.lambda.norm())
    }

    pub fn similarity_dimension(&self) -> f64 {
        similarity_dimension(self.lambda, &self.weights).expect("validated contraction")
    }

    /// True when the self-similar measure lives on a line: real ratio and
    /// collinear translations. Returns the unit direction of that line.
    pub fn support_line(&self) -> Option<Complex64> {
        if self.lambda.im != 0.0 {
            return None;
        }
        let base = self.translations[0];
        let dir = self
            .translations
            .iter()
            .map(|a| a - base)
            .find(|d| d.norm() > 0.0)?;
        let unit = dir / dir.norm();
        let scale = self.max_translation().max(1.0);
        let collinear = self
            .translations
            .iter()
            .all(|a| ((a - base) * unit.conj()).im.abs() <= 1e-14 * scale);
        collinear.then_some(unit)
    }

    pub fn to_document(&self) -> IfsDocument {
        IfsDocument {
            lambda: self.lambda,
            translations: self.translations.clone(),
            weights: self.weights.entries().to_vec(),
            allow_duplicate_translations: self.allow_duplicate_translations,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Validated> {
        let doc: IfsDocument = serde_json::from_str(text)
            .map_err(|e| Error::validation("document", e.to_string()))?;
        validate_ifs(&doc)
    }
}

impl Serialize for IfsSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_document().serialize(s)
    }
}

/// Outcome of [`validate_ifs`].
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub spec: IfsSpec,
    /// Set when `lambda` is real. Computations stay defined, but the
    /// decay and absolute-continuity theory only covers non-real ratios.
    pub real_lambda_warning: bool,
}

/// Checks every invariant of an IFS document and returns the validated spec.
pub fn validate_ifs(doc: &IfsDocument) -> Result<Validated> {
    let spec = IfsSpec::build(
        doc.lambda,
        doc.translations.clone(),
        doc.weights.clone(),
        doc.allow_duplicate_translations,
    )?;
    Ok(Validated {
        real_lambda_warning: spec.lambda.im == 0.0,
        spec,
    })
}

/// Parameter region `{ z : b1 <= |z| <= b2, Im z > eta }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionH {
    b1: f64,
    b2: f64,
    eta: f64,
}

impl RegionH {
    pub fn new(b1: f64, b2: f64, eta: f64) -> Result<Self> {
        if !(b1 > 1.0 && b2 > b1 && b2.is_finite()) {
            return Err(Error::validation(
                "region",
                format!("need 1 < b1 < b2, got b1 = {b1}, b2 = {b2}"),
            ));
        }
        if !(eta > 0.0 && eta < b2) {
            return Err(Error::validation("region", format!("need 0 < eta < b2, got {eta}")));
        }
        Ok(RegionH { b1, b2, eta })
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }
    pub fn b2(&self) -> f64 {
        self.b2
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        r >= self.b1 && r <= self.b2 && z.im > self.eta
    }

    /// Axis-aligned bounding box `(re_min, re_max, im_min, im_max)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        (-self.b2, self.b2, self.eta, self.b2)
    }
}

/// Which side of the unit circle an annulus lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnulusSide {
    /// Contraction ratios: `0 <= rho < r <= 1`.
    Lambda,
    /// Expansion ratios: `1 <= rho < r`.
    Theta,
}

/// Open annulus `{ z : rho < |z| < r }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    rho: f64,
    r: f64,
    side: AnnulusSide,
}

impl Annulus {
    pub fn new(rho: f64, r: f64, side: AnnulusSide) -> Result<Self> {
        let ok = match side {
            AnnulusSide::Lambda => rho >= 0.0 && rho < r && r <= 1.0,
            AnnulusSide::Theta => rho >= 1.0 && rho < r && r.is_finite(),
        };
        if !ok {
            return Err(Error::validation(
                "annulus",
                format!("radii ({rho}, {r}) inconsistent with {side:?} side"),
            ));
        }
        Ok(Annulus { rho, r, side })
    }

    pub fn lambda_side(rho: f64, r: f64) -> Result<Self> {
        Self::new(rho, r, AnnulusSide::Lambda)
    }

    pub fn theta_side(rho: f64, r: f64) -> Result<Self> {
        Self::new(rho, r, AnnulusSide::Theta)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn side(&self) -> AnnulusSide {
        self.side
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let m = z.norm();
        m > self.rho && m < self.r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn entropy_examples() {
        let half = ProbabilityVector::uniform(2).unwrap();
        assert!((entropy(&half) - 2f64.ln()).abs() < 1e-15);
        let third = ProbabilityVector::uniform(3).unwrap();
        assert!((entropy(&third) - 1.0986123).abs() < 1e-7);
        let biased = ProbabilityVector::new(vec![0.2, 0.8]).unwrap();
        // mpmath: -(0.2*log(0.2) + 0.8*log(0.8)) = 0.500402423538188
        assert!((entropy(&biased) - 0.500402423538188).abs() < 1e-14);
    }

    #[test]
    fn similarity_dimension_examples() {
        let half = ProbabilityVector::uniform(2).unwrap();
        let l = Complex64::from_polar(2f64.powf(-0.5), 0.7);
        assert!((similarity_dimension(l, &half).unwrap() - 2.0).abs() < 1e-12);
        assert!((similarity_dimension(c(0.5, 0.0), &half).unwrap() - 1.0).abs() < 1e-15);
        // mpmath: log(2) / (-log(sqrt(0.45))) = 1.736106449175432...
        let s = similarity_dimension(c(0.6, 0.3), &half).unwrap();
        assert!((s - 1.736106449175433).abs() < 1e-12, "{s}");
        assert!(similarity_dimension(c(1.0, 0.0), &half).is_err());
        assert!(similarity_dimension(c(0.0, 0.0), &half).is_err());
    }

    #[test]
    fn validation_examples() {
        let doc = IfsDocument {
            lambda: c(0.6, 0.3),
            translations: vec![c(-1.0, 0.0), c(1.0, 0.0)],
            weights: vec![0.5, 0.5],
            allow_duplicate_translations: false,
        };
        let v = validate_ifs(&doc).unwrap();
        assert!(!v.real_lambda_warning);

        let bad = IfsDocument { lambda: c(1.1, 0.0), ..doc.clone() };
        match validate_ifs(&bad) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "lambda"),
            other => panic!("unexpected {other:?}"),
        }

        let dup = IfsDocument {
            translations: vec![c(1.0, 0.0), c(1.0, 0.0)],
            ..doc.clone()
        };
        match validate_ifs(&dup) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "translations"),
            other => panic!("unexpected {other:?}"),
        }
        let dup_ok = IfsDocument { allow_duplicate_translations: true, ..dup };
        assert!(validate_ifs(&dup_ok).is_ok());

        let real = IfsDocument { lambda: c(0.5, 0.0), ..doc.clone() };
        assert!(validate_ifs(&real).unwrap().real_lambda_warning);

        let off = IfsDocument { weights: vec![0.5, 0.4], ..doc };
        match validate_ifs(&off) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "weights"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_layout() {
        let spec = IfsSpec::uniform(c(0.6, 0.3), vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&spec.to_json()).unwrap();
        assert_eq!(v["lambda"], serde_json::json!([0.6, 0.3]));
        assert_eq!(v["translations"][1], serde_json::json!([1.0, 0.0]));
        let back = IfsSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back.spec, spec);
    }

    #[test]
    fn renormalizes_tiny_discrepancy() {
        let p = ProbabilityVector::new(vec![0.1, 0.2, 0.7]).unwrap();
        let s: f64 = p.entries().iter().sum();
        assert!((s - 1.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn regions_and_annuli() {
        assert!(RegionH::new(1.1, 1.3, 0.1).is_ok());
        assert!(RegionH::new(0.9, 1.3, 0.1).is_err());
        assert!(RegionH::new(1.3, 1.1, 0.1).is_err());
        let h = RegionH::new(1.1, 1.3, 0.1).unwrap();
        assert!(h.contains(c(0.0, 1.2)));
        assert!(!h.contains(c(1.2, 0.0)));
        assert!(Annulus::lambda_side(0.5, 0.8).is_ok());
        assert!(Annulus::lambda_side(0.5, 1.2).is_err());
        assert!(Annulus::theta_side(1.0, 2f64.sqrt()).is_ok());
        assert!(Annulus::theta_side(0.5, 2.0).is_err());
    }

    proptest! {
        #[test]
        fn entropy_permutation_invariant_and_bounded(
            raw in proptest::collection::vec(0.01f64..1.0, 2..8),
            rot in 0usize..8,
        ) {
            let sum: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / sum).collect();
            let mut q = p.clone();
            q.rotate_left(rot % p.len());
            let hp = entropy(&ProbabilityVector::new(p.clone()).unwrap());
            let hq = entropy(&ProbabilityVector::new(q).unwrap());
            prop_assert!((hp - hq).abs() < 1e-12);
            prop_assert!(hp > 0.0 && hp <= (p.len() as f64).ln() + 1e-12);
        }

        #[test]
        fn dimension_monotone_in_modulus(r1 in 0.05f64..0.95, dr in 0.001f64..0.04, arg in 0.0f64..6.28) {
            let p = ProbabilityVector::uniform(3).unwrap();
            let r2 = (r1 + dr).min(0.999);
            let s1 = similarity_dimension(Complex64::from_polar(r1, arg), &p).unwrap();
            let s2 = similarity_dimension(Complex64::from_polar(r2, arg), &p).unwrap();
            let s1b = similarity_dimension(Complex64::from_polar(r1, arg + 1.0), &p).unwrap();
            prop_assert!(s2 > s1);
            prop_assert!((s1 - s1b).abs() < 1e-12);
        }

        #[test]
        fn validation_idempotent(re in -0.9f64..0.9, im in -0.4f64..0.4, a in -5.0f64..5.0) {
            prop_assume!(Complex64::new(re, im).norm() > 1e-3 && Complex64::new(re, im).norm() < 0.99);
            let doc = IfsDocument {
                lambda: Complex64::new(re, im),
                translations: vec![Complex64::new(a, 0.0), Complex64::new(a + 1.0, 1.0)],
                weights: vec![0.3, 0.7],
                allow_duplicate_translations: false,
            };
            let once = validate_ifs(&doc).unwrap();
            let twice = validate_ifs(&once.spec.to_document()).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}

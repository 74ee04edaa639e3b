//! Cylinder points, chaos-game sampling, density rasters and IFS algebra.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ifs::IfsSpec;
use crate::rng;

/// Default truncation tolerance for sampling.
pub const DEFAULT_SAMPLE_TOL: f64 = 1e-9;

const SAMPLE_CHUNK: usize = 4096;

/// All level-`n` cylinder points `sum_{k<n} lambda^k a_{i_{k+1}}`, in
/// lexicographic word order (first letter most significant).
pub fn cylinder_points(spec: &IfsSpec, n: usize, budget: Budget) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::param("n", "must be positive"));
    }
    let m = spec.len();
    budget.check_power("cylinder points m^n", m, n)?;
    let lambda = spec.lambda();
    let mut points = vec![Complex64::new(0.0, 0.0)];
    let mut power = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        let mut next = Vec::with_capacity(points.len() * m);
        for &p in &points {
            for &a in spec.translations() {
                next.push(p + power * a);
            }
        }
        points = next;
        power *= lambda;
    }
    Ok(points)
}

/// `max|a| |lambda|^{n+1} / (1 - |lambda|)`: bound on the omitted tail after
/// keeping terms `0..=n`.
pub fn tail_radius(spec: &IfsSpec, n: usize) -> f64 {
    let r = spec.lambda().norm();
    spec.max_translation() * r.powi(n as i32 + 1) / (1.0 - r)
}

/// Smallest truncation index whose tail radius is at most `tol`.
pub fn truncation_for(spec: &IfsSpec, tol: f64) -> usize {
    let mut n = 0;
    while tail_radius(spec, n) > tol && n < 100_000 {
        n += 1;
    }
    n
}

/// Samples from the self-similar measure, each a truncated random sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Complex64>,
    pub seed: u64,
    pub truncation: usize,
    pub tail_radius: f64,
}

impl PointCloud {
    pub fn mean(&self) -> Complex64 {
        self.points.iter().sum::<Complex64>() / self.points.len() as f64
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "re,im")?;
        for p in &self.points {
            writeln!(out, "{:e},{:e}", p.re, p.im)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Draws `count` points `sum_{n<=N} lambda^n X_n` with i.i.d. letters.
///
/// Work is split in fixed-size chunks, each with its own random stream, so
/// the output depends only on `(spec, count, seed, tol)`.
pub fn sample_measure(spec: &IfsSpec, count: usize, seed: u64, tol: f64) -> Result<PointCloud> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let truncation = truncation_for(spec, tol);
    let dist = WeightedIndex::new(spec.weights().entries())
        .map_err(|e| Error::validation("weights", e.to_string()))?;
    let lambda = spec.lambda();
    let a = spec.translations();
    let chunks = count.div_ceil(SAMPLE_CHUNK);
    let points: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = rng::stream(seed, c as u64);
            let len = SAMPLE_CHUNK.min(count - c * SAMPLE_CHUNK);
            let dist = &dist;
            (0..len)
                .map(move |_| {
                    let mut z = Complex64::new(0.0, 0.0);
                    let mut power = Complex64::new(1.0, 0.0);
                    for _ in 0..=truncation {
                        z += power * a[dist.sample(&mut rng)];
                        power *= lambda;
                    }
                    z
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(PointCloud {
        points,
        seed,
        truncation,
        tail_radius: tail_radius(spec, truncation),
    })
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Bounds {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max) {
            return Err(Error::param("bounds", "min must be below max on both axes"));
        }
        Ok(Bounds { re_min, re_max, im_min, im_max })
    }

    /// Square centred at the origin containing the attractor.
    pub fn for_spec(spec: &IfsSpec) -> Self {
        let r = spec.attractor_radius().max(f64::MIN_POSITIVE) * 1.05;
        Bounds { re_min: -r, re_max: r, im_min: -r, im_max: r }
    }
}

/// Histogram of a point cloud on a square pixel grid; row 0 is the top
/// (largest imaginary part).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub bounds: Bounds,
    pub resolution: usize,
    pub cells: Vec<f64>,
    pub total_mass: f64,
    pub clipped_mass: f64,
}

impl DensityGrid {
    /// Empty grid to be filled by [`rasterize`].
    pub fn template(bounds: Bounds, resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::param("resolution", "must be at least 1"));
        }
        Ok(DensityGrid {
            bounds,
            resolution,
            cells: vec![0.0; resolution * resolution],
            total_mass: 0.0,
            clipped_mass: 0.0,
        })
    }

    pub fn cell(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.resolution + col]
    }

    fn cell_index(&self, z: Complex64) -> Option<usize> {
        let b = &self.bounds;
        let res = self.resolution;
        if !(z.re >= b.re_min && z.re <= b.re_max && z.im >= b.im_min && z.im <= b.im_max) {
            return None;
        }
        let col = ((z.re - b.re_min) / (b.re_max - b.re_min) * res as f64) as usize;
        let row = ((b.im_max - z.im) / (b.im_max - b.im_min) * res as f64) as usize;
        Some(row.min(res - 1) * res + col.min(res - 1))
    }

    /// Binary 16-bit PGM, max-normalized, big-endian samples.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(out, "P5\n{} {}\n65535\n", self.resolution, self.resolution)?;
        let max = self.cells.iter().copied().fold(0.0, f64::max);
        for &c in &self.cells {
            let v = if max > 0.0 { (c / max * 65535.0).round() as u16 } else { 0 };
            out.write_all(&v.to_be_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Sidecar describing the raster geometry and mass accounting.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "bounds": self.bounds,
            "resolution": self.resolution,
            "total_mass": self.total_mass,
            "clipped_mass": self.clipped_mass,
            "max_cell": self.cells.iter().copied().fold(0.0, f64::max),
            "row_order": "top-to-bottom (decreasing imaginary part)",
        })
    }
}

/// Nearest-cell binning of `cloud` into a copy of `template`.
///
/// Counts are accumulated as integers, so `total_mass + clipped_mass`
/// differs from 1 only by the final division.
pub fn rasterize(cloud: &PointCloud, template: &DensityGrid) -> DensityGrid {
    let cells = template.resolution * template.resolution;
    let (counts, clipped) = cloud
        .points
        .par_chunks(SAMPLE_CHUNK)
        .map(|chunk| {
            let mut counts = vec![0u64; cells];
            let mut clipped = 0u64;
            for &z in chunk {
                match template.cell_index(z) {
                    Some(i) => counts[i] += 1,
                    None => clipped += 1,
                }
            }
            (counts, clipped)
        })
        .reduce(
            || (vec![0u64; cells], 0u64),
            |(mut a, ca), (b, cb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                (a, ca + cb)
            },
        );
    let n = cloud.points.len().max(1) as f64;
    let inside: u64 = counts.iter().sum();
    DensityGrid {
        bounds: template.bounds,
        resolution: template.resolution,
        cells: counts.iter().map(|&c| c as f64 / n).collect(),
        total_mass: inside as f64 / n,
        clipped_mass: clipped as f64 / n,
    }
}

/// IFS whose measure is `nu * S_u nu`: translations `a_i + u a_j` in
/// row-major order with product weights.
pub fn convolution_ifs(spec: &IfsSpec, u: Complex64) -> Result<IfsSpec> {
    if !(u.re.is_finite() && u.im.is_finite()) {
        return Err(Error::param("u", "must be finite"));
    }
    let a = spec.translations();
    let p = spec.weights().entries();
    let mut b = Vec::with_capacity(a.len() * a.len());
    let mut q = Vec::with_capacity(a.len() * a.len());
    for i in 0..a.len() {
        for j in 0..a.len() {
            b.push(a[i] + u * a[j]);
            q.push(p[i] * p[j]);
        }
    }
    IfsSpec::with_duplicates(spec.lambda(), b, q)
}

/// Splits the measure as `mu * eta`, both with ratio `lambda^k`.
///
/// `eta` keeps the digits at positions divisible by `k`; `mu` collects the
/// blocks in between, with translations `sum_{j=1}^{k-1} lambda^j a_{i_j}` over
/// words `i_1..i_{k-1}` in lexicographic order.
pub fn decimate_ifs(spec: &IfsSpec, k: usize, budget: Budget) -> Result<(IfsSpec, IfsSpec)> {
    if k < 2 {
        return Err(Error::param("k", "must be at least 2"));
    }
    let m = spec.len();
    budget.check_power("decimation words m^(k-1)", m, k - 1)?;
    let lambda = spec.lambda();
    let a = spec.translations();
    let p = spec.weights().entries();
    let mut c = vec![Complex64::new(0.0, 0.0)];
    let mut q = vec![1.0];
    let mut power = lambda;
    for _ in 1..k {
        let mut next_c = Vec::with_capacity(c.len() * m);
        let mut next_q = Vec::with_capacity(c.len() * m);
        for (&ci, &qi) in c.iter().zip(&q) {
            for (&aj, &pj) in a.iter().zip(p) {
                next_c.push(ci + power * aj);
                next_q.push(qi * pj);
            }
        }
        c = next_c;
        q = next_q;
        power *= lambda;
    }
    let lambda_k = lambda.powu(k as u32);
    let mu = IfsSpec::with_duplicates(lambda_k, c, q)?;
    let eta = IfsSpec::with_duplicates(lambda_k, a.to_vec(), p.to_vec())?;
    Ok((mu, eta))
}

/// Equal-weight IFS with ratio `lambda` and the cube roots of unity as
/// translations.
pub fn gasket_spec(lambda: f64) -> Result<IfsSpec> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::param("lambda", "must lie in (0, 1)"));
    }
    let a = (0..3)
        .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 3.0))
        .collect();
    IfsSpec::uniform(Complex64::new(lambda, 0.0), a)
}

/// Replaces `lambda` by `omega * lambda`.
pub fn rotate_ifs(spec: &IfsSpec, omega: Complex64) -> Result<IfsSpec> {
    if (omega.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::param("omega", "must have modulus 1"));
    }
    let doc = spec.to_document();
    let rotated = omega * spec.lambda();
    if spec.allows_duplicates() {
        IfsSpec::with_duplicates(rotated, doc.translations, doc.weights)
    } else {
        IfsSpec::new(rotated, doc.translations, doc.weights)
    }
}

/// True when multiplication by `omega` permutes the weighted translations.
///
/// In that case `omega^n X_n` has the law of `X_n` for every `n`, so the
/// rotated system generates the same measure.
pub fn rotation_invariant(spec: &IfsSpec, omega: Complex64) -> bool {
    let a = spec.translations();
    let p = spec.weights().entries();
    let tol = 1e-12 * spec.max_translation().max(1.0);
    let mut used = vec![false; a.len()];
    for (ai, &pi) in a.iter().zip(p) {
        let target = omega * ai;
        let hit = (0..a.len())
            .find(|&j| !used[j] && (a[j] - target).norm() <= tol && (p[j] - pi).abs() <= 1e-12);
        match hit {
            Some(j) => used[j] = true,
            None => return false,
        }
    }
    true
}

/// Orders `q <= max_order` for which rotation by `e^{2 pi i / q}` preserves
/// the weighted translations (and therefore the measure).
pub fn translation_symmetries(spec: &IfsSpec, max_order: u32) -> Vec<u32> {
    (1..=max_order)
        .filter(|&q| {
            rotation_invariant(
                spec,
                Complex64::from_polar(1.0, std::f64::consts::TAU / q as f64),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cylinder_examples() {
        let s = IfsSpec::uniform(c(0.5, 0.0), vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(cylinder_points(&s, 1, Budget::default()).unwrap(), vec![c(-1.0, 0.0), c(1.0, 0.0)]);

        let s = IfsSpec::uniform(c(0.5, 0.0), vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let pts = cylinder_points(&s, 2, Budget::default()).unwrap();
        assert_eq!(pts, vec![c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.0), c(1.5, 0.0)]);

        let lambda = c(0.6, 0.3);
        let s = IfsSpec::uniform(lambda, vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let pts = cylinder_points(&s, 3, Budget::default()).unwrap();
        assert_eq!(pts.len(), 8);
        for (idx, p) in pts.iter().enumerate() {
            let bits = [(idx >> 2) & 1, (idx >> 1) & 1, idx & 1];
            let direct: Complex64 = bits
                .iter()
                .enumerate()
                .map(|(k, &b)| lambda.powu(k as u32) * b as f64)
                .sum();
            assert!((p - direct).norm() < 1e-15);
        }
        assert!(matches!(cylinder_points(&s, 30, Budget(1000)), Err(Error::Budget { .. })));
    }

    #[test]
    fn sampling_is_deterministic_and_centred() {
        let s = IfsSpec::uniform(c(0.5, 0.0), vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let a = sample_measure(&s, 10_000, 9, 1e-9).unwrap();
        let b = sample_measure(&s, 10_000, 9, 1e-9).unwrap();
        assert_eq!(a, b);
        assert!(a.tail_radius <= 1e-9);
        // Variance of sum ±2^-n is 4/3.
        let stderr = (4.0f64 / 3.0 / 10_000.0).sqrt();
        assert!(a.mean().norm() < 3.0 * stderr);

        let s = IfsSpec::uniform(c(0.5, 0.0), vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let cloud = sample_measure(&s, 10_000, 3, 1e-9).unwrap();
        let stderr = (1.0f64 / 3.0 / 10_000.0).sqrt();
        assert!((cloud.mean() - c(1.0, 0.0)).norm() < 3.0 * stderr);
    }

    #[test]
    fn raster_examples() {
        let b = Bounds::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let t = DensityGrid::template(b, 4).unwrap();
        let one = PointCloud { points: vec![c(0.1, 0.9)], seed: 0, truncation: 0, tail_radius: 0.0 };
        let g = rasterize(&one, &t);
        assert_eq!(g.cell(0, 2), 1.0);
        assert_eq!(g.cells.iter().filter(|&&x| x > 0.0).count(), 1);

        let pts = PointCloud {
            points: vec![c(0.0, 0.0), c(5.0, 0.0), c(1.0, -1.0), c(-0.99, 0.3)],
            seed: 0,
            truncation: 0,
            tail_radius: 0.0,
        };
        let g = rasterize(&pts, &t);
        assert!((g.total_mass + g.clipped_mass - 1.0).abs() <= 1e-12);
        assert_eq!(g.clipped_mass, 0.25);
        assert!((g.cells.iter().sum::<f64>() - g.total_mass).abs() <= 1e-15);
    }

    #[test]
    fn uniform_raster_is_flat() {
        let s = IfsSpec::uniform(c(0.5, 0.0), vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let count = 200_000;
        let cloud = sample_measure(&s, count, 1, 1e-9).unwrap();
        let res = 20;
        let t = DensityGrid::template(Bounds::new(-2.0, 2.0, -2.0, 2.0).unwrap(), res).unwrap();
        let g = rasterize(&cloud, &t);
        let per_cell = count as f64 / res as f64;
        for col in 0..res {
            let column: f64 = (0..res).map(|row| g.cell(row, col)).sum::<f64>() * count as f64;
            assert!((column - per_cell).abs() < 5.0 * per_cell.sqrt(), "col {col}: {column}");
        }
    }

    #[test]
    fn convolution_examples() {
        let s = IfsSpec::uniform(c(0.5, 0.2), vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let conv = convolution_ifs(&s, c(1.0, 0.0)).unwrap();
        assert_eq!(conv.translations(), &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(conv.weights().entries(), &[0.25; 4]);
        assert!(conv.allows_duplicates());
        let conv = convolution_ifs(&s, c(0.0, 1.0)).unwrap();
        assert_eq!(conv.translations(), &[c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(1.0, 1.0)]);
        assert!(convolution_ifs(&s, c(0.0, 0.0)).is_ok());
    }

    #[test]
    fn decimation_examples() {
        let lambda = c(0.6, 0.3);
        let s = IfsSpec::new(lambda, vec![c(0.0, 0.0), c(1.0, 0.0)], vec![0.3, 0.7]).unwrap();
        let (mu, eta) = decimate_ifs(&s, 2, Budget::default()).unwrap();
        assert_eq!(mu.lambda(), lambda.powu(2));
        assert_eq!(mu.translations(), &[c(0.0, 0.0), lambda]);
        assert_eq!(mu.weights().entries(), &[0.3, 0.7]);
        assert_eq!(eta.translations(), s.translations());

        let (mu, _) = decimate_ifs(&s, 3, Budget::default()).unwrap();
        let l2 = lambda * lambda;
        let want = [c(0.0, 0.0), l2, lambda, lambda + l2];
        for (got, want) in mu.translations().iter().zip(want) {
            assert!((got - want).norm() < 1e-15);
        }
        let q = mu.weights().entries();
        assert!((q[1] - 0.21).abs() < 1e-15 && (q[3] - 0.49).abs() < 1e-15);
    }

    #[test]
    fn gasket_and_rotation() {
        let g = gasket_spec(0.62).unwrap();
        assert!(g.translations().iter().sum::<Complex64>().norm() < 1e-15);
        assert!(g.translations().iter().all(|a| (a.norm() - 1.0).abs() < 1e-15));
        for lambda in [0.5, 0.57, 0.58, 0.7] {
            let s = gasket_spec(lambda).unwrap().similarity_dimension();
            assert_eq!(s > 2.0, lambda > 3f64.powf(-0.5));
        }
        assert_eq!(rotate_ifs(&g, c(1.0, 0.0)).unwrap(), g);
        assert!(rotate_ifs(&g, c(1.1, 0.0)).is_err());

        let w = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let mut l = g.lambda();
        for _ in 0..3 {
            l *= w;
        }
        assert!((l + g.lambda()).norm() < 1e-15);
        for _ in 0..3 {
            l *= w;
        }
        assert!((l - g.lambda()).norm() < 1e-15);

        assert_eq!(translation_symmetries(&g, 12), vec![1, 3]);
        assert!(!rotation_invariant(&g, w));
        let square = IfsSpec::uniform(c(0.5, 0.1), vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]).unwrap();
        assert_eq!(translation_symmetries(&square, 8), vec![1, 2, 4]);
    }

    proptest! {
        #[test]
        fn cylinder_points_stay_in_disk(re in -0.9f64..0.9, im in -0.9f64..0.9, n in 1usize..8) {
            prop_assume!(Complex64::new(re, im).norm() < 0.95 && Complex64::new(re, im).norm() > 0.05);
            let s = IfsSpec::uniform(c(re, im), vec![c(-1.0, 0.5), c(1.0, 0.0), c(0.2, -1.0)]).unwrap();
            let r = s.attractor_radius();
            for p in cylinder_points(&s, n, Budget::default()).unwrap() {
                prop_assert!(p.norm() <= r * (1.0 + 1e-12));
            }
        }

        #[test]
        fn raster_conserves_mass(seed in 0u64..1000, half in 0.5f64..3.0) {
            let s = IfsSpec::uniform(c(0.6, 0.3), vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
            let cloud = sample_measure(&s, 2000, seed, 1e-6).unwrap();
            let t = DensityGrid::template(Bounds::new(-half, half, -half, half).unwrap(), 16).unwrap();
            let g = rasterize(&cloud, &t);
            prop_assert!((g.total_mass + g.clipped_mass - 1.0).abs() <= 1e-12);
        }
    }
}

//! Cylinder separation `Delta_n`, concentration diagnostics, exact-overlap
//! roots and argument-principle zero counts.
//!
//! `Delta_n(lambda, a)` is the smallest `|sum_{k<n} d_k lambda^k|` over nonzero
//! `d` in `D^n`, where `D = A - A` contains 0. Every search here evaluates a
//! candidate `d` the same way (left-to-right prefix sums `s + d_k * lambda^k`),
//! so brute force and branch-and-bound agree bit for bit.

use std::collections::{HashMap, HashSet};
use std::f64::consts::{PI, TAU};
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{eval, eval_with_derivative, roots_complex};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ifs::{Annulus, IfsSpec};
use crate::measure::{cylinder_points, decimate_ifs};
use crate::stats::linear_fit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationResult {
    pub n: usize,
    pub value: f64,
    /// Minimizing difference vector, normalized so its first nonzero entry is
    /// lexicographically negative; lexicographically smallest among ties.
    pub argmin_diff: Vec<Complex64>,
    pub nodes_expanded: u64,
    pub nodes_pruned: u64,
}

fn cmp_lex(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn is_negative(x: Complex64) -> bool {
    x.re < 0.0 || (x.re == 0.0 && x.im < 0.0)
}

/// `A - A` including 0, sorted lexicographically by `(re, im)`.
pub fn difference_set(spec: &IfsSpec) -> Vec<Complex64> {
    canonical_set(
        spec.translations()
            .iter()
            .flat_map(|&x| spec.translations().iter().map(move |&y| x - y))
            .collect(),
    )
}

fn canonical_set(mut d: Vec<Complex64>) -> Vec<Complex64> {
    for x in d.iter_mut() {
        // Fold -0.0 into +0.0 so equal values sort and hash together.
        *x = Complex64::new(x.re + 0.0, x.im + 0.0);
    }
    d.sort_by(cmp_lex);
    d.dedup();
    d
}

fn powers(lambda: Complex64, n: usize) -> Vec<Complex64> {
    let mut pow = Vec::with_capacity(n);
    let mut p = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        pow.push(p);
        p *= lambda;
    }
    pow
}

fn evaluate(d: &[Complex64], pow: &[Complex64]) -> Complex64 {
    d.iter()
        .zip(pow)
        .fold(Complex64::new(0.0, 0.0), |s, (&x, &p)| s + x * p)
}

fn has_coincident_translations(spec: &IfsSpec) -> bool {
    let a = spec.translations();
    (0..a.len()).any(|i| (0..i).any(|j| a[i] == a[j]))
}

fn coincident_result(n: usize) -> SeparationResult {
    SeparationResult {
        n,
        value: 0.0,
        argmin_diff: vec![Complex64::new(0.0, 0.0); n],
        nodes_expanded: 0,
        nodes_pruned: 0,
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::param("n", "must be positive"))
    } else {
        Ok(())
    }
}

/// Exhaustive minimum over `D^n`.
///
/// `nodes_expanded` counts prefix sums computed, which for a full odometer
/// sweep is `sum_{k=1}^n |D|^k`.
pub fn delta_n_brute(spec: &IfsSpec, n: usize, budget: Budget) -> Result<SeparationResult> {
    check_n(n)?;
    if has_coincident_translations(spec) {
        return Ok(coincident_result(n));
    }
    let d = difference_set(spec);
    let nd = d.len();
    budget.check_power("difference vectors |D|^n", nd, n)?;
    let zero = d.iter().position(|x| *x == Complex64::new(0.0, 0.0)).unwrap();
    let pow = powers(spec.lambda(), n);

    let mut idx = vec![0usize; n];
    let mut s = vec![Complex64::new(0.0, 0.0); n + 1];
    for k in 0..n {
        s[k + 1] = s[k] + d[0] * pow[k];
    }
    let mut nodes = n as u64;
    let mut best_v = f64::INFINITY;
    let mut best_idx = idx.clone();
    'sweep: loop {
        if idx.iter().any(|&i| i != zero) {
            let v = s[n].norm();
            if v < best_v {
                best_v = v;
                best_idx.copy_from_slice(&idx);
            }
        }
        let mut p = n;
        loop {
            if p == 0 {
                break 'sweep;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < nd {
                break;
            }
            idx[p] = 0;
        }
        for k in p..n {
            s[k + 1] = s[k] + d[idx[k]] * pow[k];
            nodes += 1;
        }
    }
    Ok(SeparationResult {
        n,
        value: best_v,
        argmin_diff: best_idx.iter().map(|&i| d[i]).collect(),
        nodes_expanded: nodes,
        nodes_pruned: 0,
    })
}

/// Options for [`delta_n_pruned_with`].
#[derive(Debug, Clone, Copy)]
pub struct PrunedOptions {
    /// Split the tree over worker threads. Node statistics then depend on the
    /// schedule; the value and minimizer do not.
    pub parallel: bool,
    /// Cap on expanded nodes.
    pub budget: Budget,
}

impl Default for PrunedOptions {
    fn default() -> Self {
        PrunedOptions { parallel: true, budget: Budget::default() }
    }
}

/// Exact branch-and-bound computation of `Delta_n`.
pub fn delta_n_pruned(spec: &IfsSpec, n: usize) -> Result<SeparationResult> {
    delta_n_pruned_with(spec, n, &PrunedOptions::default())
}

struct Search<'a> {
    d: &'a [Complex64],
    neg: Vec<bool>,
    zero: usize,
    pow: Vec<Complex64>,
    pow_abs: Vec<f64>,
    /// `tail[k]` bounds `|sum_{j>=k} d_j lambda^j|`.
    tail: Vec<f64>,
    margin: f64,
    n: usize,
    shared_best: AtomicU64,
    node_count: AtomicU64,
    node_cap: u64,
}

struct Local {
    best_v: f64,
    best_idx: Vec<usize>,
    idx: Vec<usize>,
    expanded: u64,
    pruned: u64,
    seen: Vec<HashSet<(bool, u64, u64)>>,
    exceeded: bool,
}

fn better(v: f64, idx: &[usize], best_v: f64, best_idx: &[usize]) -> bool {
    v < best_v || (v == best_v && idx < best_idx)
}

fn sum_key(started: bool, s: Complex64) -> (bool, u64, u64) {
    (started, (s.re + 0.0).to_bits(), (s.im + 0.0).to_bits())
}

impl Search<'_> {
    fn bound(&self, loc: &Local) -> f64 {
        loc.best_v.min(f64::from_bits(self.shared_best.load(Ordering::Relaxed)))
    }

    fn allowed(&self, i: usize, started: bool) -> bool {
        started || i == self.zero || self.neg[i]
    }

    /// Cheap incumbent: best of two greedy descents.
    fn greedy(&self) -> (f64, Vec<usize>) {
        let mut best = (f64::INFINITY, vec![self.zero; self.n]);
        for lead in [0, self.n - 1] {
            let mut idx = vec![self.zero; self.n];
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..self.n {
                let forced = k == lead;
                let started = k > lead;
                let mut choice = None;
                for i in 0..self.d.len() {
                    if k < lead && i != self.zero {
                        continue;
                    }
                    if forced && (i == self.zero || !self.neg[i]) {
                        continue;
                    }
                    if !started && !forced && !self.allowed(i, false) {
                        continue;
                    }
                    let v = (s + self.d[i] * self.pow[k]).norm();
                    if choice.map_or(true, |(bv, _)| v < bv) {
                        choice = Some((v, i));
                    }
                }
                let (_, i) = choice.expect("difference set has a negative element");
                idx[k] = i;
                s = s + self.d[i] * self.pow[k];
            }
            let v = s.norm();
            if better(v, &idx, best.0, &best.1) {
                best = (v, idx);
            }
        }
        best
    }

    fn dfs(&self, loc: &mut Local, k: usize, s: Complex64, started: bool) {
        if loc.exceeded {
            return;
        }
        if k == self.n {
            if started {
                let v = s.norm();
                if better(v, &loc.idx, loc.best_v, &loc.best_idx) {
                    loc.best_v = v;
                    loc.best_idx.copy_from_slice(&loc.idx);
                    self.shared_best.fetch_min(v.to_bits(), Ordering::Relaxed);
                }
            }
            return;
        }
        let limit = self.bound(loc) + self.tail[k + 1] + self.margin;
        let center = -s / self.pow[k];
        let radius = limit / self.pow_abs[k] * (1.0 + 1e-9) + f64::MIN_POSITIVE;
        let lo = self.d.partition_point(|x| x.re < center.re - radius);
        let mut visited = 0u64;
        for i in lo..self.d.len() {
            let x = self.d[i];
            if x.re > center.re + radius {
                break;
            }
            if !self.allowed(i, started) || (x - center).norm() > radius {
                continue;
            }
            let child_started = started || i != self.zero;
            if k + 1 == self.n && !child_started {
                continue;
            }
            let s2 = s + x * self.pow[k];
            if s2.norm() - self.tail[k + 1] > self.bound(loc) + self.margin {
                continue;
            }
            if k + 1 < self.n && !loc.seen[k + 1].insert(sum_key(child_started, s2)) {
                continue;
            }
            visited += 1;
            loc.expanded += 1;
            if self.node_count.fetch_add(1, Ordering::Relaxed) >= self.node_cap {
                loc.exceeded = true;
                return;
            }
            loc.idx[k] = i;
            self.dfs(loc, k + 1, s2, child_started);
            if loc.exceeded {
                return;
            }
        }
        loc.pruned += self.d.len() as u64 - visited;
    }
}

/// Branch-and-bound with explicit options.
///
/// Three exact reductions keep the tree small:
/// * `d` and `-d` give the same value, so the first nonzero coefficient is
///   restricted to lexicographically negative elements of `D`;
/// * a prefix is dropped when `|s_k| - T_k` exceeds the incumbent, where
///   `T_k = max|D| sum_{k<=j<n} |lambda|^j` bounds any completion;
/// * prefixes whose partial sums are bitwise equal share one subtree (the
///   first one visited, which is also the lexicographically smallest).
pub fn delta_n_pruned_with(
    spec: &IfsSpec,
    n: usize,
    opts: &PrunedOptions,
) -> Result<SeparationResult> {
    check_n(n)?;
    if has_coincident_translations(spec) {
        return Ok(coincident_result(n));
    }
    let d = difference_set(spec);
    let zero = d.iter().position(|x| *x == Complex64::new(0.0, 0.0)).unwrap();
    let pow = powers(spec.lambda(), n);
    let r = spec.lambda().norm();
    let max_d = d.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut tail = vec![0.0; n + 1];
    for k in (0..n).rev() {
        tail[k] = tail[k + 1] + max_d * r.powi(k as i32);
    }
    let search = Search {
        neg: d.iter().map(|&x| is_negative(x)).collect(),
        d: &d,
        zero,
        pow_abs: pow.iter().map(|p| p.norm()).collect(),
        pow,
        margin: 1e-12 * tail[0] + f64::MIN_POSITIVE,
        tail,
        n,
        shared_best: AtomicU64::new(f64::INFINITY.to_bits()),
        node_count: AtomicU64::new(0),
        node_cap: opts.budget.get(),
    };
    let (seed_v, seed_idx) = search.greedy();
    search.shared_best.store(seed_v.to_bits(), Ordering::Relaxed);
    let new_local = |idx: Vec<usize>| Local {
        best_v: seed_v,
        best_idx: seed_idx.clone(),
        idx,
        expanded: 0,
        pruned: 0,
        seen: vec![HashSet::new(); n + 1],
        exceeded: false,
    };

    let locals: Vec<Local> = if opts.parallel && n > 1 {
        // Unpruned frontier at a shallow depth, then independent subtrees.
        let mut depth = 1;
        while depth < n - 1 && d.len().pow(depth as u32) < 256 {
            depth += 1;
        }
        let mut frontier = vec![(Vec::new(), Complex64::new(0.0, 0.0), false)];
        let mut frontier_nodes = 0u64;
        for k in 0..depth {
            let mut next = Vec::new();
            for (prefix, s, started) in &frontier {
                for i in 0..d.len() {
                    if !search.allowed(i, *started) {
                        continue;
                    }
                    let mut p: Vec<usize> = prefix.clone();
                    p.push(i);
                    next.push((p, *s + d[i] * search.pow[k], *started || i != zero));
                }
            }
            frontier_nodes += next.len() as u64;
            frontier = next;
        }
        let mut locals: Vec<Local> = frontier
            .into_par_iter()
            .map(|(prefix, s, started)| {
                let mut idx = prefix.clone();
                idx.resize(n, zero);
                let mut loc = new_local(idx);
                search.dfs(&mut loc, depth, s, started);
                loc
            })
            .collect();
        if let Some(first) = locals.first_mut() {
            first.expanded += frontier_nodes;
        }
        locals
    } else {
        let mut loc = new_local(vec![zero; n]);
        search.dfs(&mut loc, 0, Complex64::new(0.0, 0.0), false);
        vec![loc]
    };

    if locals.iter().any(|l| l.exceeded) {
        return Err(Error::Budget {
            what: "pruned search nodes".into(),
            required: opts.budget.get() as f64 + 1.0,
            budget: opts.budget.get(),
        });
    }
    let mut best_v = seed_v;
    let mut best_idx = seed_idx.clone();
    let (mut expanded, mut pruned) = (0, 0);
    for l in &locals {
        expanded += l.expanded;
        pruned += l.pruned;
        if better(l.best_v, &l.best_idx, best_v, &best_idx) {
            best_v = l.best_v;
            best_idx = l.best_idx.clone();
        }
    }
    Ok(SeparationResult {
        n,
        value: best_v,
        argmin_diff: best_idx.iter().map(|&i| d[i]).collect(),
        nodes_expanded: expanded,
        nodes_pruned: pruned,
    })
}

/// `Delta_n` as the closest pair of level-`n` cylinder points from distinct
/// words. Suited to systems with many maps, where `|D|` is large but `m^n` is
/// not. The reported value is re-evaluated from the minimizing difference
/// vector with the same prefix rule as the other searches.
pub fn delta_n_closest_pair(spec: &IfsSpec, n: usize, budget: Budget) -> Result<SeparationResult> {
    check_n(n)?;
    let pts = cylinder_points(spec, n, budget)?;
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.par_sort_by(|&i, &j| pts[i].re.total_cmp(&pts[j].re).then(i.cmp(&j)));
    let mut best = f64::INFINITY;
    let mut pair = (0, 1);
    for a in 0..order.len() {
        let p = pts[order[a]];
        for &ob in &order[a + 1..] {
            let q = pts[ob];
            if q.re - p.re > best {
                break;
            }
            let dist = (p - q).norm();
            if dist < best {
                best = dist;
                pair = (order[a], ob);
            }
        }
    }
    let m = spec.len();
    let a = spec.translations();
    let digits = |mut w: usize| {
        let mut out = vec![0; n];
        for k in (0..n).rev() {
            out[k] = w % m;
            w /= m;
        }
        out
    };
    let (u, v) = (digits(pair.0), digits(pair.1));
    let mut d: Vec<Complex64> = u
        .iter()
        .zip(&v)
        .map(|(&i, &j)| {
            let x = a[i] - a[j];
            Complex64::new(x.re + 0.0, x.im + 0.0)
        })
        .collect();
    if let Some(first) = d.iter().find(|x| **x != Complex64::new(0.0, 0.0)) {
        if !is_negative(*first) {
            d.iter_mut().for_each(|x| *x = Complex64::new(0.0 - x.re, 0.0 - x.im));
        }
    }
    let value = evaluate(&d, &powers(spec.lambda(), n)).norm();
    Ok(SeparationResult {
        n,
        value,
        argmin_diff: d,
        nodes_expanded: pts.len() as u64,
        nodes_pruned: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMethod {
    Auto,
    Brute,
    Pruned,
    ClosestPair,
}

impl DeltaMethod {
    fn resolve(self, spec: &IfsSpec) -> DeltaMethod {
        match self {
            DeltaMethod::Auto if spec.len() <= 3 => DeltaMethod::Pruned,
            DeltaMethod::Auto => DeltaMethod::ClosestPair,
            other => other,
        }
    }
}

/// `Delta_n` by the requested method (sequential branch-and-bound for
/// `Pruned`).
pub fn delta_n(spec: &IfsSpec, n: usize, method: DeltaMethod, budget: Budget) -> Result<SeparationResult> {
    match method.resolve(spec) {
        DeltaMethod::Brute => delta_n_brute(spec, n, budget),
        DeltaMethod::ClosestPair => delta_n_closest_pair(spec, n, budget),
        _ => delta_n_pruned_with(spec, n, &PrunedOptions { parallel: true, budget }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationParams {
    pub n_max: usize,
    /// Overlap threshold relative to `Delta_1`.
    pub overlap_tol: f64,
    /// Slope of `log Delta_n / n` (per step, over the last third of the range)
    /// below which the run is flagged.
    pub slope_threshold: f64,
    pub method: DeltaMethod,
}

impl Default for ConcentrationParams {
    fn default() -> Self {
        ConcentrationParams {
            n_max: 8,
            overlap_tol: 1e-10,
            slope_threshold: -0.15,
            method: DeltaMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRecord {
    pub n: usize,
    pub delta: f64,
    /// `None` when `Delta_n = 0`.
    pub log_delta_over_n: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    ExactOverlap,
    NoConcentrationEvidence,
    SuperExponentialSuspect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub records: Vec<ConcentrationRecord>,
    pub classification: Classification,
    /// Absolute threshold used for the exact-overlap test.
    pub overlap_tolerance: f64,
    pub tail_slope: Option<f64>,
    pub slope_threshold: f64,
    pub method: DeltaMethod,
    /// Finite-n classification is a heuristic, never a proof.
    pub heuristic: bool,
}

impl ConcentrationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,delta,log_delta_over_n\n");
        for r in &self.records {
            let log = r.log_delta_over_n.map_or("-inf".to_string(), |v| format!("{v:e}"));
            out.push_str(&format!("{},{:e},{}\n", r.n, r.delta, log));
        }
        out
    }
}

/// Computes `Delta_1..Delta_{n_max}` and classifies the decay of
/// `log Delta_n / n`. Stops at the first `n` showing an exact overlap.
pub fn concentration_diagnostic(
    spec: &IfsSpec,
    params: &ConcentrationParams,
    budget: Budget,
) -> Result<ConcentrationReport> {
    if params.n_max == 0 {
        return Err(Error::param("n_max", "must be positive"));
    }
    let method = params.method.resolve(spec);
    let mut records = Vec::new();
    let mut overlap_tolerance = 0.0;
    let mut overlap = false;
    for n in 1..=params.n_max {
        let delta = delta_n(spec, n, method, budget)?.value;
        if n == 1 {
            overlap_tolerance = params.overlap_tol * delta;
        }
        records.push(ConcentrationRecord {
            n,
            delta,
            log_delta_over_n: (delta > 0.0).then(|| delta.ln() / n as f64),
        });
        if delta <= overlap_tolerance {
            overlap = true;
            break;
        }
    }
    let window = 2.max(params.n_max.div_ceil(3));
    let tail: Vec<&ConcentrationRecord> = records.iter().rev().take(window).collect();
    let xs: Vec<f64> = tail.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = tail.iter().filter_map(|r| r.log_delta_over_n).collect();
    let tail_slope = if ys.len() == xs.len() { linear_fit(&xs, &ys).map(|f| f.slope) } else { None };
    let classification = if overlap {
        Classification::ExactOverlap
    } else if tail_slope.is_some_and(|s| s < params.slope_threshold) {
        Classification::SuperExponentialSuspect
    } else {
        Classification::NoConcentrationEvidence
    };
    Ok(ConcentrationReport {
        records,
        classification,
        overlap_tolerance,
        tail_slope,
        slope_threshold: params.slope_threshold,
        method,
        heuristic: true,
    })
}

/// Relative rounding allowance when comparing separations computed in two
/// different parametrizations.
pub const DECIMATION_RELATIVE_ALLOWANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecimationCheck {
    pub k: usize,
    pub n: usize,
    /// `Delta_n` of the decimated system `(lambda^k, c)`.
    pub decimated: f64,
    /// `Delta_{kn}` of the original system.
    pub original: f64,
    pub holds: bool,
}

/// Checks `Delta_n(lambda^k, c) >= Delta_{kn}(lambda, a)`. Every difference
/// polynomial of the decimated system is one of the original system with
/// zero coefficients at multiples of `k`, so the inequality is exact up to
/// rounding.
pub fn decimation_inequality(spec: &IfsSpec, k: usize, n: usize, budget: Budget) -> Result<DecimationCheck> {
    let (mu, _) = decimate_ifs(spec, k, budget)?;
    let decimated = delta_n(&mu, n, DeltaMethod::Auto, budget)?.value;
    let original = delta_n(spec, k * n, DeltaMethod::Pruned, budget)?.value;
    Ok(DecimationCheck {
        k,
        n,
        decimated,
        original,
        holds: decimated >= original * (1.0 - DECIMATION_RELATIVE_ALLOWANCE),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapRoot {
    pub root: Complex64,
    /// Ascending coefficients of the first polynomial (in enumeration order)
    /// found to vanish there.
    pub coeffs: Vec<Complex64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapRoots {
    pub roots: Vec<OverlapRoot>,
    pub polynomials: u64,
    /// Roots in the annulus whose residual stayed above the bound.
    pub rejected: u64,
}

impl OverlapRoots {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,poly_coeffs\n");
        for r in &self.roots {
            let coeffs: Vec<String> = r.coeffs.iter().map(|c| format!("{}{:+}i", c.re, c.im)).collect();
            out.push_str(&format!("{:e},{:e},{}\n", r.root.re, r.root.im, coeffs.join(";")));
        }
        out
    }
}

/// Residual bound for accepted overlap roots.
pub const OVERLAP_RESIDUAL: f64 = 1e-12;
const OVERLAP_DEDUP: f64 = 1e-10;

/// All zeros in `annulus` of nonzero polynomials of degree at most
/// `max_degree` with coefficients in `d`.
///
/// Polynomials with zero constant term and sign-flipped duplicates are
/// skipped (they contribute no new roots away from 0).
pub fn overlap_roots(
    d: &[Complex64],
    max_degree: usize,
    annulus: &Annulus,
    budget: Budget,
) -> Result<OverlapRoots> {
    let d = canonical_set(d.to_vec());
    if d.is_empty() {
        return Err(Error::validation("D", "coefficient set is empty"));
    }
    let total = budget.check_power("coefficient vectors |D|^(degree+1)", d.len(), max_degree + 1)?;
    let base = d.len() as u64;
    let found: Vec<(u64, OverlapRoot)> = (0..total)
        .into_par_iter()
        .flat_map_iter(|idx| {
            let mut rest = idx;
            let coeffs: Vec<Complex64> = (0..=max_degree)
                .map(|_| {
                    let c = d[(rest % base) as usize];
                    rest /= base;
                    c
                })
                .collect();
            let mut out = Vec::new();
            let c0 = coeffs[0];
            if c0 == Complex64::new(0.0, 0.0) || is_negative(c0) {
                return out.into_iter();
            }
            let Some(deg) = coeffs.iter().rposition(|c| *c != Complex64::new(0.0, 0.0)) else {
                return out.into_iter();
            };
            if deg == 0 {
                return out.into_iter();
            }
            let poly = &coeffs[..=deg];
            if let Ok(roots) = roots_complex(poly) {
                for r in roots {
                    if !annulus.contains(r) {
                        continue;
                    }
                    let (p, dp) = eval_with_derivative(poly, r);
                    let refined = if dp.norm() > 0.0 { r - p / dp } else { r };
                    let root = if eval(poly, refined).norm() <= p.norm() { refined } else { r };
                    let residual = eval(poly, root).norm();
                    out.push((idx, OverlapRoot { root, coeffs: poly.to_vec(), residual }));
                }
            }
            out.into_iter()
        })
        .collect();

    let mut rejected = 0u64;
    let mut kept: Vec<OverlapRoot> = Vec::new();
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let cell = |z: Complex64| ((z.re / OVERLAP_DEDUP).floor() as i64, (z.im / OVERLAP_DEDUP).floor() as i64);
    for (_, r) in found {
        if r.residual > OVERLAP_RESIDUAL || !annulus.contains(r.root) {
            rejected += 1;
            continue;
        }
        let (cx, cy) = cell(r.root);
        let dup = (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                grid.get(&(cx + dx, cy + dy))
                    .is_some_and(|v| v.iter().any(|&i| (kept[i].root - r.root).norm() <= OVERLAP_DEDUP))
            })
        });
        if !dup {
            grid.entry((cx, cy)).or_default().push(kept.len());
            kept.push(r);
        }
    }
    kept.sort_by(|a, b| cmp_lex(&a.root, &b.root));
    Ok(OverlapRoots { roots: kept, polynomials: total, rejected })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCountReport {
    pub coeffs: Vec<Complex64>,
    pub radius: f64,
    pub winding: i64,
    pub quadrature_nodes: usize,
}

/// Distance-to-root estimate `|P/P'|` below which a contour point counts as
/// sitting on a root.
const CONTOUR_ROOT_GAP: f64 = 1e-8;

/// Number of zeros (with multiplicity) of `P` in `|z| < radius`, from the
/// winding number of `P` around the circle. The argument increment is
/// accumulated over an adaptively refined set of nodes until every step
/// turns by less than `pi/8`.
pub fn count_zeros_disk(coeffs: &[Complex64], radius: f64) -> Result<ZeroCountReport> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::param("radius", "must be positive and finite"));
    }
    if coeffs.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::validation("coeffs", "polynomial is identically zero"));
    }
    let probe = |phi: f64| -> Result<Complex64> {
        let z = Complex64::from_polar(radius, phi);
        let (p, dp) = eval_with_derivative(coeffs, z);
        if p.norm() == 0.0 || p.norm() <= CONTOUR_ROOT_GAP * radius.max(1.0) * dp.norm() {
            return Err(Error::Degenerate(format!(
                "root within {CONTOUR_ROOT_GAP:e} of the contour |z| = {radius}; perturb the radius"
            )));
        }
        Ok(p)
    };
    let initial = 64;
    let mut nodes = initial;
    let mut total = 0.0;
    let first = probe(0.0)?;
    let mut prev = (0.0, first);
    for j in 1..=initial {
        let phi = TAU * j as f64 / initial as f64;
        let val = if j == initial { first } else { probe(phi)? };
        let mut stack = vec![(prev, (phi, val), 0u32)];
        while let Some(((pa, fa), (pb, fb), depth)) = stack.pop() {
            let step = (fb / fa).arg();
            if step.abs() > PI / 8.0 && depth < 48 {
                let pm = 0.5 * (pa + pb);
                let fm = probe(pm)?;
                nodes += 1;
                // Right half pushed first so the left half is processed first.
                stack.push(((pm, fm), (pb, fb), depth + 1));
                stack.push(((pa, fa), (pm, fm), depth + 1));
            } else {
                total += step;
            }
        }
        prev = (phi, val);
    }
    Ok(ZeroCountReport {
        coeffs: coeffs.to_vec(),
        radius,
        winding: (total / TAU).round() as i64,
        quadrature_nodes: nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn seq() -> PrunedOptions {
        PrunedOptions { parallel: false, budget: Budget::default() }
    }

    #[test]
    fn brute_examples() {
        let s = IfsSpec::uniform(c(0.6, 0.3), vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(delta_n_brute(&s, 1, Budget::default()).unwrap().value, 2.0);
        let r = delta_n_brute(&s, 2, Budget::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(r.argmin_diff, vec![c(-2.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(r.value, evaluate(&r.argmin_diff, &powers(s.lambda(), 2)).norm());
        assert_eq!(r.nodes_expanded, 3 + 9);

        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let s = IfsSpec::uniform(c(golden, 0.0), vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(delta_n_brute(&s, 3, Budget::default()).unwrap().value <= 1e-12);
    }

    #[test]
    fn pruned_matches_brute_on_examples() {
        let s = IfsSpec::uniform(c(0.6, 0.3), vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        for n in 1..=8 {
            let b = delta_n_brute(&s, n, Budget::default()).unwrap();
            let p = delta_n_pruned_with(&s, n, &seq()).unwrap();
            let q = delta_n_pruned(&s, n).unwrap();
            assert_eq!(b.value, p.value, "n={n}");
            assert_eq!(b.argmin_diff, p.argmin_diff, "n={n}");
            assert_eq!(b.value, q.value, "n={n}");
            assert_eq!(b.argmin_diff, q.argmin_diff, "n={n}");
        }
    }

    #[test]
    fn closest_pair_agrees() {
        let s = IfsSpec::uniform(c(0.55, -0.4), vec![c(0.0, 0.0), c(1.0, 0.0), c(0.3, 0.9)]).unwrap();
        for n in 1..=6 {
            let b = delta_n_brute(&s, n, Budget::default()).unwrap();
            let cp = delta_n_closest_pair(&s, n, Budget::default()).unwrap();
            let pts = cylinder_points(&s, n, Budget::default()).unwrap();
            let mut direct = f64::INFINITY;
            for i in 0..pts.len() {
                for j in 0..i {
                    direct = direct.min((pts[i] - pts[j]).norm());
                }
            }
            assert!((b.value - direct).abs() <= 1e-12 * b.value.max(1e-300), "n={n}");
            assert!((b.value - cp.value).abs() <= 1e-12 * b.value, "n={n}");
        }
    }

    #[test]
    fn duplicate_translations_give_zero() {
        let s = IfsSpec::with_duplicates(c(0.5, 0.5), vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)], vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(delta_n_pruned(&s, 3).unwrap().value, 0.0);
        assert_eq!(delta_n_closest_pair(&s, 2, Budget::default()).unwrap().value, 0.0);
    }

    #[test]
    fn concentration_examples() {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let s = IfsSpec::uniform(c(golden, 0.0), vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let rep = concentration_diagnostic(&s, &ConcentrationParams::default(), Budget::default()).unwrap();
        assert_eq!(rep.classification, Classification::ExactOverlap);
        assert_eq!(rep.records.last().unwrap().n, 3);

        let s = IfsSpec::uniform(c(0.6, 0.3), vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let params = ConcentrationParams { n_max: 12, ..Default::default() };
        let rep = concentration_diagnostic(&s, &params, Budget::default()).unwrap();
        assert_eq!(rep.classification, Classification::NoConcentrationEvidence);
        assert_eq!(rep.records.len(), 12);
        for r in &rep.records {
            assert!(r.log_delta_over_n.unwrap() >= -1.2);
        }
        for w in rep.records.windows(2) {
            assert!(w[1].delta <= w[0].delta);
        }
        assert!(rep.to_csv().starts_with("n,delta,log_delta_over_n\n1,"));
    }

    #[test]
    fn decimation_inequality_small() {
        let s = IfsSpec::uniform(c(0.7, 0.45), vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        for n in 1..=3 {
            assert!(decimation_inequality(&s, 3, n, Budget::default()).unwrap().holds);
        }
        let s = IfsSpec::uniform(c(0.5, -0.5), vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!(decimation_inequality(&s, 2, 3, Budget::default()).unwrap().holds);
    }

    #[test]
    fn overlap_root_examples() {
        let d = [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let ann = Annulus::lambda_side(0.5, 0.8).unwrap();
        let out = overlap_roots(&d, 2, &ann, Budget::default()).unwrap();
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!(out.roots.iter().any(|r| (r.root - c(golden, 0.0)).norm() < 1e-12));
        assert!(out.roots.iter().all(|r| r.residual <= OVERLAP_RESIDUAL));

        let unit = Annulus::lambda_side(0.0, 1.0).unwrap();
        assert!(overlap_roots(&d, 1, &unit, Budget::default()).unwrap().roots.is_empty());

        let out = overlap_roots(&d, 6, &Annulus::lambda_side(0.6, 0.95).unwrap(), Budget::default()).unwrap();
        for r in &out.roots {
            assert!(eval(&r.coeffs, r.root).norm() <= OVERLAP_RESIDUAL);
        }
        for w in out.roots.windows(2) {
            assert!((w[0].root - w[1].root).norm() > OVERLAP_DEDUP);
        }
    }

    #[test]
    fn zero_count_examples() {
        let z2 = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert_eq!(count_zeros_disk(&z2, 1.0).unwrap().winding, 2);
        // (z - 0.5)(z - 2) = z^2 - 2.5 z + 1
        let q = [c(1.0, 0.0), c(-2.5, 0.0), c(1.0, 0.0)];
        assert_eq!(count_zeros_disk(&q, 1.0).unwrap().winding, 1);
        assert!(matches!(count_zeros_disk(&q, 2.0), Err(Error::Degenerate(_))));
        assert!(matches!(count_zeros_disk(&q, 0.5 + 1e-12), Err(Error::Degenerate(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn pruned_equals_brute(
            re in -0.8f64..0.8, im in -0.8f64..0.8, n in 1usize..7,
            three in proptest::bool::ANY, ar in -1.0f64..1.0, ai in -1.0f64..1.0,
        ) {
            let lambda = c(re, im);
            prop_assume!(lambda.norm() > 0.1 && lambda.norm() < 0.85);
            let mut a = vec![c(0.0, 0.0), c(1.0, 0.0)];
            if three {
                prop_assume!(c(ar, ai).norm() > 0.05 && (c(ar, ai) - c(1.0, 0.0)).norm() > 0.05);
                a.push(c(ar, ai));
            }
            let s = IfsSpec::uniform(lambda, a).unwrap();
            let b = delta_n_brute(&s, n, Budget::default()).unwrap();
            let p = delta_n_pruned_with(&s, n, &seq()).unwrap();
            prop_assert_eq!(b.value, p.value);
            prop_assert_eq!(&b.argmin_diff, &p.argmin_diff);
            prop_assert!(p.nodes_expanded <= b.nodes_expanded);
        }

        #[test]
        fn delta_monotone_and_scale_equivariant(re in -0.8f64..0.8, im in 0.1f64..0.8, scale in 0.2f64..5.0) {
            let lambda = c(re, im);
            prop_assume!(lambda.norm() < 0.9);
            let s = IfsSpec::uniform(lambda, vec![c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
            let t = IfsSpec::uniform(lambda, vec![c(-scale, 0.0), c(scale, 0.0), c(0.0, scale)]).unwrap();
            let mut prev = f64::INFINITY;
            for n in 1..=5 {
                let v = delta_n_pruned(&s, n).unwrap().value;
                prop_assert!(v <= prev);
                prev = v;
                let w = delta_n_pruned(&t, n).unwrap().value;
                prop_assert!((w - scale * v).abs() <= 1e-12 * w.max(1e-300));
            }
        }

        #[test]
        fn winding_matches_root_tally(
            coeffs in proptest::collection::vec(-1i32..=1, 9),
            radius in 0.3f64..1.5,
        ) {
            let mut p: Vec<Complex64> = coeffs.iter().map(|&x| c(x as f64, 0.0)).collect();
            p[8] = c(1.0, 0.0);
            prop_assume!(p[0].norm() > 0.0);
            let roots = roots_complex(&p).unwrap();
            prop_assume!(roots.iter().all(|r| (r.norm() - radius).abs() > 1e-3));
            let want = roots.iter().filter(|r| r.norm() < radius).count() as i64;
            prop_assert_eq!(count_zeros_disk(&p, radius).unwrap().winding, want);
        }
    }
}

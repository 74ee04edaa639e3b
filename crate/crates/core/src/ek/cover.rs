use std::collections::{BTreeSet, HashMap};
use std::f64::consts::TAU;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reconstruct::{predict_k, theta_ball, CoverBall};
use super::sequence::split_nearest;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ifs::RegionH;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumerationParams {
    pub region: RegionH,
    #[serde(rename = "N")]
    pub n: usize,
    pub delta: f64,
    /// Error threshold of the counting property.
    pub rho: f64,
    /// Branch width: integers tried when a token is spent.
    pub m: u64,
    /// Grid points per axis for `Re theta`, `Im theta`, `|t|` and `arg t`
    /// when seeding initial windows.
    pub seed_grid: usize,
    pub c4_hat: f64,
}

impl EnumerationParams {
    pub fn tokens(&self) -> usize {
        (self.delta * self.n as f64).floor() as usize
    }

    fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(Error::param("N", "must be at least 8"));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::param("delta", "must lie in [0, 1)"));
        }
        if !(self.rho > 0.0 && self.rho < 0.5) {
            return Err(Error::param("rho", "must lie in (0, 1/2)"));
        }
        if self.m < 1 {
            return Err(Error::param("M", "must be at least 1"));
        }
        if self.seed_grid < 2 {
            return Err(Error::param("seed_grid", "must be at least 2"));
        }
        if !(self.c4_hat > 0.0) {
            return Err(Error::param("c4_hat", "must be positive"));
        }
        Ok(())
    }
}

/// Output of [`enumerate_covers`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverEnumeration {
    pub params: EnumerationParams,
    pub balls: Vec<CoverBall>,
    pub seeds: usize,
    pub nodes: u64,
    pub leaves: u64,
    /// Chains abandoned because the predictor or `Psi` was undefined.
    pub dead_chains: u64,
    /// Set when the node budget ran out; the ball list is then partial.
    pub truncated: bool,
    /// Live nodes per sequence length (index = number of integers known).
    pub counts_per_depth: Vec<u64>,
    /// Leaves by number of branch tokens spent.
    pub token_histogram: Vec<u64>,
}

impl CoverEnumeration {
    /// Run metadata without the ball list.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "params": self.params,
            "ball_count": self.balls.len(),
            "seeds": self.seeds,
            "nodes": self.nodes,
            "leaves": self.leaves,
            "dead_chains": self.dead_chains,
            "truncated": self.truncated,
            "counts_per_depth": self.counts_per_depth,
            "token_histogram": self.token_histogram,
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "re,im,radius,N")?;
        for b in &self.balls {
            writeln!(out, "{:e},{:e},{:e},{}", b.center.re, b.center.im, b.radius, b.n)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn seed_windows(params: &EnumerationParams) -> BTreeSet<[i64; 5]> {
    let g = params.seed_grid;
    let (re_min, re_max, im_min, im_max) = params.region.bounding_box();
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (g - 1) as f64;
    let b2 = params.region.b2();
    let windows: Vec<[i64; 5]> = (0..g * g)
        .into_par_iter()
        .flat_map_iter(|ij| {
            let theta = Complex64::new(step(re_min, re_max, ij / g), step(im_min, im_max, ij % g));
            let mut out = Vec::new();
            if params.region.contains(theta) {
                for a in 0..g {
                    for b in 0..g {
                        let t = Complex64::from_polar(step(1.0, b2, a), TAU * b as f64 / g as f64);
                        let mut z = t;
                        let mut w = [0i64; 5];
                        for slot in w.iter_mut() {
                            z *= theta;
                            *slot = split_nearest(z.re).0;
                        }
                        out.push(w);
                    }
                }
            }
            out.into_iter()
        })
        .collect();
    windows.into_iter().collect()
}

fn nearest_integers(p: f64, m: u64) -> Vec<i64> {
    let f = p.floor() as i64;
    let span = m as i64 + 1;
    let mut cands: Vec<i64> = (f - span..=f + span).collect();
    cands.sort_by(|a, b| {
        (*a as f64 - p)
            .abs()
            .total_cmp(&(*b as f64 - p).abs())
            .then(a.cmp(b))
    });
    cands.truncate(m as usize);
    cands
}

struct Walker<'a> {
    params: &'a EnumerationParams,
    cap: u64,
    nodes: &'a AtomicU64,
}

#[derive(Default)]
struct WalkOut {
    balls: Vec<CoverBall>,
    leaves: u64,
    dead: u64,
    exceeded: bool,
    depth: Vec<u64>,
    tokens: Vec<u64>,
}

impl Walker<'_> {
    fn walk(&self, seq: &mut Vec<i64>, tokens_left: usize, out: &mut WalkOut) {
        if out.exceeded {
            return;
        }
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.cap {
            out.exceeded = true;
            return;
        }
        out.depth[seq.len()] += 1;
        let n = self.params.n;
        let len = seq.len();
        let last5: [i64; 5] = seq[len - 5..].try_into().unwrap();
        if len == n + 1 {
            match theta_ball(&last5, self.params.region.b1(), n, self.params.c4_hat) {
                Ok(ball) => {
                    out.leaves += 1;
                    out.tokens[self.params.tokens() - tokens_left] += 1;
                    out.balls.push(ball);
                }
                Err(_) => out.dead += 1,
            }
            return;
        }
        let p = match predict_k(&last5) {
            Ok(p) if p.is_finite() && p.abs() < 1e15 => p,
            _ => {
                out.dead += 1;
                return;
            }
        };
        let rounded = split_nearest(p).0;
        seq.push(rounded);
        self.walk(seq, tokens_left, out);
        seq.pop();
        if tokens_left > 0 {
            for k in nearest_integers(p, self.params.m) {
                if k == rounded {
                    continue;
                }
                seq.push(k);
                self.walk(seq, tokens_left - 1, out);
                seq.pop();
                if out.exceeded {
                    return;
                }
            }
        }
    }
}

/// Enumerates candidate integer sequences `K_1..K_{N+1}` and returns the
/// balls `B(Psi(K_{N-3..N+1}), C4_hat b1^{-N})` they produce.
///
/// Initial windows `K_1..K_5` come from a `(theta, t)` grid over the region
/// and `|t| in [1, b2]`, deduplicated. Each later integer is the rounded
/// prediction, or, spending one of `floor(delta N)` tokens, one of the `M`
/// integers nearest the prediction. Balls whose centres lie within half a
/// radius of an earlier (in sorted order) centre are merged.
pub fn enumerate_covers(params: &EnumerationParams, budget: Budget) -> Result<CoverEnumeration> {
    params.validate()?;
    let seeds: Vec<[i64; 5]> = seed_windows(params).into_iter().collect();
    let nodes = AtomicU64::new(0);
    let walker = Walker { params, cap: budget.get(), nodes: &nodes };
    let tokens = params.tokens();
    let outs: Vec<WalkOut> = seeds
        .par_iter()
        .map(|w| {
            let mut out = WalkOut {
                depth: vec![0; params.n + 2],
                tokens: vec![0; tokens + 1],
                ..Default::default()
            };
            let mut seq = w.to_vec();
            walker.walk(&mut seq, tokens, &mut out);
            out
        })
        .collect();

    let mut all = Vec::new();
    let mut counts_per_depth = vec![0; params.n + 2];
    let mut token_histogram = vec![0; tokens + 1];
    let (mut leaves, mut dead, mut truncated) = (0, 0, false);
    for o in outs {
        all.extend(o.balls);
        leaves += o.leaves;
        dead += o.dead;
        truncated |= o.exceeded;
        counts_per_depth.iter_mut().zip(&o.depth).for_each(|(a, b)| *a += b);
        token_histogram.iter_mut().zip(&o.tokens).for_each(|(a, b)| *a += b);
    }
    all.sort_by(|a, b| {
        a.center
            .re
            .total_cmp(&b.center.re)
            .then(a.center.im.total_cmp(&b.center.im))
            .then(a.source_k.cmp(&b.source_k))
    });
    let balls = dedup_balls(all);
    Ok(CoverEnumeration {
        params: *params,
        balls,
        seeds: seeds.len(),
        nodes: nodes.load(Ordering::Relaxed).min(budget.get()),
        leaves,
        dead_chains: dead,
        truncated,
        counts_per_depth,
        token_histogram,
    })
}

fn dedup_balls(sorted: Vec<CoverBall>) -> Vec<CoverBall> {
    let Some(first) = sorted.first() else {
        return sorted;
    };
    let gap = 0.5 * first.radius;
    let cell = |z: Complex64| ((z.re / gap).floor() as i64, (z.im / gap).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut kept: Vec<CoverBall> = Vec::new();
    for b in sorted {
        let (cx, cy) = cell(b.center);
        let near = (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                grid.get(&(cx + dx, cy + dy))
                    .is_some_and(|v| v.iter().any(|&i| (kept[i].center - b.center).norm() <= gap))
            })
        });
        if !near {
            grid.entry((cx, cy)).or_default().push(kept.len());
            kept.push(b);
        }
    }
    kept
}

/// Counting property: at most `floor(delta N)` indices `n <= N` with
/// `|eps_n| > rho`.
pub fn qualifies(theta: Complex64, t: Complex64, n: usize, rho: f64, delta: f64) -> bool {
    let allowed = (delta * n as f64).floor() as usize;
    let mut z = t;
    let mut bad = 0;
    for _ in 0..n {
        z *= theta;
        if (z.re - z.re.round_ties_even()).abs() > rho {
            bad += 1;
            if bad > allowed {
                return false;
            }
        }
    }
    true
}

/// Result of [`soundness_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub grid: usize,
    pub points_in_region: u64,
    /// Grid points for which some sampled `t` satisfies the counting property.
    pub qualifying: u64,
    /// Qualifying points not within `slack * radius` of any ball centre.
    pub violations: u64,
    pub slack: f64,
    pub t_moduli: usize,
    pub t_angles: usize,
}

/// Scans a `grid x grid` lattice over the region's bounding box. A point
/// qualifies when some `t` on a `t_moduli x t_angles` polar grid with
/// `|t| in [1, |theta|]` satisfies [`qualifies`]; every qualifying point must lie
/// within `slack` radii of a ball.
pub fn soundness_scan(
    params: &EnumerationParams,
    balls: &[CoverBall],
    grid: usize,
    t_moduli: usize,
    t_angles: usize,
    slack: f64,
) -> Result<SoundnessReport> {
    if grid < 2 || t_moduli < 1 || t_angles < 1 {
        return Err(Error::param("grid", "need grid >= 2 and nonempty t grid"));
    }
    let (re_min, re_max, im_min, im_max) = params.region.bounding_box();
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (grid - 1) as f64;
    let (in_region, qualifying, violations) = (0..grid * grid)
        .into_par_iter()
        .map(|ij| {
            let theta = Complex64::new(step(re_min, re_max, ij / grid), step(im_min, im_max, ij % grid));
            if !params.region.contains(theta) {
                return (0u64, 0u64, 0u64);
            }
            let found = (0..t_moduli).any(|a| {
                let modulus = if t_moduli == 1 {
                    1.0
                } else {
                    1.0 + (theta.norm() - 1.0) * a as f64 / (t_moduli - 1) as f64
                };
                (0..t_angles).any(|b| {
                    let t = Complex64::from_polar(modulus, TAU * b as f64 / t_angles as f64);
                    qualifies(theta, t, params.n, params.rho, params.delta)
                })
            });
            if !found {
                return (1, 0, 0);
            }
            let covered = balls.iter().any(|b| (b.center - theta).norm() <= slack * b.radius);
            (1, 1, u64::from(!covered))
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(SoundnessReport {
        grid,
        points_in_region: in_region,
        qualifying,
        violations,
        slack,
        t_moduli,
        t_angles,
    })
}

/// Forward check used by tests: does the chain of the true sequence survive
/// the enumerator's rules? Returns the ball of the true window when it does.
#[cfg(test)]
pub(crate) fn true_ball(theta: Complex64, t: Complex64, params: &EnumerationParams) -> Option<CoverBall> {
    let seq = super::sequence::ek_sequence(theta, t, params.n + 1).ok()?;
    theta_ball(&seq.window5(params.n - 3), params.region.b1(), params.n, params.c4_hat).ok()
}

//! Small regression helpers shared by the diagnostics.

use serde::{Deserialize, Serialize};

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

/// Fits a line through the points; `None` with fewer than two distinct `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs[..n].iter().zip(&ys[..n]).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs[..n]
        .iter()
        .zip(&ys[..n])
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Some(LineFit { slope, intercept, rms })
}

/// Common slope of several series, each allowed its own intercept
/// (within-group least squares).
pub fn pooled_slope(groups: &[(Vec<f64>, Vec<f64>)]) -> Option<f64> {
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xs, ys) in groups {
        let n = xs.len().min(ys.len());
        if n < 2 {
            continue;
        }
        let mx = xs[..n].iter().sum::<f64>() / n as f64;
        let my = ys[..n].iter().sum::<f64>() / n as f64;
        for (x, y) in xs[..n].iter().zip(&ys[..n]) {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
        }
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

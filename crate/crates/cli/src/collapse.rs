//! Interpolation of `eta(gamma)` curves onto a shared grid and the pairwise
//! collapse metric.

use crate::CliError;

/// `eta` at `gamma` by linear interpolation of `ln eta`; `None` outside the
/// sampled range. `curve` must be sorted by `gamma`; points with
/// non-positive or non-finite `eta` are ignored.
pub fn interpolate(curve: &[(f64, f64)], gamma: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .copied()
        .filter(|(g, e)| g.is_finite() && e.is_finite() && *e > 0.0)
        .collect();
    let first = pts.first()?;
    let last = pts.last()?;
    if gamma < first.0 || gamma > last.0 {
        return None;
    }
    let k = pts.partition_point(|(g, _)| *g < gamma);
    if k < pts.len() && pts[k].0 == gamma {
        return Some(pts[k].1);
    }
    let (g0, e0) = pts[k - 1];
    let (g1, e1) = pts[k];
    let f = (gamma - g0) / (g1 - g0);
    Some((e0.ln() + f * (e1.ln() - e0.ln())).exp())
}

pub fn gamma_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    let step = (max - min) / (points - 1) as f64;
    (0..points).map(|k| min + step * k as f64).collect()
}

/// Every curve interpolated onto `grid`; errors when one does not cover it.
pub fn resample(curves: &[(String, Vec<(f64, f64)>)], grid: &[f64]) -> Result<Vec<Vec<f64>>, CliError> {
    curves
        .iter()
        .map(|(id, c)| {
            grid.iter()
                .map(|&g| {
                    interpolate(c, g).ok_or_else(|| {
                        CliError::Runtime(format!("scan {id} does not cover gamma = {g:.3} (insufficient overlap)"))
                    })
                })
                .collect()
        })
        .collect()
}

/// Largest `max/min - 1` over all curve pairs and grid points: 0 for
/// identical curves, 0.5 for a factor 1.5.
pub fn collapse_metric(resampled: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in resampled.iter().enumerate() {
        for b in &resampled[i + 1..] {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max(x.max(*y) / x.min(*y) - 1.0);
            }
        }
    }
    worst
}

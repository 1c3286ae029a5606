//! FAR/FRR curves, EER, HTER, ROC and quartile grouping.
//!
//! A test sample is accepted when its dissimilarity score is `<= threshold`.

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub thresholds: Vec<f64>,
    pub far: Vec<f64>,
    pub frr: Vec<f64>,
}

fn sorted(scores: &[f64]) -> Result<Vec<f64>, EvalError> {
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let mut v = scores.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Every distinct score plus the midpoint between each adjacent pair.
pub fn threshold_grid(scores: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = scores.iter().copied().filter(|s| s.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mut grid = Vec::with_capacity(v.len() * 2);
    for (i, s) in v.iter().enumerate() {
        if i > 0 {
            let mid = v[i - 1] + (s - v[i - 1]) / 2.0;
            if mid > v[i - 1] && mid < *s {
                grid.push(mid);
            }
        }
        grid.push(*s);
    }
    grid
}

/// Evenly spaced (by index) subset of an ascending grid, endpoints kept.
pub fn subsample_grid(grid: &[f64], max_points: usize) -> Vec<f64> {
    if grid.len() <= max_points || max_points < 2 {
        return grid.to_vec();
    }
    let last = grid.len() - 1;
    let mut out: Vec<f64> = (0..max_points)
        .map(|k| grid[k * last / (max_points - 1)])
        .collect();
    out.dedup();
    out
}

/// Fraction of imposter scores `<= t` for each threshold.
pub fn far_curve(imposter: &[f64], thresholds: &[f64]) -> Result<Vec<f64>, EvalError> {
    if imposter.is_empty() {
        return Err(EvalError::EmptyScores);
    }
    let s = sorted(imposter)?;
    let n = s.len() as f64;
    Ok(thresholds
        .iter()
        .map(|t| s.partition_point(|v| v <= t) as f64 / n)
        .collect())
}

/// Fraction of genuine scores `> t` for each threshold.
pub fn frr_curve(genuine: &[f64], thresholds: &[f64]) -> Result<Vec<f64>, EvalError> {
    if genuine.is_empty() {
        return Err(EvalError::EmptyScores);
    }
    let s = sorted(genuine)?;
    let n = s.len() as f64;
    Ok(thresholds
        .iter()
        .map(|t| (s.len() - s.partition_point(|v| v <= t)) as f64 / n)
        .collect())
}

pub fn far_frr(
    genuine: &[f64],
    imposter: &[f64],
    thresholds: &[f64],
) -> Result<ErrorCurve, EvalError> {
    let mut thresholds = thresholds.to_vec();
    thresholds.sort_by(f64::total_cmp);
    Ok(ErrorCurve {
        far: far_curve(imposter, &thresholds)?,
        frr: frr_curve(genuine, &thresholds)?,
        thresholds,
    })
}

/// Equal error rate: the point where `FAR - FRR` changes sign, linearly
/// interpolated between the bracketing thresholds. Returns
/// `(threshold, rate)`.
pub fn eer(curve: &ErrorCurve) -> Result<(f64, f64), EvalError> {
    let diff = |k: usize| curve.far[k] - curve.frr[k];
    let k = (0..curve.thresholds.len())
        .find(|&k| diff(k) >= 0.0)
        .ok_or(EvalError::NoCrossing)?;
    if diff(k) == 0.0 {
        return Ok((curve.thresholds[k], curve.far[k]));
    }
    if k == 0 {
        return Err(EvalError::NoCrossing);
    }
    let (d0, d1) = (diff(k - 1), diff(k));
    let alpha = -d0 / (d1 - d0);
    let t = curve.thresholds[k - 1] + alpha * (curve.thresholds[k] - curve.thresholds[k - 1]);
    let rate = curve.far[k - 1] + alpha * (curve.far[k] - curve.far[k - 1]);
    Ok((t, rate))
}

/// Half total error rate.
pub fn hter(far: f64, frr: f64) -> Result<f64, EvalError> {
    for r in [far, frr] {
        if !(0.0..=1.0).contains(&r) {
            return Err(EvalError::OutOfRange(r));
        }
    }
    Ok((far + frr) / 2.0)
}

/// ROC staircase `(FAR, 1 - FRR)` swept over every distinct score, starting
/// at `(0, 0)` below the lowest score.
pub fn roc(genuine: &[f64], imposter: &[f64]) -> Result<Vec<(f64, f64)>, EvalError> {
    if genuine.is_empty() || imposter.is_empty() {
        return Err(EvalError::EmptyScores);
    }
    let mut all: Vec<f64> = genuine.iter().chain(imposter).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let far = far_curve(imposter, &all)?;
    let frr = frr_curve(genuine, &all)?;
    let mut points = vec![(0.0, 0.0)];
    points.extend(far.into_iter().zip(frr).map(|(a, r)| (a, 1.0 - r)));
    Ok(points)
}

/// Templates split into four groups by quality score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartileGroups {
    /// Template indices per group, lowest quality first.
    pub groups: [Vec<usize>; 4],
    /// True when ties left some group empty.
    pub tied: bool,
}

/// Quartile boundaries are the scores at the end of each quarter of the
/// sorted order; a template goes to the first group whose boundary is not
/// below its score, so tied scores always share the lower group.
pub fn quartile_groups(quality: &[f64]) -> Result<QuartileGroups, EvalError> {
    let n = quality.len();
    if n < 4 {
        return Err(EvalError::TooFewTemplates(n));
    }
    if quality.iter().any(|q| q.is_nan()) {
        return Err(EvalError::NonFinite);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| quality[a].total_cmp(&quality[b]).then(a.cmp(&b)));
    let boundary = |q: usize| quality[order[(q * n).div_ceil(4) - 1]];
    let bounds = [boundary(1), boundary(2), boundary(3)];
    let mut groups: [Vec<usize>; 4] = Default::default();
    for &i in &order {
        let g = bounds.iter().position(|b| quality[i] <= *b).unwrap_or(3);
        groups[g].push(i);
    }
    let tied = groups.iter().any(Vec::is_empty);
    Ok(QuartileGroups { groups, tied })
}

/// Mean of per-template rate curves over the members of a group. Members
/// without a curve are skipped; `None` if none remain.
pub fn group_mean(members: &[usize], curves: &[Option<Vec<f64>>]) -> Option<Vec<f64>> {
    let present: Vec<&Vec<f64>> = members.iter().filter_map(|&i| curves[i].as_ref()).collect();
    let first = present.first()?;
    let mut out = vec![0.0; first.len()];
    for c in &present {
        for (o, v) in out.iter_mut().zip(c.iter()) {
            *o += v;
        }
    }
    let n = present.len() as f64;
    Some(out.into_iter().map(|v| v / n).collect())
}

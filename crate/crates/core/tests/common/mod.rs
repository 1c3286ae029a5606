#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sigqual::features::FeatureVector;
use sigqual::ingest::{PenPoint, SampleLabel, SignatureSample};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random walk with occasional pen lifts, optional pressure.
pub fn random_sample(rng: &mut ChaCha8Rng, pressure: bool) -> SignatureSample {
    let n = rng.random_range(6..120);
    let (mut x, mut y) = (rng.random_range(-500..500), rng.random_range(-500..500));
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let pen_down = i < 2 || rng.random_bool(0.9);
        points.push(PenPoint {
            x,
            y,
            t: i as i64 * 10,
            pressure: pressure.then(|| rng.random_range(0..=1023)),
            pen_down,
        });
        x += rng.random_range(-40..=40);
        y += rng.random_range(-40..=40);
    }
    // guarantee at least two pen-down vectors
    for p in points.iter_mut().take(3) {
        p.pen_down = true;
    }
    SignatureSample::new(points, "r", 1, SampleLabel::Genuine).unwrap()
}

/// Random relative-frequency feature vector with some empty bins.
pub fn random_features(
    rng: &mut ChaCha8Rng,
    speed_bins: usize,
    angle_bins: usize,
) -> FeatureVector {
    let mut hist = |len: usize| -> Vec<f64> {
        let counts: Vec<u32> = (0..len)
            .map(|_| {
                if rng.random_bool(0.4) {
                    rng.random_range(0..6)
                } else {
                    0
                }
            })
            .collect();
        let total: u32 = counts.iter().sum::<u32>().max(1);
        counts
            .iter()
            .map(|&c| f64::from(c) / f64::from(total))
            .collect()
    };
    let sa = speed_bins * angle_bins;
    FeatureVector {
        speed_bins,
        angle_bins,
        sa_first: hist(sa),
        sa_second: hist(sa),
        pr_first: Some(hist(16)),
        pr_second: Some(hist(16)),
        len_first: 10,
        len_second: 10,
    }
}

/// Naive EMD: two nested loops over speed and angle indices.
pub fn naive_emd(h: &[f64], m: usize, n: usize) -> Option<f64> {
    let at = |i: usize, j: usize| h[i * n + j];
    let (mut bi, mut bj) = (0, 0);
    for i in 0..m {
        for j in 0..n {
            if at(i, j) > at(bi, bj) {
                bi = i;
                bj = j;
            }
        }
    }
    if at(bi, bj) <= 0.0 {
        return None;
    }
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..n {
            let di = i as f64 - bi as f64;
            let dj = j as f64 - bj as f64;
            total += at(i, j) * (di * di / m as f64 + dj * dj / n as f64).sqrt();
        }
    }
    Some(total)
}

/// Minimum-cost warping path by exhaustive enumeration, divided by the
/// shorter length.
pub fn brute_force_dtw(a: &[[f64; 4]], b: &[[f64; 4]]) -> f64 {
    fn cost(a: &[f64; 4], b: &[f64; 4]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(u, v)| (u - v).powi(2))
            .sum::<f64>()
            .sqrt()
    }
    fn walk(a: &[[f64; 4]], b: &[[f64; 4]], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + cost(&a[i], &b[j]);
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best / a.len().min(b.len()) as f64
}

/// Straightforward Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// 1-based ranks of tie-free data.
pub fn plain_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| 1.0 + v.iter().filter(|b| *b < a).count() as f64)
        .collect()
}

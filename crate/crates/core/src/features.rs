//! Histogram features of a signature.
//!
//! A sample is reduced to its drawing vectors (displacements between
//! consecutive pen-down points of the same stroke). The vectors are split by
//! index into a first and second half, and each half yields a 2-D
//! speed × angle relative-frequency histogram and, when the device reports
//! pressure, a pressure histogram.
//!
//! Speed is relative: a vector's displacement magnitude divided by the mean
//! non-zero magnitude of the sample, which makes the features invariant to
//! uniform spatial scaling. Speeds and angle positions are snapped to a
//! 2⁻³² grid before binning so that values mathematically equal to a bin
//! edge (straight strokes, axis-aligned moves) bin identically regardless of
//! floating-point rounding in the magnitude and `atan2` computations.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::SignatureSample;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("sample yields {0} drawing vectors, need at least {1}")]
    SampleTooShort(usize, usize),
    #[error("histogram spec requires pressure but the sample has none")]
    MissingPressure,
    #[error("invalid histogram spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    /// Relative-speed bin boundaries; `speed_edges.len() + 1` speed bins.
    pub speed_edges: Vec<f64>,
    pub angle_bins: usize,
    pub pressure_bins: usize,
    /// Device full-scale pressure used to normalise pressure into [0, 1].
    pub pressure_max: u32,
    /// Divide displacement by the timestamp delta before normalising.
    pub use_time_delta: bool,
    pub require_pressure: bool,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        HistogramSpec {
            speed_edges: vec![0.5, 1.0, 2.0],
            angle_bins: 16,
            pressure_bins: 16,
            pressure_max: crate::ingest::DEFAULT_PRESSURE_MAX,
            use_time_delta: false,
            require_pressure: false,
        }
    }
}

impl HistogramSpec {
    pub fn speed_bins(&self) -> usize {
        self.speed_edges.len() + 1
    }

    pub fn speed_angle_len(&self) -> usize {
        self.speed_bins() * self.angle_bins
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |m: String| Err(FeatureError::InvalidSpec(m));
        if self.speed_bins() < 2 {
            return bad("need at least 2 speed bins".into());
        }
        if self.angle_bins < 4 {
            return bad(format!("angle_bins must be >= 4, got {}", self.angle_bins));
        }
        if self.pressure_bins < 2 {
            return bad(format!(
                "pressure_bins must be >= 2, got {}",
                self.pressure_bins
            ));
        }
        if self.pressure_max == 0 {
            return bad("pressure_max must be positive".into());
        }
        if self
            .speed_edges
            .iter()
            .any(|e| !(e.is_finite() && *e > 0.0))
        {
            return bad("speed edges must be finite and positive".into());
        }
        if self.speed_edges.windows(2).any(|w| w[0] >= w[1]) {
            return bad("speed edges must be strictly increasing".into());
        }
        Ok(())
    }

    fn speed_bin(&self, speed: f64) -> usize {
        self.speed_edges.partition_point(|e| *e <= speed)
    }

    fn angle_bin(&self, angle: f64) -> usize {
        let pos = snap((angle + PI) / TAU * self.angle_bins as f64);
        (pos.floor() as usize) % self.angle_bins
    }

    fn pressure_bin(&self, pressure: i64) -> usize {
        let max = i64::from(self.pressure_max);
        let p = pressure.clamp(0, max);
        ((p * self.pressure_bins as i64 / max) as usize).min(self.pressure_bins - 1)
    }
}

const SNAP: f64 = 4_294_967_296.0;

fn snap(v: f64) -> f64 {
    (v * SNAP).round() / SNAP
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrawingVector {
    pub dx: f64,
    pub dy: f64,
    /// Relative speed, >= 0.
    pub speed: f64,
    /// Radians in [-π, π).
    pub angle: f64,
    /// Pressure at the vector's end point, when the device reports it.
    pub pressure: Option<i64>,
}

/// Drawing vectors of every pen-down stroke, in order. No vector spans a pen
/// lift. Timestamps are ignored for speed unless `use_time_delta` is set.
pub fn drawing_vectors_with(
    sample: &SignatureSample,
    use_time_delta: bool,
) -> Result<Vec<DrawingVector>, FeatureError> {
    let pts = sample.points();
    let mut raw: Vec<(i64, i64, f64, Option<i64>)> = Vec::with_capacity(pts.len());
    for pair in pts.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if !(a.pen_down && b.pen_down) {
            continue;
        }
        let dx = b.x - a.x;
        let dy = b.y - a.y;
        let mut magnitude = ((dx as f64).powi(2) + (dy as f64).powi(2)).sqrt();
        if use_time_delta {
            magnitude /= (b.t - a.t).max(1) as f64;
        }
        raw.push((dx, dy, magnitude, b.pressure));
    }
    if raw.is_empty() {
        return Err(FeatureError::SampleTooShort(0, 1));
    }

    let (sum, count) = raw
        .iter()
        .filter(|r| r.2 > 0.0)
        .fold((0.0, 0usize), |(s, c), r| (s + r.2, c + 1));
    let mean = if count > 0 { sum / count as f64 } else { 0.0 };

    Ok(raw
        .into_iter()
        .map(|(dx, dy, magnitude, pressure)| {
            let (dx, dy) = (dx as f64, dy as f64);
            let speed = if mean > 0.0 {
                snap(magnitude / mean)
            } else {
                0.0
            };
            let mut angle = dy.atan2(dx);
            if angle >= PI {
                angle = -PI;
            }
            DrawingVector {
                dx,
                dy,
                speed,
                angle,
                pressure,
            }
        })
        .collect())
}

pub fn drawing_vectors(sample: &SignatureSample) -> Result<Vec<DrawingVector>, FeatureError> {
    drawing_vectors_with(sample, false)
}

/// Relative-frequency histograms of one sample. Speed-angle histograms are
/// flattened row-major: index `speed_bin * angle_bins + angle_bin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub speed_bins: usize,
    pub angle_bins: usize,
    pub sa_first: Vec<f64>,
    pub sa_second: Vec<f64>,
    pub pr_first: Option<Vec<f64>>,
    pub pr_second: Option<Vec<f64>>,
    pub len_first: usize,
    pub len_second: usize,
}

impl FeatureVector {
    pub fn has_pressure(&self) -> bool {
        self.pr_first.is_some()
    }

    pub fn speed_angle_len(&self) -> usize {
        self.speed_bins * self.angle_bins
    }

    pub fn pressure_len(&self) -> usize {
        self.pr_first.as_ref().map_or(0, Vec::len)
    }

    /// Total number of features in [`FeatureVector::flat`].
    pub fn len(&self) -> usize {
        2 * self.speed_angle_len() + 2 * self.pressure_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All features in documented order: first-half speed-angle, second-half
    /// speed-angle, first-half pressure, second-half pressure.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.sa_first);
        out.extend_from_slice(&self.sa_second);
        if let (Some(a), Some(b)) = (&self.pr_first, &self.pr_second) {
            out.extend_from_slice(a);
            out.extend_from_slice(b);
        }
        out
    }

    /// Both speed-angle halves, concatenated.
    pub fn speed_angle_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.speed_angle_len());
        out.extend_from_slice(&self.sa_first);
        out.extend_from_slice(&self.sa_second);
        out
    }

    /// Column names matching [`FeatureVector::flat`].
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.len());
        for half in 1..=2 {
            for s in 0..self.speed_bins {
                for a in 0..self.angle_bins {
                    names.push(format!("sa{half}_s{s}_a{a}"));
                }
            }
        }
        for half in 1..=2 {
            for p in 0..self.pressure_len() {
                names.push(format!("pr{half}_{p}"));
            }
        }
        names
    }
}

fn normalise(counts: Vec<usize>, total: usize) -> Vec<f64> {
    counts
        .into_iter()
        .map(|c| {
            if total > 0 {
                c as f64 / total as f64
            } else {
                0.0
            }
        })
        .collect()
}

/// Extracts the first/second-half histograms.
pub fn extract_features(
    sample: &SignatureSample,
    spec: &HistogramSpec,
) -> Result<FeatureVector, FeatureError> {
    spec.validate()?;
    if spec.require_pressure && !sample.has_pressure() {
        return Err(FeatureError::MissingPressure);
    }
    let vectors = match drawing_vectors_with(sample, spec.use_time_delta) {
        Ok(v) => v,
        Err(_) => return Err(FeatureError::SampleTooShort(0, 2)),
    };
    if vectors.len() < 2 {
        return Err(FeatureError::SampleTooShort(vectors.len(), 2));
    }
    let (first, second) = vectors.split_at(vectors.len() / 2);
    let with_pressure = sample.has_pressure();

    let speed_angle = |half: &[DrawingVector]| {
        let mut counts = vec![0usize; spec.speed_angle_len()];
        for v in half {
            counts[spec.speed_bin(v.speed) * spec.angle_bins + spec.angle_bin(v.angle)] += 1;
        }
        normalise(counts, half.len())
    };
    let pressure = |half: &[DrawingVector]| {
        let mut counts = vec![0usize; spec.pressure_bins];
        for v in half {
            if let Some(p) = v.pressure {
                counts[spec.pressure_bin(p)] += 1;
            }
        }
        normalise(counts, half.len())
    };

    Ok(FeatureVector {
        speed_bins: spec.speed_bins(),
        angle_bins: spec.angle_bins,
        sa_first: speed_angle(first),
        sa_second: speed_angle(second),
        pr_first: with_pressure.then(|| pressure(first)),
        pr_second: with_pressure.then(|| pressure(second)),
        len_first: first.len(),
        len_second: second.len(),
    })
}

/// CSV with one row per sample: `user_id,session,label` followed by the bin
/// values in [`FeatureVector::flat`] order.
pub fn features_csv(rows: &[(&SignatureSample, &FeatureVector)]) -> String {
    let mut out = String::new();
    let Some((_, first)) = rows.first() else {
        return "user_id,session,label\n".into();
    };
    out.push_str("user_id,session,label");
    for name in first.feature_names() {
        out.push(',');
        out.push_str(&name);
    }
    out.push('\n');
    for (sample, fv) in rows {
        let _ = write!(
            out,
            "{},{},{}",
            sample.user_id,
            sample.session_id,
            sample.label.as_str()
        );
        for v in fv.flat() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

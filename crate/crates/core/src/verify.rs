//! Dissimilarity verifiers. Every score is `>= 0` and lower means more
//! similar.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;
use crate::ingest::{KeystrokeSample, SignatureSample};
use crate::quality::{QualityError, Template};

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("feature count mismatch: template has {expected}, test has {found}")]
    FeatureCountMismatch { expected: usize, found: usize },
    #[error("sample has {0} pen-down points, need at least 2")]
    SampleTooShort(usize),
    #[error(transparent)]
    Quality(#[from] QualityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifierKind {
    Histogram,
    Dtw,
    KeystrokeEuclidean,
}

impl VerifierKind {
    pub fn modality(self) -> crate::ingest::Modality {
        match self {
            VerifierKind::Histogram | VerifierKind::Dtw => crate::ingest::Modality::Signature,
            VerifierKind::KeystrokeEuclidean => crate::ingest::Modality::Keystroke,
        }
    }
}

/// Enrol/score pair over one sample representation.
pub trait Verifier: Sync {
    type Sample: Sync;
    type Template: Send + Sync;

    fn enroll(
        &self,
        user_id: &str,
        samples: &[&Self::Sample],
    ) -> Result<Self::Template, VerifyError>;
    fn score(&self, template: &Self::Template, test: &Self::Sample) -> Result<f64, VerifyError>;
}

// ---------------------------------------------------------------------------
// histogram verifier

/// Builds the template (mean, quantisation vector `Q`, quantised mean).
pub fn histogram_enroll(
    user_id: &str,
    features: &[FeatureVector],
) -> Result<Template, VerifyError> {
    if features.len() < 2 {
        return Err(VerifyError::TooFewSamples {
            needed: 2,
            got: features.len(),
        });
    }
    Ok(Template::enroll(user_id, features)?)
}

/// Manhattan distance between the quantised template mean and the test
/// vector quantised by the same `Q`.
pub fn histogram_score(template: &Template, test: &FeatureVector) -> Result<f64, VerifyError> {
    let flat = test.flat();
    if flat.len() != template.feature_count() || test.speed_bins != template.speed_bins {
        return Err(VerifyError::FeatureCountMismatch {
            expected: template.feature_count(),
            found: flat.len(),
        });
    }
    Ok(template
        .quantized_mean
        .iter()
        .zip(&template.quantization)
        .zip(&flat)
        .map(|((tq, q), f)| (tq - f / q).abs())
        .sum())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HistogramVerifier;

impl Verifier for HistogramVerifier {
    type Sample = FeatureVector;
    type Template = Template;

    fn enroll(&self, user_id: &str, samples: &[&FeatureVector]) -> Result<Template, VerifyError> {
        let owned: Vec<FeatureVector> = samples.iter().map(|s| (*s).clone()).collect();
        histogram_enroll(user_id, &owned)
    }

    fn score(&self, template: &Template, test: &FeatureVector) -> Result<f64, VerifyError> {
        histogram_score(template, test)
    }
}

// ---------------------------------------------------------------------------
// DTW verifier

/// 4-D frames `(x - x0, y - y0, dx, dy)` over the pen-down points. The last
/// frame repeats the previous derivative.
pub fn dtw_frames(sample: &SignatureSample) -> Result<Vec<[f64; 4]>, VerifyError> {
    let pts: Vec<_> = sample.points().iter().filter(|p| p.pen_down).collect();
    if pts.len() < 2 {
        return Err(VerifyError::SampleTooShort(pts.len()));
    }
    let (x0, y0) = (pts[0].x, pts[0].y);
    let n = pts.len();
    Ok((0..n)
        .map(|i| {
            let k = if i + 1 < n { i } else { i - 1 };
            [
                (pts[i].x - x0) as f64,
                (pts[i].y - y0) as f64,
                (pts[k + 1].x - pts[k].x) as f64,
                (pts[k + 1].y - pts[k].y) as f64,
            ]
        })
        .collect())
}

fn frame_cost(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

/// Unconstrained DTW over frame sequences with steps (1,0), (0,1), (1,1),
/// normalised by the shorter length.
pub fn dtw_frames_distance(a: &[[f64; 4]], b: &[[f64; 4]]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        curr[0] = f64::INFINITY;
        for j in 1..=m {
            let best = prev[j - 1].min(prev[j]).min(curr[j - 1]);
            curr[j] = frame_cost(&a[i - 1], &b[j - 1]) + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[m] / n.min(m) as f64
}

pub fn dtw_distance(a: &SignatureSample, b: &SignatureSample) -> Result<f64, VerifyError> {
    Ok(dtw_frames_distance(&dtw_frames(a)?, &dtw_frames(b)?))
}

/// Floor for the mean pairwise enrolled distance.
pub const DTW_DENOMINATOR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DtwTemplate {
    pub user_id: String,
    frames: Vec<Vec<[f64; 4]>>,
    /// Mean DTW distance over unordered enrolled pairs, floored.
    pub mean_pairwise: f64,
    /// True when the raw mean pairwise distance was below the floor.
    pub degenerate: bool,
}

impl DtwTemplate {
    pub fn enroll(user_id: &str, samples: &[&SignatureSample]) -> Result<Self, VerifyError> {
        if samples.len() < 2 {
            return Err(VerifyError::TooFewSamples {
                needed: 2,
                got: samples.len(),
            });
        }
        let frames = samples
            .iter()
            .map(|s| dtw_frames(s))
            .collect::<Result<Vec<_>, _>>()?;
        let mut pair_distances = Vec::new();
        for i in 0..frames.len() {
            for j in i + 1..frames.len() {
                pair_distances.push(dtw_frames_distance(&frames[i], &frames[j]));
            }
        }
        pair_distances.sort_by(f64::total_cmp);
        let raw = pair_distances.iter().sum::<f64>() / pair_distances.len() as f64;
        Ok(DtwTemplate {
            user_id: user_id.to_string(),
            frames,
            mean_pairwise: raw.max(DTW_DENOMINATOR_FLOOR),
            degenerate: raw < DTW_DENOMINATOR_FLOOR,
        })
    }

    /// Mean enrolled-to-test distance over the mean enrolled pairwise
    /// distance.
    pub fn score(&self, test: &SignatureSample) -> Result<f64, VerifyError> {
        self.score_frames(&dtw_frames(test)?)
    }

    fn score_frames(&self, test: &[[f64; 4]]) -> Result<f64, VerifyError> {
        let mut d: Vec<f64> = self
            .frames
            .iter()
            .map(|e| dtw_frames_distance(e, test))
            .collect();
        d.sort_by(f64::total_cmp);
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        Ok(mean / self.mean_pairwise)
    }
}

pub fn dtw_score(
    enrolled: &[&SignatureSample],
    test: &SignatureSample,
) -> Result<f64, VerifyError> {
    DtwTemplate::enroll("", enrolled)?.score(test)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DtwVerifier;

impl Verifier for DtwVerifier {
    type Sample = SignatureSample;
    type Template = DtwTemplate;

    fn enroll(
        &self,
        user_id: &str,
        samples: &[&SignatureSample],
    ) -> Result<DtwTemplate, VerifyError> {
        DtwTemplate::enroll(user_id, samples)
    }

    fn score(&self, template: &DtwTemplate, test: &SignatureSample) -> Result<f64, VerifyError> {
        template.score(test)
    }
}

// ---------------------------------------------------------------------------
// keystroke verifier

/// Squared Euclidean distance between template mean and test timings.
pub fn keystroke_score(template_mean: &[f64], test: &KeystrokeSample) -> Result<f64, VerifyError> {
    if template_mean.len() != test.features.len() {
        return Err(VerifyError::FeatureCountMismatch {
            expected: template_mean.len(),
            found: test.features.len(),
        });
    }
    Ok(template_mean
        .iter()
        .zip(&test.features)
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeystrokeTemplate {
    pub user_id: String,
    pub mean: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KeystrokeVerifier;

impl Verifier for KeystrokeVerifier {
    type Sample = KeystrokeSample;
    type Template = KeystrokeTemplate;

    fn enroll(
        &self,
        user_id: &str,
        samples: &[&KeystrokeSample],
    ) -> Result<KeystrokeTemplate, VerifyError> {
        if samples.is_empty() {
            return Err(VerifyError::TooFewSamples { needed: 1, got: 0 });
        }
        let width = samples[0].features.len();
        if let Some(bad) = samples.iter().find(|s| s.features.len() != width) {
            return Err(VerifyError::FeatureCountMismatch {
                expected: width,
                found: bad.features.len(),
            });
        }
        let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.features.clone()).collect();
        let (mean, _) = crate::quality::column_stats(&rows);
        Ok(KeystrokeTemplate {
            user_id: user_id.to_string(),
            mean,
        })
    }

    fn score(
        &self,
        template: &KeystrokeTemplate,
        test: &KeystrokeSample,
    ) -> Result<f64, VerifyError> {
        keystroke_score(&template.mean, test)
    }
}

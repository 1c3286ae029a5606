//! Template quality: distinctiveness, complexity and repeatability.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureVector, HistogramSpec};

#[derive(Debug, Error, PartialEq)]
pub enum QualityError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("feature layout mismatch: expected {expected} features, found {found}")]
    FeatureCountMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("standard deviations sum to zero")]
    DegenerateSpread,
    #[error("no feature has a non-zero mean")]
    NoEligibleFeatures,
    #[error("validation set is empty")]
    EmptyValidationSet,
    #[error("invalid dissimilarity score {0}")]
    InvalidScore(f64),
}

/// Floor applied to per-feature standard deviations when used as the
/// quantisation step of the histogram verifier.
pub const QUANTIZATION_FLOOR: f64 = 1e-6;

/// Upper bound on a single feature's inverse index of dispersion.
pub const INV_DISPERSION_CLAMP: f64 = 1e3;

/// Default random-signature length of the binomial population model.
pub const DEFAULT_L_POP: u32 = 147;

/// Order-independent sum: the column is sorted before accumulation so that
/// statistics are bit-identical under any permutation of the enrolled set.
fn stable_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

/// Column-wise mean and sample variance (divisor `n - 1`).
pub(crate) fn column_stats(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    let mut mean = Vec::with_capacity(width);
    let mut variance = Vec::with_capacity(width);
    let mut column = vec![0.0; n];
    for j in 0..width {
        for (slot, row) in column.iter_mut().zip(rows) {
            *slot = row[j];
        }
        let m = stable_sum(&mut column) / n as f64;
        let mut sq: Vec<f64> = column.iter().map(|v| (v - m) * (v - m)).collect();
        let var = if n > 1 {
            stable_sum(&mut sq) / (n - 1) as f64
        } else {
            0.0
        };
        mean.push(m);
        variance.push(var);
    }
    (mean, variance)
}

/// A user's enrolled template: per-feature statistics over the enrolled
/// feature vectors, the min-pooled speed-angle histograms, and the
/// quantisation vector consumed by the histogram verifier.
///
/// All vectors follow [`FeatureVector::flat`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub user_id: String,
    pub speed_bins: usize,
    pub angle_bins: usize,
    pub pressure_bins: usize,
    pub enrolled_count: usize,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub std: Vec<f64>,
    pub h_min_first: Vec<f64>,
    pub h_min_second: Vec<f64>,
    /// Per-feature standard deviation floored at [`QUANTIZATION_FLOOR`].
    pub quantization: Vec<f64>,
    /// `mean / quantization`, elementwise.
    pub quantized_mean: Vec<f64>,
}

impl Template {
    pub fn enroll(
        user_id: impl Into<String>,
        enrolled: &[FeatureVector],
    ) -> Result<Template, QualityError> {
        if enrolled.len() < 2 {
            return Err(QualityError::TooFewSamples {
                needed: 2,
                got: enrolled.len(),
            });
        }
        let first = &enrolled[0];
        for fv in enrolled {
            if fv.speed_bins != first.speed_bins
                || fv.angle_bins != first.angle_bins
                || fv.pressure_len() != first.pressure_len()
            {
                return Err(QualityError::FeatureCountMismatch {
                    expected: first.len(),
                    found: fv.len(),
                });
            }
        }
        let rows: Vec<Vec<f64>> = enrolled.iter().map(FeatureVector::flat).collect();
        let (mean, variance) = column_stats(&rows);
        let std: Vec<f64> = variance.iter().map(|v| v.sqrt()).collect();
        let quantization: Vec<f64> = std.iter().map(|s| s.max(QUANTIZATION_FLOOR)).collect();
        let quantized_mean = mean.iter().zip(&quantization).map(|(m, q)| m / q).collect();

        let min_pool = |pick: fn(&FeatureVector) -> &Vec<f64>| -> Vec<f64> {
            let mut out = pick(first).clone();
            for fv in &enrolled[1..] {
                for (o, v) in out.iter_mut().zip(pick(fv)) {
                    *o = o.min(*v);
                }
            }
            out
        };

        Ok(Template {
            user_id: user_id.into(),
            speed_bins: first.speed_bins,
            angle_bins: first.angle_bins,
            pressure_bins: first.pressure_len(),
            enrolled_count: enrolled.len(),
            h_min_first: min_pool(|f| &f.sa_first),
            h_min_second: min_pool(|f| &f.sa_second),
            mean,
            variance,
            std,
            quantization,
            quantized_mean,
        })
    }

    pub fn speed_angle_len(&self) -> usize {
        self.speed_bins * self.angle_bins
    }

    pub fn has_pressure(&self) -> bool {
        self.pressure_bins > 0
    }

    pub fn feature_count(&self) -> usize {
        self.mean.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationSource {
    GenericAssumption,
    DatasetEmpirical,
}

/// Per-feature statistics of the random-signature population, laid out like
/// a pressure-bearing [`FeatureVector::flat`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationStats {
    pub speed_angle_len: usize,
    pub pressure_bins: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub l_pop: Option<u32>,
    pub source: PopulationSource,
}

/// Mean and standard deviation of one relative-frequency bin when `l`
/// elements fall independently and uniformly into `n_bins` bins.
pub fn binomial_bin_stats(n_bins: usize, l: u32) -> Result<(f64, f64), QualityError> {
    if l == 0 {
        return Err(QualityError::InvalidParam("L_pop must be >= 1".into()));
    }
    if n_bins < 2 {
        return Err(QualityError::InvalidParam(format!(
            "{n_bins}-bin histogram has zero population spread"
        )));
    }
    let n = n_bins as f64;
    let sigma = ((1.0 / f64::from(l)) * (n - 1.0) / (n * n)).sqrt();
    Ok((1.0 / n, sigma))
}

/// Binomial random-signature model applied to every histogram of `spec`.
pub fn generic_population_stats(
    spec: &HistogramSpec,
    l_pop: u32,
) -> Result<PopulationStats, QualityError> {
    spec.validate()
        .map_err(|e| QualityError::InvalidParam(e.to_string()))?;
    let sa = spec.speed_angle_len();
    let (sa_mu, sa_sigma) = binomial_bin_stats(sa, l_pop)?;
    let (pr_mu, pr_sigma) = binomial_bin_stats(spec.pressure_bins, l_pop)?;
    let mut mean = vec![sa_mu; 2 * sa];
    let mut std = vec![sa_sigma; 2 * sa];
    mean.extend(std::iter::repeat_n(pr_mu, 2 * spec.pressure_bins));
    std.extend(std::iter::repeat_n(pr_sigma, 2 * spec.pressure_bins));
    Ok(PopulationStats {
        speed_angle_len: sa,
        pressure_bins: spec.pressure_bins,
        mean,
        std,
        l_pop: Some(l_pop),
        source: PopulationSource::GenericAssumption,
    })
}

/// Per-feature statistics over an actual pool of samples (e.g. every genuine
/// sample of a dataset). Standard deviations are floored at 1e-12.
pub fn empirical_population_stats(
    features: &[FeatureVector],
) -> Result<PopulationStats, QualityError> {
    if features.len() < 2 {
        return Err(QualityError::TooFewSamples {
            needed: 2,
            got: features.len(),
        });
    }
    let first = &features[0];
    if !first.has_pressure() {
        return Err(QualityError::InvalidParam(
            "empirical population needs pressure-bearing samples".into(),
        ));
    }
    let rows: Vec<Vec<f64>> = features
        .iter()
        .map(|f| {
            if f.len() == first.len() && f.speed_bins == first.speed_bins {
                Ok(f.flat())
            } else {
                Err(QualityError::FeatureCountMismatch {
                    expected: first.len(),
                    found: f.len(),
                })
            }
        })
        .collect::<Result<_, _>>()?;
    let (mean, variance) = column_stats(&rows);
    Ok(PopulationStats {
        speed_angle_len: first.speed_angle_len(),
        pressure_bins: first.pressure_len(),
        mean,
        std: variance.iter().map(|v| v.sqrt().max(1e-12)).collect(),
        l_pop: None,
        source: PopulationSource::DatasetEmpirical,
    })
}

/// Decidability index of one feature: `|μT − μP| / sqrt((σT + σP) / 2)`.
///
/// The root averages standard deviations, not variances.
pub fn decidability(mu_t: f64, sigma_t: f64, mu_p: f64, sigma_p: f64) -> Result<f64, QualityError> {
    let spread = sigma_t + sigma_p;
    if spread <= 0.0 {
        return Err(QualityError::DegenerateSpread);
    }
    Ok((mu_t - mu_p).abs() / (spread / 2.0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distinctiveness {
    pub total: f64,
    pub per_feature: Vec<f64>,
    /// Features whose template and population spreads are both zero.
    pub degenerate: Vec<usize>,
}

/// Sum of per-feature decidability over both speed-angle halves and, when
/// the template carries pressure, both pressure halves.
pub fn distinctiveness(
    template: &Template,
    pop: &PopulationStats,
) -> Result<Distinctiveness, QualityError> {
    let sa = template.speed_angle_len();
    if pop.speed_angle_len != sa
        || (template.has_pressure() && pop.pressure_bins != template.pressure_bins)
    {
        return Err(QualityError::FeatureCountMismatch {
            expected: template.feature_count(),
            found: pop.mean.len(),
        });
    }
    let n = template.feature_count();
    let mut per_feature = Vec::with_capacity(n);
    let mut degenerate = Vec::new();
    for i in 0..n {
        let d = match decidability(template.mean[i], template.std[i], pop.mean[i], pop.std[i]) {
            Ok(d) => d,
            Err(_) => {
                degenerate.push(i);
                0.0
            }
        };
        per_feature.push(d);
    }
    let total = per_feature.iter().sum();
    Ok(Distinctiveness {
        total,
        per_feature,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Emd {
    pub value: f64,
    /// Halves whose min-pooled histogram is entirely zero.
    pub empty_halves: usize,
}

/// Earth mover's distance of one min-pooled speed-angle histogram to the
/// point mass at its most frequent bin.
pub fn histogram_emd(h_min: &[f64], speed_bins: usize, angle_bins: usize) -> Option<f64> {
    let mut reference = 0;
    for (idx, v) in h_min.iter().enumerate() {
        if *v > h_min[reference] {
            reference = idx;
        }
    }
    if h_min[reference] <= 0.0 {
        return None;
    }
    let (i_ref, j_ref) = (reference / angle_bins, reference % angle_bins);
    let (m, n) = (speed_bins as f64, angle_bins as f64);
    let emd = h_min
        .iter()
        .enumerate()
        .map(|(idx, h)| {
            let di = (idx / angle_bins) as f64 - i_ref as f64;
            let dj = (idx % angle_bins) as f64 - j_ref as f64;
            h * (di * di / m + dj * dj / n).sqrt()
        })
        .sum();
    Some(emd)
}

/// EMD of the template, first and second halves summed.
pub fn emd_complexity(template: &Template) -> Emd {
    let mut value = 0.0;
    let mut empty_halves = 0;
    for h in [&template.h_min_first, &template.h_min_second] {
        match histogram_emd(h, template.speed_bins, template.angle_bins) {
            Some(e) => value += e,
            None => empty_halves += 1,
        }
    }
    Emd {
        value,
        empty_halves,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseDispersion {
    pub value: f64,
    /// Number of features with non-zero mean that entered the average.
    pub k: usize,
    /// Features whose inverse dispersion hit [`INV_DISPERSION_CLAMP`].
    pub clamped: Vec<usize>,
}

/// Mean over speed-angle features of `μ / σ²` (the inverse index of
/// dispersion), skipping zero-mean features.
pub fn inverse_dispersion(template: &Template) -> Result<InverseDispersion, QualityError> {
    if template.enrolled_count < 2 {
        return Err(QualityError::TooFewSamples {
            needed: 2,
            got: template.enrolled_count,
        });
    }
    let sa = 2 * template.speed_angle_len();
    let mut sum = 0.0;
    let mut k = 0;
    let mut clamped = Vec::new();
    for i in 0..sa {
        let mu = template.mean[i];
        if mu == 0.0 {
            continue;
        }
        let var = template.variance[i];
        let inv = if var > 0.0 { mu / var } else { f64::INFINITY };
        let inv = if inv >= INV_DISPERSION_CLAMP {
            clamped.push(i);
            INV_DISPERSION_CLAMP
        } else {
            inv
        };
        sum += inv;
        k += 1;
    }
    if k == 0 {
        return Err(QualityError::NoEligibleFeatures);
    }
    Ok(InverseDispersion {
        value: sum / k as f64,
        k,
        clamped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Complexity {
    pub value: f64,
    pub emd: Emd,
    pub inv_dispersion: InverseDispersion,
}

pub fn complexity(template: &Template) -> Result<Complexity, QualityError> {
    let emd = emd_complexity(template);
    let inv_dispersion = inverse_dispersion(template)?;
    Ok(Complexity {
        value: emd.value * inv_dispersion.value,
        emd,
        inv_dispersion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Repeatability {
    /// `n / Σ scores`; `+∞` when every validation score is zero.
    pub value: f64,
    pub zero_score_sum: bool,
}

/// Inverse mean dissimilarity of validation genuines against the template.
pub fn repeatability(validation_scores: &[f64]) -> Result<Repeatability, QualityError> {
    if validation_scores.is_empty() {
        return Err(QualityError::EmptyValidationSet);
    }
    if let Some(bad) = validation_scores
        .iter()
        .find(|s| !(s.is_finite() && **s >= 0.0))
    {
        return Err(QualityError::InvalidScore(*bad));
    }
    let sum = stable_sum(&mut validation_scores.to_vec());
    if sum == 0.0 {
        return Ok(Repeatability {
            value: f64::INFINITY,
            zero_score_sum: true,
        });
    }
    Ok(Repeatability {
        value: validation_scores.len() as f64 / sum,
        zero_score_sum: false,
    })
}

/// All three measures for one template, plus diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub user_id: String,
    pub distinctiveness: f64,
    pub complexity: f64,
    pub emd: f64,
    pub inv_dispersion: f64,
    pub repeatability: Option<f64>,
    pub per_feature_d: Vec<f64>,
    pub k: usize,
    pub flags: Vec<String>,
}

impl QualityReport {
    pub fn assess(
        template: &Template,
        pop: &PopulationStats,
        validation_scores: Option<&[f64]>,
    ) -> Result<QualityReport, QualityError> {
        let d = distinctiveness(template, pop)?;
        let c = complexity(template)?;
        let mut flags = Vec::new();
        if !d.degenerate.is_empty() {
            flags.push(format!("degenerate_spread:{}", d.degenerate.len()));
        }
        if c.emd.empty_halves > 0 {
            flags.push(format!("empty_histogram:{}", c.emd.empty_halves));
        }
        if !c.inv_dispersion.clamped.is_empty() {
            flags.push(format!(
                "clamped_dispersion:{}",
                c.inv_dispersion.clamped.len()
            ));
        }
        let repeatability = match validation_scores {
            None => {
                flags.push("repeatability_absent".into());
                None
            }
            Some(scores) => {
                let r = repeatability(scores)?;
                if r.zero_score_sum {
                    flags.push("zero_score_sum".into());
                }
                Some(r.value)
            }
        };
        Ok(QualityReport {
            user_id: template.user_id.clone(),
            distinctiveness: d.total,
            complexity: c.value,
            emd: c.emd.value,
            inv_dispersion: c.inv_dispersion.value,
            repeatability,
            per_feature_d: d.per_feature,
            k: c.inv_dispersion.k,
            flags,
        })
    }

    pub const CSV_HEADER: &'static str =
        "user_id,distinctiveness,complexity,emd,inv_dispersion,repeatability,k,flags";

    pub fn csv_record(&self) -> String {
        let r = self
            .repeatability
            .map(|r| r.to_string())
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.user_id,
            self.distinctiveness,
            self.complexity,
            self.emd,
            self.inv_dispersion,
            r,
            self.k,
            self.flags.join(";")
        )
    }
}

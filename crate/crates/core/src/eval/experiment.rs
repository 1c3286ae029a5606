//! End-to-end experiments: enrol and score per protocol, compute template
//! quality, then relate quality to error rates.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curves::{
    eer, far_curve, far_frr, frr_curve, group_mean, hter, quartile_groups, roc, subsample_grid,
    threshold_grid,
};
use super::protocol::{run_protocol, Protocol, ScoreKind, ScoreMatrix, UserSamples};
use super::stats::{gate_multi, gate_templates, golden_rank, spearman, GoldenStatistic};
use super::EvalError;
use crate::features::{extract_features, FeatureVector, HistogramSpec};
use crate::ingest::{Dataset, KeystrokeDataset, SampleLabel};
use crate::quality::{
    empirical_population_stats, generic_population_stats, PopulationSource, PopulationStats,
    QualityReport, Template,
};
use crate::verify::{DtwVerifier, HistogramVerifier, KeystrokeVerifier, VerifierKind};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Distinctiveness,
    Complexity,
    Repeatability,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [
        MetricKind::Distinctiveness,
        MetricKind::Complexity,
        MetricKind::Repeatability,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Distinctiveness => "distinctiveness",
            MetricKind::Complexity => "complexity",
            MetricKind::Repeatability => "repeatability",
        }
    }

    pub fn parse(s: &str) -> Option<MetricKind> {
        MetricKind::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    /// Fraction of lowest-quality templates discarded by gating.
    pub gate_fraction: f64,
    /// Maximum thresholds per grouped curve and points per ROC.
    pub curve_points: usize,
    pub k_lowest: usize,
    pub k_highest: usize,
    pub metrics: Vec<MetricKind>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            gate_fraction: 0.1,
            curve_points: 512,
            k_lowest: 3,
            k_highest: 5,
            metrics: MetricKind::ALL.to_vec(),
        }
    }
}

/// Quality scalars for one template of a score matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateQuality {
    pub template: String,
    pub user_id: String,
    pub distinctiveness: Option<f64>,
    pub complexity: Option<f64>,
    pub emd: Option<f64>,
    pub inv_dispersion: Option<f64>,
    pub repeatability: Option<f64>,
    pub k: Option<usize>,
    pub flags: Vec<String>,
}

impl TemplateQuality {
    pub fn empty(template: &str, user_id: &str) -> Self {
        TemplateQuality {
            template: template.to_string(),
            user_id: user_id.to_string(),
            distinctiveness: None,
            complexity: None,
            emd: None,
            inv_dispersion: None,
            repeatability: None,
            k: None,
            flags: Vec::new(),
        }
    }

    pub fn from_report(template: &str, report: &QualityReport) -> Self {
        TemplateQuality {
            template: template.to_string(),
            user_id: report.user_id.clone(),
            distinctiveness: Some(report.distinctiveness),
            complexity: Some(report.complexity),
            emd: Some(report.emd),
            inv_dispersion: Some(report.inv_dispersion),
            repeatability: report.repeatability,
            k: Some(report.k),
            flags: report.flags.clone(),
        }
    }

    pub fn metric(&self, kind: MetricKind) -> Option<f64> {
        match kind {
            MetricKind::Distinctiveness => self.distinctiveness,
            MetricKind::Complexity => self.complexity,
            MetricKind::Repeatability => self.repeatability,
        }
        .filter(|v| !v.is_nan())
    }

    pub const CSV_HEADER: &'static str =
        "template,user_id,distinctiveness,complexity,emd,inv_dispersion,repeatability,k,flags";

    pub fn csv_record(&self) -> String {
        let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.template,
            self.user_id,
            f(self.distinctiveness),
            f(self.complexity),
            f(self.emd),
            f(self.inv_dispersion),
            f(self.repeatability),
            self.k.map(|k| k.to_string()).unwrap_or_default(),
            self.flags.join(";")
        )
    }

    pub fn to_csv(rows: &[TemplateQuality]) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in rows {
            out.push_str(&r.csv_record());
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Vec<TemplateQuality>, EvalError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| EvalError::ScoreCsv(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.join(",") != Self::CSV_HEADER {
            return Err(EvalError::ScoreCsv(format!(
                "quality csv: expected header {:?}",
                Self::CSV_HEADER
            )));
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| EvalError::ScoreCsv(e.to_string()))?;
            let bad = || EvalError::ScoreCsv(format!("quality csv row {}: bad number", i + 1));
            let num = |s: &str| -> Result<Option<f64>, EvalError> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad())
                }
            };
            rows.push(TemplateQuality {
                template: record[0].to_string(),
                user_id: record[1].to_string(),
                distinctiveness: num(&record[2])?,
                complexity: num(&record[3])?,
                emd: num(&record[4])?,
                inv_dispersion: num(&record[5])?,
                repeatability: num(&record[6])?,
                k: if record[7].is_empty() {
                    None
                } else {
                    Some(record[7].parse().map_err(|_| bad())?)
                },
                flags: record[8]
                    .split(';')
                    .filter(|f| !f.is_empty())
                    .map(str::to_string)
                    .collect(),
            });
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledRates {
    pub imposter_kind: ScoreKind,
    pub n_genuine: usize,
    pub n_imposter: usize,
    pub eer_threshold: Option<f64>,
    pub eer: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCurve {
    pub members: Vec<String>,
    /// Mean of member FAR curves; `None` when no member has imposter scores.
    pub far: Option<Vec<f64>>,
    /// Mean of member FRR curves; `None` when no member has genuine scores.
    pub frr: Option<Vec<f64>>,
}

/// Templates split into quality quartiles with per-group mean error curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveGroupSet {
    pub metric: MetricKind,
    pub imposter_kind: ScoreKind,
    pub thresholds: Vec<f64>,
    pub pooled_far: Vec<f64>,
    pub pooled_frr: Vec<f64>,
    /// Lowest-quality group first.
    pub groups: Vec<GroupCurve>,
    pub tied: bool,
}

impl CurveGroupSet {
    pub fn name(&self) -> String {
        format!("{}_{}", self.metric.as_str(), self.imposter_kind.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpearmanRow {
    pub metric: MetricKind,
    pub score_kind: ScoreKind,
    pub statistic: GoldenStatistic,
    pub n: usize,
    pub rho: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub score_kind: ScoreKind,
    pub statistic: GoldenStatistic,
    pub templates: Vec<String>,
    pub values: Vec<f64>,
    pub ranks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatingRow {
    /// `none`, a metric name, or `combined`.
    pub gated_by: String,
    pub n_kept: usize,
    pub n_discarded: usize,
    pub far_rf: Option<f64>,
    pub far_sf: Option<f64>,
    pub frr: Option<f64>,
    pub hter_rf: Option<f64>,
    pub hter_sf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatingSummary {
    pub fraction: f64,
    /// Random-forgery EER threshold over all templates.
    pub threshold: f64,
    pub rows: Vec<GatingRow>,
    pub discarded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocSummary {
    pub imposter_kind: ScoreKind,
    pub good: Vec<(f64, f64)>,
    pub bad: Vec<(f64, f64)>,
    pub good_eer: Option<f64>,
    pub bad_eer: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub verifier: Option<VerifierKind>,
    pub n_templates: usize,
    pub templates: Vec<TemplateQuality>,
    pub pooled: Vec<PooledRates>,
    pub curve_sets: Vec<CurveGroupSet>,
    pub spearman: Vec<SpearmanRow>,
    pub rank_tables: Vec<RankTable>,
    pub gating: Option<GatingSummary>,
    pub roc: Vec<RocSummary>,
    pub warnings: Vec<String>,
}

fn imposter_kinds(matrix: &ScoreMatrix) -> Vec<ScoreKind> {
    [ScoreKind::RandomForgery, ScoreKind::SkilledForgery]
        .into_iter()
        .filter(|k| matrix.scores.iter().any(|s| !s.cells(*k).is_empty()))
        .collect()
}

fn pooled_eer(genuine: &[f64], imposter: &[f64]) -> Result<(f64, f64), EvalError> {
    let all: Vec<f64> = genuine.iter().chain(imposter).copied().collect();
    eer(&far_frr(genuine, imposter, &threshold_grid(&all))?)
}

fn pooled_over(matrix: &ScoreMatrix, members: &[usize], kind: ScoreKind) -> Vec<f64> {
    members
        .iter()
        .flat_map(|&t| matrix.scores[t].cells(kind).iter().map(|c| c.score))
        .collect()
}

fn rate_at(scores: &[f64], t: f64, far: bool) -> Option<f64> {
    let r = if far {
        far_curve(scores, &[t])
    } else {
        frr_curve(scores, &[t])
    };
    r.ok().map(|v| v[0])
}

fn downsample<T: Clone>(points: &[T], max: usize) -> Vec<T> {
    if points.len() <= max || max < 2 {
        return points.to_vec();
    }
    let last = points.len() - 1;
    (0..max)
        .map(|k| points[k * last / (max - 1)].clone())
        .collect()
}

fn curve_set(
    matrix: &ScoreMatrix,
    keys: &[String],
    quality: &[TemplateQuality],
    metric: MetricKind,
    imposter_kind: ScoreKind,
    settings: &EvalSettings,
) -> Result<CurveGroupSet, EvalError> {
    let eligible: Vec<usize> = (0..quality.len())
        .filter(|&t| quality[t].metric(metric).is_some())
        .collect();
    let values: Vec<f64> = eligible
        .iter()
        .map(|&t| quality[t].metric(metric).unwrap())
        .collect();
    let grouping = quartile_groups(&values)?;
    let genuine = pooled_over(matrix, &eligible, ScoreKind::Genuine);
    let imposter = pooled_over(matrix, &eligible, imposter_kind);
    let all: Vec<f64> = genuine.iter().chain(&imposter).copied().collect();
    let thresholds = subsample_grid(&threshold_grid(&all), settings.curve_points);
    let per_template: Vec<(Option<Curve>, Option<Curve>)> = eligible
        .par_iter()
        .map(|&t| {
            let s = &matrix.scores[t];
            (
                far_curve(&s.scores(imposter_kind), &thresholds).ok(),
                frr_curve(&s.scores(ScoreKind::Genuine), &thresholds).ok(),
            )
        })
        .collect();
    let (fars, frrs): (Vec<_>, Vec<_>) = per_template.into_iter().unzip();
    let groups = grouping
        .groups
        .iter()
        .map(|members| GroupCurve {
            members: members.iter().map(|&i| keys[eligible[i]].clone()).collect(),
            far: group_mean(members, &fars),
            frr: group_mean(members, &frrs),
        })
        .collect();
    Ok(CurveGroupSet {
        metric,
        imposter_kind,
        pooled_far: far_curve(&imposter, &thresholds).unwrap_or_default(),
        pooled_frr: frr_curve(&genuine, &thresholds).unwrap_or_default(),
        thresholds,
        groups,
        tied: grouping.tied,
    })
}

/// Relates template quality to the error behaviour recorded in `matrix`.
/// `quality` is aligned with `matrix.templates`.
pub fn evaluate(
    matrix: &ScoreMatrix,
    quality: &[TemplateQuality],
    verifier: Option<VerifierKind>,
    settings: &EvalSettings,
) -> Result<EvalReport, EvalError> {
    if quality.len() != matrix.templates.len() {
        return Err(EvalError::LengthMismatch(
            quality.len(),
            matrix.templates.len(),
        ));
    }
    if !(settings.gate_fraction > 0.0 && settings.gate_fraction < 1.0) {
        return Err(EvalError::InvalidFraction(settings.gate_fraction));
    }
    let keys = matrix.template_keys();
    let kinds = imposter_kinds(matrix);
    let mut warnings = Vec::new();
    let genuine_all = matrix.pooled(ScoreKind::Genuine);

    let mut pooled = Vec::new();
    let mut rf_threshold = None;
    for &kind in &kinds {
        let imposter = matrix.pooled(kind);
        let mut row = PooledRates {
            imposter_kind: kind,
            n_genuine: genuine_all.len(),
            n_imposter: imposter.len(),
            eer_threshold: None,
            eer: None,
            error: None,
        };
        match pooled_eer(&genuine_all, &imposter) {
            Ok((t, r)) => {
                row.eer_threshold = Some(t);
                row.eer = Some(r);
                if kind == ScoreKind::RandomForgery {
                    rf_threshold = Some(t);
                }
            }
            Err(e) => {
                warnings.push(format!("pooled {} EER: {e}", kind.as_str()));
                row.error = Some(e.to_string());
            }
        }
        pooled.push(row);
    }

    let metrics: Vec<MetricKind> = settings
        .metrics
        .iter()
        .copied()
        .filter(|m| quality.iter().any(|q| q.metric(*m).is_some()))
        .collect();

    // quartile curves
    let mut curve_sets = Vec::new();
    for &metric in &metrics {
        let imposter_kind = match metric {
            MetricKind::Complexity if kinds.contains(&ScoreKind::SkilledForgery) => {
                ScoreKind::SkilledForgery
            }
            _ => ScoreKind::RandomForgery,
        };
        if !kinds.contains(&imposter_kind) && genuine_all.is_empty() {
            continue;
        }
        match curve_set(matrix, &keys, quality, metric, imposter_kind, settings) {
            Ok(set) => {
                if set.tied {
                    warnings.push(format!(
                        "{}: tied quality scores left a quartile empty",
                        set.name()
                    ));
                }
                curve_sets.push(set)
            }
            Err(e) => warnings.push(format!("{} quartiles: {e}", metric.as_str())),
        }
    }

    // golden ranks and Spearman correlation
    let mut spearman_rows = Vec::new();
    let mut rank_tables = Vec::new();
    let imposter_stats = [
        GoldenStatistic::MeanAll,
        GoldenStatistic::MinScore,
        GoldenStatistic::MeanKLowest(settings.k_lowest),
    ];
    let genuine_stats = [
        GoldenStatistic::MaxScore,
        GoldenStatistic::MeanKHighest(settings.k_highest),
        GoldenStatistic::MeanAll,
    ];
    let mut analyses: Vec<(ScoreKind, GoldenStatistic, Vec<MetricKind>)> = Vec::new();
    for &kind in &kinds {
        let m: Vec<MetricKind> = metrics
            .iter()
            .copied()
            .filter(|m| *m != MetricKind::Repeatability)
            .collect();
        for s in imposter_stats {
            analyses.push((kind, s, m.clone()));
        }
    }
    if !genuine_all.is_empty() {
        for s in genuine_stats {
            analyses.push((ScoreKind::Genuine, s, metrics.clone()));
        }
    }
    for (kind, statistic, metric_list) in analyses {
        let order = match kind {
            ScoreKind::Genuine | ScoreKind::Validation => super::stats::RankOrder::HighIsWorse,
            _ => super::stats::RankOrder::LowIsWorse,
        };
        let eligible: Vec<usize> = (0..matrix.templates.len())
            .filter(|&t| statistic.apply(&matrix.scores[t].scores(kind)).is_ok())
            .collect();
        let lists: Vec<Vec<f64>> = eligible
            .iter()
            .map(|&t| matrix.scores[t].scores(kind))
            .collect();
        let Ok(gr) = golden_rank(&lists, statistic, order) else {
            continue;
        };
        for metric in metric_list {
            let pairs: Vec<(f64, f64)> = eligible
                .iter()
                .zip(&gr.ranks)
                .filter_map(|(&t, r)| quality[t].metric(metric).map(|q| (q, *r)))
                .collect();
            let (q, r): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let result = spearman(&q, &r);
            spearman_rows.push(SpearmanRow {
                metric,
                score_kind: kind,
                statistic,
                n: q.len(),
                rho: result.as_ref().ok().copied(),
                error: result.err().map(|e| e.to_string()),
            });
        }
        rank_tables.push(RankTable {
            score_kind: kind,
            statistic,
            templates: eligible.iter().map(|&t| keys[t].clone()).collect(),
            values: gr.values,
            ranks: gr.ranks,
        });
    }

    // gating at the all-template random-forgery EER threshold
    let gate_metrics: Vec<MetricKind> = metrics
        .iter()
        .copied()
        .filter(|m| quality.iter().all(|q| q.metric(*m).is_some()))
        .collect();
    let mut gating = None;
    let mut roc_rows = Vec::new();
    if let Some(threshold) = rf_threshold {
        let all: Vec<usize> = (0..keys.len()).collect();
        let row = |name: &str, kept: &[usize]| -> GatingRow {
            let far_rf = rate_at(
                &pooled_over(matrix, kept, ScoreKind::RandomForgery),
                threshold,
                true,
            );
            let far_sf = rate_at(
                &pooled_over(matrix, kept, ScoreKind::SkilledForgery),
                threshold,
                true,
            );
            let frr = rate_at(
                &pooled_over(matrix, kept, ScoreKind::Genuine),
                threshold,
                false,
            );
            let h = |far: Option<f64>| match (far, frr) {
                (Some(a), Some(r)) => hter(a, r).ok(),
                _ => None,
            };
            GatingRow {
                gated_by: name.to_string(),
                n_kept: kept.len(),
                n_discarded: keys.len() - kept.len(),
                far_rf,
                far_sf,
                frr,
                hter_rf: h(far_rf),
                hter_sf: h(far_sf),
            }
        };
        let mut rows = vec![row("none", &all)];
        let metric_values: Vec<Vec<f64>> = gate_metrics
            .iter()
            .map(|m| quality.iter().map(|q| q.metric(*m).unwrap()).collect())
            .collect();
        for (m, values) in gate_metrics.iter().zip(&metric_values) {
            let g = gate_templates(&keys, values, settings.gate_fraction)?;
            rows.push(row(m.as_str(), &g.kept));
        }
        let mut discarded = Vec::new();
        if !gate_metrics.is_empty() {
            let slices: Vec<&[f64]> = metric_values.iter().map(Vec::as_slice).collect();
            let g = gate_multi(&keys, &slices, settings.gate_fraction)?;
            rows.push(row("combined", &g.kept));
            discarded = g.discarded.iter().map(|&i| keys[i].clone()).collect();

            for &kind in &kinds {
                let summary = |members: &[usize]| {
                    let gen = pooled_over(matrix, members, ScoreKind::Genuine);
                    let imp = pooled_over(matrix, members, kind);
                    let points = roc(&gen, &imp)
                        .ok()
                        .map(|p| downsample(&p, settings.curve_points));
                    (
                        points.unwrap_or_default(),
                        pooled_eer(&gen, &imp).ok().map(|e| e.1),
                    )
                };
                let (good, good_eer) = summary(&g.kept);
                let (bad, bad_eer) = summary(&g.discarded);
                roc_rows.push(RocSummary {
                    imposter_kind: kind,
                    good,
                    bad,
                    good_eer,
                    bad_eer,
                });
            }
        }
        gating = Some(GatingSummary {
            fraction: settings.gate_fraction,
            threshold,
            rows,
            discarded,
        });
    }

    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        verifier,
        n_templates: keys.len(),
        templates: quality.to_vec(),
        pooled,
        curve_sets,
        spearman: spearman_rows,
        rank_tables,
        gating,
        roc: roc_rows,
        warnings,
    })
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Long-format grouped curves: `analysis,group,threshold,far,frr`.
    /// Group `pooled` carries the pooled rates; groups 1–4 run from lowest
    /// to highest quality.
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("analysis,group,threshold,far,frr\n");
        let cell = |v: Option<&Vec<f64>>, i: usize| v.map(|c| c[i].to_string()).unwrap_or_default();
        for set in &self.curve_sets {
            let name = set.name();
            for (i, t) in set.thresholds.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{name},pooled,{t},{},{}",
                    cell(Some(&set.pooled_far).filter(|v| !v.is_empty()), i),
                    cell(Some(&set.pooled_frr).filter(|v| !v.is_empty()), i)
                );
            }
            for (g, group) in set.groups.iter().enumerate() {
                for (i, t) in set.thresholds.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{name},{},{t},{},{}",
                        g + 1,
                        cell(group.far.as_ref(), i),
                        cell(group.frr.as_ref(), i)
                    );
                }
            }
        }
        out
    }

    pub fn spearman_csv(&self) -> String {
        let mut out = String::from("metric,score_kind,statistic,n,rho\n");
        for r in &self.spearman {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.metric.as_str(),
                r.score_kind.as_str(),
                r.statistic.name(),
                r.n,
                r.rho.map(|v| v.to_string()).unwrap_or_default()
            );
        }
        out
    }

    pub fn ranks_csv(&self) -> String {
        let mut out = String::from("score_kind,statistic,template,value,rank\n");
        for t in &self.rank_tables {
            for ((key, v), r) in t.templates.iter().zip(&t.values).zip(&t.ranks) {
                let _ = writeln!(
                    out,
                    "{},{},{key},{v},{r}",
                    t.score_kind.as_str(),
                    t.statistic.name()
                );
            }
        }
        out
    }

    pub fn gating_csv(&self) -> String {
        let mut out = String::from(
            "gated_by,n_kept,n_discarded,threshold,far_rf,far_sf,frr,hter_rf,hter_sf\n",
        );
        if let Some(g) = &self.gating {
            let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            for r in &g.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.gated_by,
                    r.n_kept,
                    r.n_discarded,
                    g.threshold,
                    f(r.far_rf),
                    f(r.far_sf),
                    f(r.frr),
                    f(r.hter_rf),
                    f(r.hter_sf)
                );
            }
        }
        out
    }

    pub fn roc_csv(&self) -> String {
        let mut out = String::from("imposter_kind,set,far,tar\n");
        for r in &self.roc {
            for (set, points) in [("good", &r.good), ("bad", &r.bad)] {
                for (far, tar) in points {
                    let _ = writeln!(out, "{},{set},{far},{tar}", r.imposter_kind.as_str());
                }
            }
        }
        out
    }
}

type Curve = Vec<f64>;

/// Genuine and forgery features of one user.
pub(crate) type UserFeatures = (Vec<FeatureVector>, Vec<FeatureVector>);

/// Features for every sample of a dataset, computed in parallel and
/// returned per user as (genuine, forgeries).
pub(crate) fn dataset_features(
    dataset: &Dataset,
    spec: &HistogramSpec,
) -> Result<Vec<UserFeatures>, EvalError> {
    dataset
        .users
        .par_iter()
        .map(|u| {
            let g = u
                .genuine
                .iter()
                .map(|s| extract_features(s, spec))
                .collect::<Result<Vec<_>, _>>()?;
            let f = u
                .forgeries
                .iter()
                .map(|s| extract_features(s, spec))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((g, f))
        })
        .collect()
}

fn population(
    spec: &HistogramSpec,
    source: PopulationSource,
    l_pop: u32,
    features: &[(Vec<FeatureVector>, Vec<FeatureVector>)],
) -> Result<PopulationStats, EvalError> {
    Ok(match source {
        PopulationSource::GenericAssumption => generic_population_stats(spec, l_pop)?,
        PopulationSource::DatasetEmpirical => {
            let pool: Vec<FeatureVector> = features
                .iter()
                .flat_map(|(g, _)| g.iter().cloned())
                .collect();
            empirical_population_stats(&pool)?
        }
    })
}

fn template_quality(
    key: &str,
    user_id: &str,
    enrolled: &[FeatureVector],
    validation: Option<Vec<f64>>,
    pop: &PopulationStats,
) -> TemplateQuality {
    let result = Template::enroll(user_id, enrolled)
        .and_then(|t| QualityReport::assess(&t, pop, validation.as_deref()));
    match result {
        Ok(r) => TemplateQuality::from_report(key, &r),
        Err(e) => {
            let mut q = TemplateQuality::empty(key, user_id);
            q.flags.push(format!("quality_error:{e}"));
            q
        }
    }
}

/// Pipeline over a signature dataset with the given verifier.
pub fn signature_experiment(
    dataset: &Dataset,
    spec: &HistogramSpec,
    protocol: &Protocol,
    verifier: VerifierKind,
    pop_source: PopulationSource,
    l_pop: u32,
    settings: &EvalSettings,
) -> Result<(EvalReport, ScoreMatrix), EvalError> {
    let spec = HistogramSpec {
        pressure_max: dataset.pressure_max,
        ..spec.clone()
    };
    let features = dataset_features(dataset, &spec)?;
    let pop = population(&spec, pop_source, l_pop, &features)?;
    let sessions = |u: usize| -> Vec<u32> {
        dataset.users[u]
            .genuine
            .iter()
            .map(|s| s.session_id)
            .collect()
    };
    let skilled = |u: usize| -> Vec<usize> {
        (0..dataset.users[u].forgeries.len())
            .filter(|&i| dataset.users[u].forgeries[i].label == SampleLabel::SkilledForgery)
            .collect()
    };

    let matrix = match verifier {
        VerifierKind::Histogram => {
            let users: Vec<UserSamples<'_, FeatureVector>> = (0..dataset.users.len())
                .map(|u| UserSamples {
                    user_id: &dataset.users[u].user_id,
                    genuine: features[u].0.iter().collect(),
                    sessions: sessions(u),
                    skilled: skilled(u).into_iter().map(|i| &features[u].1[i]).collect(),
                })
                .collect();
            run_protocol(&users, protocol, &HistogramVerifier)?
        }
        VerifierKind::Dtw => {
            let users: Vec<UserSamples<'_, _>> = (0..dataset.users.len())
                .map(|u| UserSamples {
                    user_id: &dataset.users[u].user_id,
                    genuine: dataset.users[u].genuine.iter().collect(),
                    sessions: sessions(u),
                    skilled: skilled(u)
                        .into_iter()
                        .map(|i| &dataset.users[u].forgeries[i])
                        .collect(),
                })
                .collect();
            run_protocol(&users, protocol, &DtwVerifier)?
        }
        VerifierKind::KeystrokeEuclidean => {
            return Err(EvalError::DegenerateInput(
                "keystroke verifier needs a keystroke dataset",
            ))
        }
    };

    let keys = matrix.template_keys();
    let quality: Vec<TemplateQuality> = matrix
        .templates
        .par_iter()
        .enumerate()
        .map(|(t, info)| {
            let u = info.user_index as usize;
            let enrolled: Vec<FeatureVector> = info
                .enrolled
                .iter()
                .map(|&i| features[u].0[i].clone())
                .collect();
            let validation = (protocol.validation_count > 0)
                .then(|| matrix.scores[t].scores(ScoreKind::Validation));
            template_quality(&keys[t], &info.user_id, &enrolled, validation, &pop)
        })
        .collect();

    let report = evaluate(&matrix, &quality, Some(verifier), settings)?;
    Ok((report, matrix))
}

/// Per-template quality only (no imposter scoring). Users lacking a
/// validation session get their template scored without repeatability and
/// are flagged; users with too few genuines are reported and skipped.
pub fn signature_quality(
    dataset: &Dataset,
    spec: &HistogramSpec,
    protocol: &Protocol,
    verifier: VerifierKind,
    pop_source: PopulationSource,
    l_pop: u32,
) -> Result<Vec<TemplateQuality>, EvalError> {
    let spec = HistogramSpec {
        pressure_max: dataset.pressure_max,
        ..spec.clone()
    };
    let features = dataset_features(dataset, &spec)?;
    let pop = population(&spec, pop_source, l_pop, &features)?;
    let no_imposters = Protocol {
        imposter_source: super::protocol::ImposterSource::None,
        ..protocol.clone()
    };
    let without_validation = Protocol {
        validation_count: 0,
        ..no_imposters.clone()
    };

    let rows: Vec<Vec<TemplateQuality>> = dataset
        .users
        .par_iter()
        .enumerate()
        .map(|(u, user)| -> Result<Vec<TemplateQuality>, EvalError> {
            let sessions: Vec<u32> = user.genuine.iter().map(|s| s.session_id).collect();
            let (active, flag) = if no_imposters.split(&user.user_id, u, &sessions, 0).is_ok() {
                (&no_imposters, None)
            } else if protocol.validation_count > 0
                && without_validation
                    .split(&user.user_id, u, &sessions, 0)
                    .is_ok()
            {
                (&without_validation, Some("no_validation_session"))
            } else {
                let err = no_imposters
                    .split(&user.user_id, u, &sessions, 0)
                    .unwrap_err();
                let mut q = TemplateQuality::empty(&user.user_id, &user.user_id);
                q.flags.push(format!("insufficient_samples:{err}"));
                return Ok(vec![q]);
            };
            let mut out = Vec::new();
            let repeated = active.repeat_times() > 1;
            for rep in 0..active.repeat_times() {
                let (enroll, validation, _) = active.split(&user.user_id, u, &sessions, rep)?;
                let key = if repeated {
                    format!("{}#{rep}", user.user_id)
                } else {
                    user.user_id.clone()
                };
                let enrolled: Vec<FeatureVector> =
                    enroll.iter().map(|&i| features[u].0[i].clone()).collect();
                let scores = if active.validation_count > 0 {
                    Some(validation_scores(
                        verifier,
                        &user.user_id,
                        &enroll,
                        &validation,
                        &features[u].0,
                        &user.genuine,
                    )?)
                } else {
                    None
                };
                let mut q = template_quality(&key, &user.user_id, &enrolled, scores, &pop);
                if let Some(f) = flag {
                    q.flags.push(f.to_string());
                }
                out.push(q);
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn validation_scores(
    verifier: VerifierKind,
    user_id: &str,
    enroll: &[usize],
    validation: &[usize],
    features: &[FeatureVector],
    samples: &[crate::ingest::SignatureSample],
) -> Result<Vec<f64>, EvalError> {
    use crate::verify::Verifier;
    match verifier {
        VerifierKind::Histogram => {
            let e: Vec<&FeatureVector> = enroll.iter().map(|&i| &features[i]).collect();
            let t = HistogramVerifier.enroll(user_id, &e)?;
            validation
                .iter()
                .map(|&i| Ok(HistogramVerifier.score(&t, &features[i])?))
                .collect()
        }
        VerifierKind::Dtw => {
            let e: Vec<&crate::ingest::SignatureSample> =
                enroll.iter().map(|&i| &samples[i]).collect();
            let t = DtwVerifier.enroll(user_id, &e)?;
            validation
                .iter()
                .map(|&i| Ok(DtwVerifier.score(&t, &samples[i])?))
                .collect()
        }
        VerifierKind::KeystrokeEuclidean => Err(EvalError::DegenerateInput(
            "keystroke verifier needs a keystroke dataset",
        )),
    }
}

/// Keystroke pipeline: squared-Euclidean verifier, repeatability only.
pub fn keystroke_experiment(
    dataset: &KeystrokeDataset,
    protocol: &Protocol,
    settings: &EvalSettings,
) -> Result<(EvalReport, ScoreMatrix), EvalError> {
    let users: Vec<UserSamples<'_, _>> = dataset
        .users
        .iter()
        .map(|(id, samples)| UserSamples {
            user_id: id,
            genuine: samples.iter().collect(),
            sessions: samples.iter().map(|s| s.session_id).collect(),
            skilled: Vec::new(),
        })
        .collect();
    let matrix = run_protocol(&users, protocol, &KeystrokeVerifier)?;
    let keys = matrix.template_keys();
    let quality: Vec<TemplateQuality> = matrix
        .templates
        .iter()
        .enumerate()
        .map(|(t, info)| {
            let mut q = TemplateQuality::empty(&keys[t], &info.user_id);
            if protocol.validation_count > 0 {
                match crate::quality::repeatability(&matrix.scores[t].scores(ScoreKind::Validation))
                {
                    Ok(r) => {
                        q.repeatability = Some(r.value);
                        if r.zero_score_sum {
                            q.flags.push("zero_score_sum".into());
                        }
                    }
                    Err(e) => q.flags.push(format!("quality_error:{e}")),
                }
            } else {
                q.flags.push("repeatability_absent".into());
            }
            q
        })
        .collect();
    let report = evaluate(
        &matrix,
        &quality,
        Some(VerifierKind::KeystrokeEuclidean),
        settings,
    )?;
    Ok((report, matrix))
}

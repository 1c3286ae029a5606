//! Acceptance run. Prints one PASS/FAIL/NOT RUN line per check and exits
//! non-zero when a runnable check fails.
//!
//! The dataset checks run only when the corresponding manifest is given:
//! `SIGQUAL_MCYT_MANIFEST`, `SIGQUAL_SUSIG_MANIFEST`, `SIGQUAL_CMU_MANIFEST`.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use sigqual::eval::{
    far_curve, frr_curve, keystroke_experiment, signature_experiment, spearman, threshold_grid,
    CurveGroupSet, EnrollSelection, EvalReport, EvalSettings, GoldenStatistic, ImposterSource,
    MetricKind, Protocol, ScoreKind, ScoreMatrix,
};
use sigqual::features::{extract_features, HistogramSpec};
use sigqual::ingest::{
    load_dataset, synth_corpus, Consistency, Dataset, LoadedDataset, PenPoint, SampleLabel,
    SignatureSample, SynthParams,
};
use sigqual::quality::{
    emd_complexity, generic_population_stats, repeatability, PopulationSource, Template,
};
use sigqual::verify::{dtw_distance, dtw_frames, VerifierKind};

use common::*;

const SUITE_BUDGET: Duration = Duration::from_secs(300);
const ORDERING_BUDGET: Duration = Duration::from_secs(120);

const INVARIANCE_CASES: usize = 1000;
const BINOMIAL_DRAWS: usize = 100_000;
const BINOMIAL_BINS: usize = 16;
const BINOMIAL_L: u32 = 147;
const BINOMIAL_REL_TOL: f64 = 0.02;
const EMD_CASES: usize = 500;
const DTW_CASES: usize = 200;
const DTW_MAX_LEN: usize = 5;
const DTW_TOL: f64 = 1e-9;
const SPEARMAN_CASES: usize = 1000;
const SPEARMAN_TOL: f64 = 1e-9;
const REPEATABILITY_CASES: usize = 100;

const OPERATING_RANGE: (f64, f64) = (0.01, 0.5);

const MCYT_HIST_EER: (f64, f64) = (0.0072, 0.005);
const MCYT_DTW_EER: (f64, f64) = (0.0219, 0.010);
const MCYT_BUDGET: Duration = Duration::from_secs(3600);
const MCYT_D_MEAN: (f64, f64) = (187.28, 5.0);
const MCYT_D_STD: (f64, f64) = (23.24, 5.0);
const SUSIG_D_MEAN: (f64, f64) = (171.83, 5.0);
const MCYT_RHO_EMPIRICAL: (f64, f64) = (0.78, 0.10);
const MCYT_RHO_GENERIC: (f64, f64) = (0.50, 0.10);
const SUSIG_FAR_RF: ((f64, f64), f64) = ((0.0305, 0.0273), 0.005);
const SUSIG_FRR: ((f64, f64), f64) = ((0.0298, 0.0094), 0.005);
const SUSIG_HTER_GAIN: f64 = 0.20;
const CMU_RHO: (f64, f64) = (0.89, 0.08);

type Check = Result<String, String>;

#[derive(Default)]
struct Tally {
    failed: usize,
}

impl Tally {
    fn line(&mut self, id: &str, outcome: Check) -> bool {
        match outcome {
            Ok(detail) => {
                println!("PASS     {id}: {detail}");
                true
            }
            Err(detail) => {
                println!("FAIL     {id}: {detail}");
                self.failed += 1;
                false
            }
        }
    }

    fn not_run(&self, id: &str, why: &str) {
        println!("NOT RUN  {id}: {why}");
    }
}

fn within(value: f64, (target, tol): (f64, f64)) -> bool {
    (value - target).abs() <= tol
}

fn feature_invariance() -> Check {
    let mut r = rng(101);
    let spec = HistogramSpec::default();
    for case in 0..INVARIANCE_CASES {
        let s = random_sample(&mut r, true);
        let (dx, dy, k) = (
            r.random_range(-10_000..10_000),
            r.random_range(-10_000..10_000),
            r.random_range(1..8),
        );
        let base = extract_features(&s, &spec).map_err(|e| e.to_string())?;
        if base != extract_features(&s.translated(dx, dy), &spec).unwrap()
            || base != extract_features(&s.scaled(k), &spec).unwrap()
        {
            return Err(format!(
                "case {case} changed under translate ({dx},{dy}) / scale {k}"
            ));
        }
    }
    Ok(format!("{INVARIANCE_CASES} samples, exact"))
}

fn binomial_model() -> Check {
    let spec = HistogramSpec {
        pressure_bins: BINOMIAL_BINS,
        ..HistogramSpec::default()
    };
    let pop = generic_population_stats(&spec, BINOMIAL_L).map_err(|e| e.to_string())?;
    let start = 2 * pop.speed_angle_len;
    let mu = &pop.mean[start..start + BINOMIAL_BINS];
    let sigma = &pop.std[start..start + BINOMIAL_BINS];
    let mu_sum: f64 = mu.iter().sum();
    if mu_sum != 1.0 {
        return Err(format!("sum of mu = {mu_sum:e}"));
    }
    let mut r = rng(102);
    let mut sum = [0.0; BINOMIAL_BINS];
    let mut sum2 = [0.0; BINOMIAL_BINS];
    let mut counts = [0u32; BINOMIAL_BINS];
    for _ in 0..BINOMIAL_DRAWS {
        counts.fill(0);
        for _ in 0..BINOMIAL_L {
            counts[r.random_range(0..BINOMIAL_BINS)] += 1;
        }
        for k in 0..BINOMIAL_BINS {
            let f = f64::from(counts[k]) / f64::from(BINOMIAL_L);
            sum[k] += f;
            sum2[k] += f * f;
        }
    }
    let n = BINOMIAL_DRAWS as f64;
    let mut worst = 0.0f64;
    for k in 0..BINOMIAL_BINS {
        let m = sum[k] / n;
        let sd = ((sum2[k] - n * m * m) / (n - 1.0)).sqrt();
        worst = worst.max((sd - sigma[k]).abs() / sigma[k]);
    }
    if worst > BINOMIAL_REL_TOL {
        return Err(format!("worst relative sigma error {worst:.4}"));
    }
    Ok(format!(
        "sigma within {:.3}% over {BINOMIAL_DRAWS} draws, sum mu = 1",
        100.0 * worst
    ))
}

fn emd_oracle() -> Check {
    let mut r = rng(103);
    for case in 0..EMD_CASES {
        let (m, n) = (r.random_range(2..6), r.random_range(2..20));
        let fvs: Vec<_> = (0..r.random_range(2..7))
            .map(|_| random_features(&mut r, m, n))
            .collect();
        let t = Template::enroll("u", &fvs).map_err(|e| e.to_string())?;
        let expected: f64 = [&t.h_min_first, &t.h_min_second]
            .iter()
            .filter_map(|h| naive_emd(h, m, n))
            .sum();
        let got = emd_complexity(&t).value;
        if got != expected {
            return Err(format!("case {case}: {got} vs {expected}"));
        }
    }
    Ok(format!("{EMD_CASES} templates, exact"))
}

fn short_sample(r: &mut rand_chacha::ChaCha8Rng) -> SignatureSample {
    let n = r.random_range(2..=DTW_MAX_LEN);
    let points = (0..n)
        .map(|i| PenPoint {
            x: r.random_range(-200..200),
            y: r.random_range(-200..200),
            t: i as i64 * 10,
            pressure: Some(r.random_range(0..=1023)),
            pen_down: true,
        })
        .collect();
    SignatureSample::new(points, "d", 1, SampleLabel::Genuine).unwrap()
}

fn dtw_oracle() -> Check {
    let mut r = rng(104);
    let mut worst = 0.0f64;
    for case in 0..DTW_CASES {
        let (a, b) = (short_sample(&mut r), short_sample(&mut r));
        let got = dtw_distance(&a, &b).map_err(|e| e.to_string())?;
        let expected = brute_force_dtw(&dtw_frames(&a).unwrap(), &dtw_frames(&b).unwrap());
        let err = (got - expected).abs();
        if err > DTW_TOL {
            return Err(format!("case {case}: {got} vs {expected}"));
        }
        worst = worst.max(err);
    }
    Ok(format!(
        "{DTW_CASES} pairs of length <= {DTW_MAX_LEN}, max error {worst:e}"
    ))
}

fn spearman_oracle() -> Check {
    let mut r = rng(105);
    let mut worst = 0.0f64;
    for case in 0..SPEARMAN_CASES {
        let n = r.random_range(3..60);
        let x: Vec<f64> = (0..n)
            .map(|i| i as f64 + r.random_range(0.0..0.9))
            .collect();
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-1e3..1e3)).collect();
        let rho = spearman(&x, &y).map_err(|e| e.to_string())?;
        let err = (rho - pearson(&plain_ranks(&x), &plain_ranks(&y))).abs();
        if err > SPEARMAN_TOL {
            return Err(format!("case {case}: error {err:e}"));
        }
        worst = worst.max(err);
        let rev: Vec<f64> = x.iter().map(|v| -v).collect();
        if spearman(&x, &x).unwrap() != 1.0 || spearman(&x, &rev).unwrap() != -1.0 {
            return Err(format!("case {case}: identity/reversal not exactly +1/-1"));
        }
    }
    Ok(format!(
        "{SPEARMAN_CASES} cases, max error {worst:e}; identity +1, reversal -1 exact"
    ))
}

fn curve_set_monotone(set: &CurveGroupSet) -> bool {
    let up = |c: &[f64]| c.windows(2).all(|w| w[1] >= w[0]);
    let down = |c: &[f64]| c.windows(2).all(|w| w[1] <= w[0]);
    up(&set.pooled_far)
        && down(&set.pooled_frr)
        && set
            .groups
            .iter()
            .all(|g| g.far.as_deref().is_none_or(up) && g.frr.as_deref().is_none_or(down))
}

fn monotonicity(pipeline: &EvalReport) -> Check {
    let mut r = rng(106);
    let mut curves = 0;
    for case in 0..REPEATABILITY_CASES {
        let g: Vec<f64> = (0..r.random_range(1..80))
            .map(|_| r.random_range(0.0..50.0))
            .collect();
        let i: Vec<f64> = (0..r.random_range(1..80))
            .map(|_| r.random_range(0.0..50.0))
            .collect();
        let all: Vec<f64> = g.iter().chain(&i).copied().collect();
        let grid = threshold_grid(&all);
        let far = far_curve(&i, &grid).unwrap();
        let frr = frr_curve(&g, &grid).unwrap();
        if far.windows(2).any(|w| w[1] < w[0]) || frr.windows(2).any(|w| w[1] > w[0]) {
            return Err(format!("random curve {case} not monotone"));
        }
        curves += 2;

        let scores: Vec<f64> = (0..r.random_range(1..30))
            .map(|_| r.random_range(0.01..20.0))
            .collect();
        let before = repeatability(&scores).unwrap().value;
        let mut bumped = scores.clone();
        let k = r.random_range(0..scores.len());
        bumped[k] += r.random_range(1e-6..5.0);
        if repeatability(&bumped).unwrap().value >= before {
            return Err(format!("repeatability case {case} did not decrease"));
        }
    }
    for set in &pipeline.curve_sets {
        if !curve_set_monotone(set) {
            return Err(format!("pipeline curve set {} not monotone", set.name()));
        }
        curves += 2 + 2 * set.groups.len();
    }
    Ok(format!("{curves} curves monotone; R decreased in {REPEATABILITY_CASES}/{REPEATABILITY_CASES} cases"))
}

fn corpus(seed: u64, consistency: Consistency) -> Dataset {
    synth_corpus(&SynthParams {
        seed,
        n_users: 20,
        samples_per_user: 20,
        sessions: 2,
        consistency,
        complexity_knob: 1.0,
    })
    .expect("synthetic corpus")
    .dataset()
}

fn pipeline_outputs(report: &EvalReport, matrix: &ScoreMatrix) -> Vec<String> {
    vec![
        report.to_json(),
        report.curves_csv(),
        report.spearman_csv(),
        report.ranks_csv(),
        report.gating_csv(),
        report.roc_csv(),
        matrix.to_csv(),
    ]
}

fn seeded_pipeline() -> (EvalReport, ScoreMatrix) {
    let protocol = Protocol {
        enroll_count: 5,
        enroll_selection: EnrollSelection::RandomRepeated { times: 3, seed: 7 },
        validation_count: 3,
        imposter_source: ImposterSource::RandomForgery,
        random_forgeries_per_user: None,
    };
    signature_experiment(
        &corpus(7, Consistency::Fixed(0.8)),
        &HistogramSpec::default(),
        &protocol,
        VerifierKind::Histogram,
        PopulationSource::GenericAssumption,
        147,
        &EvalSettings::default(),
    )
    .expect("seeded pipeline")
}

fn determinism(first: &(EvalReport, ScoreMatrix)) -> Check {
    let second = seeded_pipeline();
    let (a, b) = (
        pipeline_outputs(&first.0, &first.1),
        pipeline_outputs(&second.0, &second.1),
    );
    if a != b {
        return Err("reports differ between runs".into());
    }
    let bytes: usize = a.iter().map(String::len).sum();
    Ok(format!("seed 7 pipeline twice, {bytes} bytes identical"))
}

fn curve_set(report: &EvalReport, metric: MetricKind) -> Result<&CurveGroupSet, String> {
    report
        .curve_sets
        .iter()
        .find(|s| s.metric == metric && s.imposter_kind == ScoreKind::RandomForgery)
        .ok_or_else(|| format!("no {} curve set", metric.as_str()))
}

/// Lowest-quality group error >= highest-quality group error at every
/// threshold whose pooled rate lies in the operating range.
fn ordering(set: &CurveGroupSet, far: bool) -> Check {
    let pooled = if far {
        &set.pooled_far
    } else {
        &set.pooled_frr
    };
    let pick = |g: usize| -> Result<&Vec<f64>, String> {
        let c = if far {
            &set.groups[g].far
        } else {
            &set.groups[g].frr
        };
        c.as_ref()
            .ok_or_else(|| format!("group {} has no curve", g + 1))
    };
    if set.groups.len() != 4 {
        return Err(format!("{} groups", set.groups.len()));
    }
    let (low, high) = (pick(0)?, pick(3)?);
    let (lo, hi) = OPERATING_RANGE;
    let mut checked = 0;
    let mut margin = f64::INFINITY;
    for (t, p) in pooled.iter().enumerate() {
        if *p < lo || *p > hi {
            continue;
        }
        checked += 1;
        margin = margin.min(low[t] - high[t]);
        if low[t] < high[t] {
            return Err(format!(
                "threshold {:.6}: group 1 {:.4} < group 4 {:.4}",
                set.thresholds[t], low[t], high[t]
            ));
        }
    }
    if checked == 0 {
        return Err("no threshold in the operating range".into());
    }
    Ok(format!("{checked} thresholds, min margin {margin:.4}"))
}

fn load_signature(var: &str) -> Option<Result<Dataset, String>> {
    let path = PathBuf::from(std::env::var_os(var)?);
    Some(match load_dataset(&path) {
        Ok(LoadedDataset::Signature(d)) => Ok(d),
        Ok(LoadedDataset::Keystroke(_)) => {
            Err(format!("{} is a keystroke manifest", path.display()))
        }
        Err(e) => Err(e.to_string()),
    })
}

fn eer_of(report: &EvalReport, kind: ScoreKind) -> Result<f64, String> {
    report
        .pooled
        .iter()
        .find(|p| p.imposter_kind == kind)
        .and_then(|p| p.eer)
        .ok_or_else(|| format!("no {} EER", kind.as_str()))
}

fn rho_of(
    report: &EvalReport,
    metric: MetricKind,
    kind: ScoreKind,
    stat: GoldenStatistic,
) -> Result<f64, String> {
    report
        .spearman
        .iter()
        .find(|r| r.metric == metric && r.score_kind == kind && r.statistic == stat)
        .and_then(|r| r.rho)
        .ok_or_else(|| {
            format!(
                "no rho for {} vs {} {}",
                metric.as_str(),
                kind.as_str(),
                stat.name()
            )
        })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (
        m,
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt(),
    )
}

fn pinned(label: &str, value: f64, target: (f64, f64)) -> Check {
    let text = format!("{label} {value:.4} (target {} +/- {})", target.0, target.1);
    if within(value, target) {
        Ok(text)
    } else {
        Err(text)
    }
}

fn repeated_protocol(times: usize, validation: usize, imposters: ImposterSource) -> Protocol {
    Protocol {
        enroll_count: 5,
        enroll_selection: EnrollSelection::RandomRepeated { times, seed: 7 },
        validation_count: validation,
        imposter_source: imposters,
        random_forgeries_per_user: None,
    }
}

fn run_signature(
    d: &Dataset,
    protocol: &Protocol,
    verifier: VerifierKind,
    pop: PopulationSource,
) -> Result<EvalReport, String> {
    signature_experiment(
        d,
        &HistogramSpec::default(),
        protocol,
        verifier,
        pop,
        147,
        &EvalSettings::default(),
    )
    .map(|(r, _)| r)
    .map_err(|e| e.to_string())
}

fn mcyt(t: &mut Tally, d: &Dataset) {
    let protocol = repeated_protocol(100, 0, ImposterSource::RandomForgery);
    let start = Instant::now();
    let hist = run_signature(
        d,
        &protocol,
        VerifierKind::Histogram,
        PopulationSource::GenericAssumption,
    );
    match &hist {
        Ok(r) => {
            t.line(
                "3 mcyt histogram RF EER",
                eer_of(r, ScoreKind::RandomForgery).and_then(|e| pinned("EER", e, MCYT_HIST_EER)),
            );
            let d_values: Vec<f64> = r
                .templates
                .iter()
                .filter_map(|q| q.distinctiveness)
                .collect();
            let (m, s) = mean_std(&d_values);
            t.line(
                "3 mcyt distinctiveness mean",
                pinned("mean", m, MCYT_D_MEAN),
            );
            t.line("3 mcyt distinctiveness std", pinned("std", s, MCYT_D_STD));
            t.line(
                "3 mcyt spearman generic",
                rho_of(
                    r,
                    MetricKind::Distinctiveness,
                    ScoreKind::RandomForgery,
                    GoldenStatistic::MeanAll,
                )
                .and_then(|v| pinned("rho", v, MCYT_RHO_GENERIC)),
            );
        }
        Err(e) => {
            t.line("3 mcyt histogram", Err(e.clone()));
        }
    }
    let dtw = run_signature(
        d,
        &protocol,
        VerifierKind::Dtw,
        PopulationSource::GenericAssumption,
    );
    t.line(
        "3 mcyt dtw RF EER",
        dtw.and_then(|r| eer_of(&r, ScoreKind::RandomForgery))
            .and_then(|e| pinned("EER", e, MCYT_DTW_EER)),
    );
    let elapsed = start.elapsed();
    t.line(
        "3 mcyt runtime",
        if elapsed <= MCYT_BUDGET {
            Ok(format!("{elapsed:.1?}"))
        } else {
            Err(format!("{elapsed:.1?} over {MCYT_BUDGET:?}"))
        },
    );
    let empirical = run_signature(
        d,
        &protocol,
        VerifierKind::Histogram,
        PopulationSource::DatasetEmpirical,
    );
    t.line(
        "3 mcyt spearman empirical",
        empirical
            .and_then(|r| {
                rho_of(
                    &r,
                    MetricKind::Distinctiveness,
                    ScoreKind::RandomForgery,
                    GoldenStatistic::MeanAll,
                )
            })
            .and_then(|v| pinned("rho", v, MCYT_RHO_EMPIRICAL)),
    );
}

fn susig(t: &mut Tally, d: &Dataset) {
    let protocol = Protocol {
        enroll_count: 5,
        enroll_selection: EnrollSelection::FirstSession,
        validation_count: 5,
        imposter_source: ImposterSource::Both,
        random_forgeries_per_user: None,
    };
    let report = match run_signature(
        d,
        &protocol,
        VerifierKind::Histogram,
        PopulationSource::GenericAssumption,
    ) {
        Ok(r) => r,
        Err(e) => {
            t.line("3 susig", Err(e));
            return;
        }
    };
    let d_values: Vec<f64> = report
        .templates
        .iter()
        .filter_map(|q| q.distinctiveness)
        .collect();
    t.line(
        "3 susig distinctiveness mean",
        pinned("mean", mean_std(&d_values).0, SUSIG_D_MEAN),
    );
    let Some(g) = &report.gating else {
        t.line("3 susig gating", Err("no gating summary".into()));
        return;
    };
    let row = |name: &str| g.rows.iter().find(|r| r.gated_by == name);
    let pair = |name: &str,
                f: fn(&sigqual::eval::GatingRow) -> Option<f64>|
     -> Result<(f64, f64), String> {
        let before = row("none").and_then(f);
        let after = row(name).and_then(f);
        before
            .zip(after)
            .ok_or_else(|| format!("missing gating row {name}"))
    };
    let check_pair = |(before, after): (f64, f64), ((b0, a0), tol): ((f64, f64), f64)| {
        let text = format!("{before:.4} -> {after:.4} (target {b0} -> {a0} +/- {tol})");
        if within(before, (b0, tol)) && within(after, (a0, tol)) {
            Ok(text)
        } else {
            Err(text)
        }
    };
    t.line(
        "3 susig gating FAR-RF",
        pair("distinctiveness", |r| r.far_rf).and_then(|p| check_pair(p, SUSIG_FAR_RF)),
    );
    t.line(
        "3 susig gating FRR",
        pair("repeatability", |r| r.frr).and_then(|p| check_pair(p, SUSIG_FRR)),
    );
    t.line(
        "3 susig gating HTER",
        pair("combined", |r| r.hter_rf).and_then(|(b, a)| {
            let gain = (b - a) / b;
            let text = format!(
                "{b:.4} -> {a:.4}, {:.1}% relative (need >= {:.0}%)",
                100.0 * gain,
                100.0 * SUSIG_HTER_GAIN
            );
            if gain >= SUSIG_HTER_GAIN {
                Ok(text)
            } else {
                Err(text)
            }
        }),
    );
}

fn cmu(t: &mut Tally, path: PathBuf) {
    let outcome = (|| -> Result<f64, String> {
        let LoadedDataset::Keystroke(ds) = load_dataset(&path).map_err(|e| e.to_string())? else {
            return Err(format!("{} is not a keystroke manifest", path.display()));
        };
        let protocol = Protocol {
            enroll_count: 200,
            enroll_selection: EnrollSelection::FirstSamples,
            validation_count: 50,
            imposter_source: ImposterSource::RandomForgery,
            random_forgeries_per_user: Some(5),
        };
        let (report, _) = keystroke_experiment(&ds, &protocol, &EvalSettings::default())
            .map_err(|e| e.to_string())?;
        rho_of(
            &report,
            MetricKind::Repeatability,
            ScoreKind::Genuine,
            GoldenStatistic::MaxScore,
        )
    })();
    t.line(
        "3 cmu spearman repeatability",
        outcome.and_then(|v| pinned("rho", v, CMU_RHO)),
    );
}

fn main() -> ExitCode {
    let mut t = Tally::default();

    println!("criterion 1: property suite");
    let suite = Instant::now();
    t.line("1 feature invariance", feature_invariance());
    t.line("1 binomial model", binomial_model());
    t.line("1 EMD oracle", emd_oracle());
    t.line("1 DTW oracle", dtw_oracle());
    t.line("1 Spearman oracle", spearman_oracle());
    let first = seeded_pipeline();
    t.line("1 monotonicity", monotonicity(&first.0));
    t.line("1 determinism", determinism(&first));
    let elapsed = suite.elapsed();
    t.line(
        "1 runtime",
        if elapsed < SUITE_BUDGET {
            Ok(format!("{elapsed:.1?}"))
        } else {
            Err(format!("{elapsed:.1?} over {SUITE_BUDGET:?}"))
        },
    );

    println!("criterion 2: synthetic ordering experiment");
    let start = Instant::now();
    let protocol = Protocol {
        enroll_count: 5,
        enroll_selection: EnrollSelection::FirstSession,
        validation_count: 5,
        imposter_source: ImposterSource::RandomForgery,
        random_forgeries_per_user: None,
    };
    let settings = EvalSettings {
        curve_points: usize::MAX,
        ..EvalSettings::default()
    };
    match signature_experiment(
        &corpus(7, Consistency::Choice(vec![0.6, 0.95])),
        &HistogramSpec::default(),
        &protocol,
        VerifierKind::Histogram,
        PopulationSource::GenericAssumption,
        147,
        &settings,
    ) {
        Ok((report, _)) => {
            t.line(
                "2 distinctiveness quartile FAR ordering",
                curve_set(&report, MetricKind::Distinctiveness).and_then(|s| ordering(s, true)),
            );
            t.line(
                "2 repeatability quartile FRR ordering",
                curve_set(&report, MetricKind::Repeatability).and_then(|s| ordering(s, false)),
            );
        }
        Err(e) => {
            t.line("2 synthetic experiment", Err(e.to_string()));
        }
    }
    let elapsed = start.elapsed();
    t.line(
        "2 runtime",
        if elapsed < ORDERING_BUDGET {
            Ok(format!("{elapsed:.1?}"))
        } else {
            Err(format!("{elapsed:.1?} over {ORDERING_BUDGET:?}"))
        },
    );

    println!("criterion 3: licensed dataset reproduction");
    match load_signature("SIGQUAL_MCYT_MANIFEST") {
        Some(Ok(d)) => mcyt(&mut t, &d),
        Some(Err(e)) => {
            t.line("3 mcyt", Err(e));
        }
        None => t.not_run(
            "3 mcyt",
            "licensed MCYT data required; set SIGQUAL_MCYT_MANIFEST",
        ),
    }
    match load_signature("SIGQUAL_SUSIG_MANIFEST") {
        Some(Ok(d)) => susig(&mut t, &d),
        Some(Err(e)) => {
            t.line("3 susig", Err(e));
        }
        None => t.not_run(
            "3 susig",
            "licensed SUSIG data required; set SIGQUAL_SUSIG_MANIFEST",
        ),
    }
    match std::env::var_os("SIGQUAL_CMU_MANIFEST") {
        Some(p) => cmu(&mut t, PathBuf::from(p)),
        None => t.not_run(
            "3 cmu",
            "CMU keystroke data required; set SIGQUAL_CMU_MANIFEST",
        ),
    }

    if t.failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{} check(s) failed", t.failed);
        ExitCode::FAILURE
    }
}

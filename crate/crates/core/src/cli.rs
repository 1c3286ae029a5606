//! Batch command-line front end.
//!
//! Every subcommand reads an optional TOML run config (`--config`); flags
//! given on the command line override config values. Exit codes: 0 success,
//! 1 finished with data-quality warnings, 2 usage, config or input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::eval::{
    keystroke_experiment, signature_experiment, signature_quality, EnrollSelection, EvalReport,
    EvalSettings, ImposterSource, MetricKind, Protocol, ScoreMatrix, TemplateQuality,
};
use crate::features::{extract_features, features_csv, HistogramSpec};
use crate::ingest::{
    load_dataset, render_keystroke_csv, synth_corpus, synth_keystroke, write_corpus, Consistency,
    DatasetManifest, LoadedDataset, Modality, SynthParams, MANIFEST_FILE, MANIFEST_SCHEMA_VERSION,
};
use crate::quality::{PopulationSource, DEFAULT_L_POP};
use crate::verify::VerifierKind;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "sigqual",
    version,
    about = "Template quality for online signatures and keystroke dynamics"
)]
pub struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one feature CSV per user.
    Extract(CommonArgs),
    /// Score distinctiveness, complexity and repeatability per template.
    Quality(CommonArgs),
    /// Run the verification protocol and the quality-vs-error analysis.
    Eval(CommonArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Evaluate an external score matrix (no verifier run).
    ImportScores(ImportArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML run config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset manifest (manifest.json).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// histogram | dtw | keystroke_euclidean
    #[arg(long)]
    pub verifier: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// random_repeated | first_session | first_samples
    #[arg(long)]
    pub enroll_selection: Option<String>,
    #[arg(long)]
    pub enroll_count: Option<usize>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub validation_count: Option<usize>,
    /// random_forgery | skilled_forgery | both | none
    #[arg(long)]
    pub imposters: Option<String>,
    /// generic | empirical
    #[arg(long)]
    pub population: Option<String>,
    #[arg(long)]
    pub l_pop: Option<u32>,
    #[arg(long)]
    pub gate_fraction: Option<f64>,
    /// Comma-separated subset of distinctiveness,complexity,repeatability.
    #[arg(long)]
    pub metrics: Option<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub users: Option<usize>,
    /// Genuine samples per user (keystroke: repetitions per session).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub sessions: Option<u32>,
    /// One value, or comma-separated levels drawn per user.
    #[arg(long)]
    pub consistency: Option<String>,
    #[arg(long)]
    pub complexity_knob: Option<f64>,
    /// Generate keystroke timings instead of signatures.
    #[arg(long)]
    pub keystroke: bool,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Score matrix CSV: test_user,test_session,test_label,target_user,score
    #[arg(long)]
    pub scores: PathBuf,
    /// Per-template quality CSV as written by `quality`.
    #[arg(long)]
    pub quality: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub gate_fraction: Option<f64>,
    #[arg(long)]
    pub metrics: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureConfig {
    pub speed_edges: Vec<f64>,
    pub angle_bins: usize,
    pub pressure_bins: usize,
    pub use_time_delta: bool,
    pub require_pressure: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        let s = HistogramSpec::default();
        FeatureConfig {
            speed_edges: s.speed_edges,
            angle_bins: s.angle_bins,
            pressure_bins: s.pressure_bins,
            use_time_delta: s.use_time_delta,
            require_pressure: s.require_pressure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub enroll_selection: String,
    pub enroll_count: usize,
    pub repetitions: usize,
    pub validation_count: usize,
    pub imposters: String,
    pub random_forgeries_per_user: Option<usize>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            enroll_selection: "random_repeated".into(),
            enroll_count: 5,
            repetitions: 1,
            validation_count: 0,
            imposters: "random_forgery".into(),
            random_forgeries_per_user: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QualityConfig {
    pub population: String,
    pub l_pop: u32,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig {
            population: "generic".into(),
            l_pop: DEFAULT_L_POP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub gate_fraction: f64,
    pub curve_points: usize,
    pub k_lowest: usize,
    pub k_highest: usize,
    pub metrics: Vec<String>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let s = EvalSettings::default();
        EvalConfig {
            gate_fraction: s.gate_fraction,
            curve_points: s.curve_points,
            k_lowest: s.k_lowest,
            k_highest: s.k_highest,
            metrics: s.metrics.iter().map(|m| m.as_str().to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub users: usize,
    pub samples: usize,
    pub sessions: u32,
    pub consistency: Vec<f64>,
    pub complexity_knob: f64,
    pub keystroke: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            users: 20,
            samples: 20,
            sessions: 2,
            consistency: vec![0.6, 0.95],
            complexity_knob: 1.0,
            keystroke: false,
        }
    }
}

/// Versioned run configuration. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub verifier: String,
    pub seed: u64,
    pub features: FeatureConfig,
    pub protocol: ProtocolConfig,
    pub quality: QualityConfig,
    pub eval: EvalConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            manifest: None,
            out: None,
            verifier: "histogram".into(),
            seed: 7,
            features: FeatureConfig::default(),
            protocol: ProtocolConfig::default(),
            quality: QualityConfig::default(),
            eval: EvalConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

#[derive(Debug)]
pub struct CliError(pub String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn fail<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError(msg.into()))
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<RunConfig> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text =
            fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
        if cfg.schema_version != CONFIG_SCHEMA_VERSION {
            return fail(format!(
                "{}: unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                path.display(),
                cfg.schema_version
            ));
        }
        Ok(cfg)
    }

    fn apply(&mut self, a: &CommonArgs) -> CliResult<()> {
        macro_rules! set {
            ($($field:ident).+ <- $arg:expr) => {
                if let Some(v) = $arg.clone() {
                    self.$($field).+ = v;
                }
            };
        }
        if a.manifest.is_some() {
            self.manifest = a.manifest.clone();
        }
        if a.out.is_some() {
            self.out = a.out.clone();
        }
        set!(verifier <- a.verifier);
        set!(seed <- a.seed);
        set!(protocol.enroll_selection <- a.enroll_selection);
        set!(protocol.enroll_count <- a.enroll_count);
        set!(protocol.repetitions <- a.repetitions);
        set!(protocol.validation_count <- a.validation_count);
        set!(protocol.imposters <- a.imposters);
        set!(quality.population <- a.population);
        set!(quality.l_pop <- a.l_pop);
        set!(eval.gate_fraction <- a.gate_fraction);
        if let Some(m) = &a.metrics {
            self.eval.metrics = split_list(m);
        }
        Ok(())
    }

    pub fn spec(&self) -> CliResult<HistogramSpec> {
        let f = &self.features;
        let spec = HistogramSpec {
            speed_edges: f.speed_edges.clone(),
            angle_bins: f.angle_bins,
            pressure_bins: f.pressure_bins,
            use_time_delta: f.use_time_delta,
            require_pressure: f.require_pressure,
            ..HistogramSpec::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn verifier_kind(&self) -> CliResult<VerifierKind> {
        match self.verifier.as_str() {
            "histogram" => Ok(VerifierKind::Histogram),
            "dtw" => Ok(VerifierKind::Dtw),
            "keystroke_euclidean" => Ok(VerifierKind::KeystrokeEuclidean),
            v => fail(format!("unknown verifier {v:?}")),
        }
    }

    pub fn protocol(&self) -> CliResult<Protocol> {
        let p = &self.protocol;
        let enroll_selection = match p.enroll_selection.as_str() {
            "random_repeated" => {
                if p.repetitions == 0 {
                    return fail("protocol.repetitions must be at least 1");
                }
                EnrollSelection::RandomRepeated {
                    times: p.repetitions,
                    seed: self.seed,
                }
            }
            "first_session" => EnrollSelection::FirstSession,
            "first_samples" => EnrollSelection::FirstSamples,
            s => return fail(format!("unknown enroll_selection {s:?}")),
        };
        let imposter_source = match p.imposters.as_str() {
            "random_forgery" => ImposterSource::RandomForgery,
            "skilled_forgery" => ImposterSource::SkilledForgery,
            "both" => ImposterSource::Both,
            "none" => ImposterSource::None,
            s => return fail(format!("unknown imposter source {s:?}")),
        };
        if p.enroll_count < 2 {
            return fail("protocol.enroll_count must be at least 2");
        }
        Ok(Protocol {
            enroll_count: p.enroll_count,
            enroll_selection,
            validation_count: p.validation_count,
            imposter_source,
            random_forgeries_per_user: p.random_forgeries_per_user,
        })
    }

    pub fn population(&self) -> CliResult<PopulationSource> {
        match self.quality.population.as_str() {
            "generic" => Ok(PopulationSource::GenericAssumption),
            "empirical" => Ok(PopulationSource::DatasetEmpirical),
            s => fail(format!("unknown population {s:?}")),
        }
    }

    pub fn eval_settings(&self) -> CliResult<EvalSettings> {
        let e = &self.eval;
        if !(e.gate_fraction > 0.0 && e.gate_fraction < 1.0) {
            return fail(format!(
                "gate_fraction must lie in (0, 1), got {}",
                e.gate_fraction
            ));
        }
        let metrics = e
            .metrics
            .iter()
            .map(|m| MetricKind::parse(m).ok_or_else(|| CliError(format!("unknown metric {m:?}"))))
            .collect::<CliResult<Vec<_>>>()?;
        Ok(EvalSettings {
            gate_fraction: e.gate_fraction,
            curve_points: e.curve_points,
            k_lowest: e.k_lowest,
            k_highest: e.k_highest,
            metrics,
        })
    }

    fn manifest_path(&self) -> CliResult<&Path> {
        self.manifest
            .as_deref()
            .ok_or_else(|| CliError("no manifest given (--manifest or config)".into()))
    }

    fn out_dir(&self) -> CliResult<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError("no output directory given (--out or config)".into()))
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(str::to_string)
        .collect()
}

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    Warnings,
}

fn outcome(warn: bool) -> Outcome {
    if warn {
        Outcome::Warnings
    } else {
        Outcome::Clean
    }
}

fn load(cfg: &RunConfig) -> CliResult<LoadedDataset> {
    let path = cfg.manifest_path()?;
    if !path.exists() {
        return fail(format!("manifest not found: {}", path.display()));
    }
    Ok(load_dataset(path)?)
}

pub fn cmd_extract(cfg: &RunConfig) -> CliResult<Outcome> {
    let LoadedDataset::Signature(ds) = load(cfg)? else {
        return fail("extract needs a signature dataset");
    };
    let spec = HistogramSpec {
        pressure_max: ds.pressure_max,
        ..cfg.spec()?
    };
    let out = cfg.out_dir()?;
    let mut warn = false;
    for user in &ds.users {
        let mut rows = Vec::new();
        for s in user.genuine.iter().chain(&user.forgeries) {
            match extract_features(s, &spec) {
                Ok(fv) => rows.push((s, fv)),
                Err(e) => {
                    eprintln!(
                        "warning: user {} session {} ({}): {e}",
                        user.user_id,
                        s.session_id,
                        s.label.as_str()
                    );
                    warn = true;
                }
            }
        }
        let refs: Vec<_> = rows.iter().map(|(s, f)| (*s, f)).collect();
        write(out, &format!("{}.csv", user.user_id), &features_csv(&refs))?;
    }
    Ok(outcome(warn))
}

fn report_quality(out: &Path, rows: &[TemplateQuality]) -> CliResult<bool> {
    write(out, "quality.csv", &TemplateQuality::to_csv(rows))?;
    let json = serde_json::to_string_pretty(rows)? + "\n";
    write(out, "quality.json", &json)?;
    let mut warn = false;
    for r in rows {
        if !r.flags.is_empty() {
            eprintln!("warning: template {}: {}", r.template, r.flags.join(", "));
            warn = true;
        }
    }
    Ok(warn)
}

pub fn cmd_quality(cfg: &RunConfig) -> CliResult<Outcome> {
    let protocol = cfg.protocol()?;
    let out = cfg.out_dir()?.to_path_buf();
    match load(cfg)? {
        LoadedDataset::Signature(ds) => {
            let verifier = cfg.verifier_kind()?;
            if verifier.modality() != Modality::Signature {
                return fail("verifier does not match a signature dataset");
            }
            let rows = signature_quality(
                &ds,
                &cfg.spec()?,
                &protocol,
                verifier,
                cfg.population()?,
                cfg.quality.l_pop,
            )?;
            Ok(outcome(report_quality(&out, &rows)?))
        }
        LoadedDataset::Keystroke(ds) => {
            let protocol = Protocol {
                imposter_source: ImposterSource::None,
                ..protocol
            };
            let (report, _) = keystroke_experiment(&ds, &protocol, &cfg.eval_settings()?)?;
            Ok(outcome(report_quality(&out, &report.templates)?))
        }
    }
}

fn write_report(out: &Path, report: &EvalReport, matrix: Option<&ScoreMatrix>) -> CliResult<bool> {
    write(out, "report.json", &report.to_json())?;
    write(out, "curves.csv", &report.curves_csv())?;
    write(out, "spearman.csv", &report.spearman_csv())?;
    write(out, "ranks.csv", &report.ranks_csv())?;
    write(out, "gating.csv", &report.gating_csv())?;
    write(out, "roc.csv", &report.roc_csv())?;
    write(
        out,
        "quality.csv",
        &TemplateQuality::to_csv(&report.templates),
    )?;
    if let Some(m) = matrix {
        write(out, "scores.csv", &m.to_csv())?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(!report.warnings.is_empty())
}

pub fn cmd_eval(cfg: &RunConfig) -> CliResult<Outcome> {
    let protocol = cfg.protocol()?;
    let settings = cfg.eval_settings()?;
    let out = cfg.out_dir()?.to_path_buf();
    let (report, matrix) = match load(cfg)? {
        LoadedDataset::Signature(ds) => {
            let verifier = cfg.verifier_kind()?;
            if verifier.modality() != Modality::Signature {
                return fail("verifier does not match a signature dataset");
            }
            signature_experiment(
                &ds,
                &cfg.spec()?,
                &protocol,
                verifier,
                cfg.population()?,
                cfg.quality.l_pop,
                &settings,
            )?
        }
        LoadedDataset::Keystroke(ds) => keystroke_experiment(&ds, &protocol, &settings)?,
    };
    Ok(outcome(write_report(&out, &report, Some(&matrix))?))
}

pub fn cmd_synth(cfg: &RunConfig) -> CliResult<Outcome> {
    let s = &cfg.synth;
    let out = cfg.out_dir()?;
    let consistency = match s.consistency.as_slice() {
        [c] => Consistency::Fixed(*c),
        levels => Consistency::Choice(levels.to_vec()),
    };
    if s.keystroke {
        let samples = synth_keystroke(
            cfg.seed,
            s.users,
            s.sessions,
            s.samples as u32,
            &consistency,
        )?;
        write(out, "timings.csv", &render_keystroke_csv(&samples)?)?;
        let manifest = DatasetManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            modality: Modality::Keystroke,
            pressure_max: None,
            keystroke_file: Some("timings.csv".into()),
            users: Vec::new(),
        };
        write(out, MANIFEST_FILE, &manifest.to_json())?;
    } else {
        let corpus = synth_corpus(&SynthParams {
            seed: cfg.seed,
            n_users: s.users,
            samples_per_user: s.samples,
            sessions: s.sessions,
            consistency,
            complexity_knob: s.complexity_knob,
        })?;
        write_corpus(&corpus, out)?;
    }
    Ok(Outcome::Clean)
}

pub fn cmd_import_scores(
    cfg: &RunConfig,
    scores: &Path,
    quality: Option<&Path>,
) -> CliResult<Outcome> {
    let settings = cfg.eval_settings()?;
    let out = cfg.out_dir()?.to_path_buf();
    let read =
        |p: &Path| fs::read_to_string(p).map_err(|e| CliError(format!("{}: {e}", p.display())));
    let matrix = ScoreMatrix::from_csv(&read(scores)?)
        .map_err(|e| CliError(format!("{}: {e}", scores.display())))?;
    let keys = matrix.template_keys();
    let mut warn = false;
    let rows: Vec<TemplateQuality> = match quality {
        Some(p) => {
            let parsed = TemplateQuality::from_csv(&read(p)?)
                .map_err(|e| CliError(format!("{}: {e}", p.display())))?;
            keys.iter()
                .zip(&matrix.templates)
                .map(|(k, info)| {
                    parsed
                        .iter()
                        .find(|q| &q.template == k)
                        .cloned()
                        .unwrap_or_else(|| {
                            eprintln!("warning: no quality row for template {k}");
                            warn = true;
                            let mut q = TemplateQuality::empty(k, &info.user_id);
                            q.flags.push("quality_missing".into());
                            q
                        })
                })
                .collect()
        }
        None => keys
            .iter()
            .zip(&matrix.templates)
            .zip(&matrix.scores)
            .map(|((k, info), s)| {
                let mut q = TemplateQuality::empty(k, &info.user_id);
                match crate::quality::repeatability(&s.scores(crate::eval::ScoreKind::Validation)) {
                    Ok(r) => q.repeatability = Some(r.value),
                    Err(_) => q.flags.push("repeatability_absent".into()),
                }
                q
            })
            .collect(),
    };
    let report = crate::eval::evaluate(&matrix, &rows, None, &settings)?;
    Ok(outcome(write_report(&out, &report, None)? || warn))
}

fn dispatch(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Extract(a) | Command::Quality(a) | Command::Eval(a) => {
            let mut cfg = RunConfig::load(a.config.as_deref())?;
            cfg.apply(a)?;
            match &cli.command {
                Command::Extract(_) => cmd_extract(&cfg),
                Command::Quality(_) => cmd_quality(&cfg),
                _ => cmd_eval(&cfg),
            }
        }
        Command::Synth(a) => {
            let mut cfg = RunConfig::load(a.config.as_deref())?;
            if a.out.is_some() {
                cfg.out = a.out.clone();
            }
            if let Some(v) = a.seed {
                cfg.seed = v;
            }
            let s = &mut cfg.synth;
            if let Some(v) = a.users {
                s.users = v;
            }
            if let Some(v) = a.samples {
                s.samples = v;
            }
            if let Some(v) = a.sessions {
                s.sessions = v;
            }
            if let Some(v) = &a.consistency {
                s.consistency = split_list(v)
                    .iter()
                    .map(|x| x.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError(format!("--consistency: {e}")))?;
            }
            if let Some(v) = a.complexity_knob {
                s.complexity_knob = v;
            }
            if a.keystroke {
                s.keystroke = true;
            }
            cmd_synth(&cfg)
        }
        Command::ImportScores(a) => {
            let mut cfg = RunConfig::load(a.config.as_deref())?;
            if a.out.is_some() {
                cfg.out = a.out.clone();
            }
            if let Some(v) = a.gate_fraction {
                cfg.eval.gate_fraction = v;
            }
            if let Some(m) = &a.metrics {
                cfg.eval.metrics = split_list(m);
            }
            cmd_import_scores(&cfg, &a.scores, a.quality.as_deref())
        }
    }
}

/// Parses `args`, runs the command on a pool of the requested size and maps
/// the result to an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Warnings) => ExitCode::from(1),
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

//! Evaluation harness: protocol-driven score matrices, error curves,
//! rank statistics, template gating and the end-to-end experiment report.

mod curves;
mod experiment;
mod protocol;
mod stats;

use thiserror::Error;

pub use curves::{
    eer, far_curve, far_frr, frr_curve, group_mean, hter, quartile_groups, roc, subsample_grid,
    threshold_grid, ErrorCurve, QuartileGroups,
};
pub use experiment::{
    evaluate, keystroke_experiment, signature_experiment, signature_quality, CurveGroupSet,
    EvalReport, EvalSettings, GatingRow, GatingSummary, GroupCurve, MetricKind, PooledRates,
    RankTable, RocSummary, SpearmanRow, TemplateQuality, REPORT_SCHEMA_VERSION,
};
pub use protocol::{
    run_protocol, EnrollSelection, ImposterSource, Protocol, ScoreCell, ScoreKind, ScoreMatrix,
    Split, TemplateInfo, TemplateScores, UserSamples,
};
pub use stats::{
    average_ranks, gate_multi, gate_templates, golden_rank, pearson, spearman, GateOutcome,
    GoldenRank, GoldenStatistic, RankOrder,
};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("score set is empty")]
    EmptyScores,
    #[error("FAR and FRR never cross on this curve")]
    NoCrossing,
    #[error("need at least 4 templates, got {0}")]
    TooFewTemplates(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("k = {k} exceeds list length {len}")]
    KTooLarge { k: usize, len: usize },
    #[error("fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("rate {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("user {user}: {needed} genuine samples required, {available} available")]
    InsufficientSamples {
        user: String,
        needed: usize,
        available: usize,
    },
    #[error("non-finite value")]
    NonFinite,
    #[error("score csv: {0}")]
    ScoreCsv(String),
    #[error(transparent)]
    Verify(#[from] crate::verify::VerifyError),
    #[error(transparent)]
    Feature(#[from] crate::features::FeatureError),
    #[error(transparent)]
    Quality(#[from] crate::quality::QualityError),
}

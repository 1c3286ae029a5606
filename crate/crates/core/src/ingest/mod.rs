//! Raw data ingestion: SVC pen files, keystroke CSV, dataset manifests and
//! the seeded synthetic corpus generator.

mod keystroke;
mod manifest;
mod svc;
mod synth;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use keystroke::{
    parse_keystroke_csv, render_keystroke_csv, KEYSTROKE_FEATURE_COUNT, KEYSTROKE_FEATURE_NAMES,
};
pub use manifest::{
    load_dataset, Dataset, DatasetManifest, ForgeryRef, KeystrokeDataset, LoadedDataset, Modality,
    SessionRefs, UserData, UserEntry, MANIFEST_FILE, MANIFEST_SCHEMA_VERSION,
};
pub use svc::{parse_svc, render_svc};
pub use synth::{
    synth_corpus, synth_keystroke, write_corpus, Consistency, SynthCorpus, SynthParams,
};

/// Default full-scale pressure for Wacom-class tablets.
pub const DEFAULT_PRESSURE_MAX: u32 = 1023;

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("malformed header: expected a point count, found {0:?}")]
    MalformedHeader(String),
    #[error("line {line}: expected 4 or 7 columns, found {found}")]
    RowArityError { line: usize, found: usize },
    #[error("line {line}: non-integer field {field:?}")]
    NonIntegerField { line: usize, field: String },
    #[error("header declares {declared} points but {found} rows follow")]
    CountMismatch { declared: usize, found: usize },
    #[error("sample has {0} points, at least 2 are required")]
    SampleTooShort(usize),
    #[error("timestamp decreases at point {0}")]
    NonMonotoneTime(usize),
    #[error("negative pressure at point {0}")]
    NegativePressure(usize),
    #[error("pressure present on some points but not others")]
    MixedPressure,
    #[error("row {row}: expected {expected} columns, found {found}")]
    ColumnCountError {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {column:?}: non-numeric timing {value:?}")]
    NonNumericTiming {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column {column:?}: invalid timing {value}")]
    InvalidTiming {
        row: usize,
        column: String,
        value: f64,
    },
    #[error("row {row}: invalid id field {value:?}")]
    InvalidId { row: usize, value: String },
    #[error("keystroke csv: {0}")]
    Csv(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: Box<IngestError>,
    },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// One pen sample as captured by the tablet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PenPoint {
    pub x: i64,
    pub y: i64,
    /// Milliseconds, non-decreasing within a sample.
    pub t: i64,
    pub pressure: Option<i64>,
    pub pen_down: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleLabel {
    Genuine,
    SkilledForgery,
    RandomForgeryPool,
}

impl SampleLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleLabel::Genuine => "genuine",
            SampleLabel::SkilledForgery => "skilled_forgery",
            SampleLabel::RandomForgeryPool => "random_forgery_pool",
        }
    }
}

/// A single signing act. Construction validates the point invariants, so a
/// `SignatureSample` in hand always has at least two time-ordered points with
/// consistent pressure presence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureSample {
    points: Vec<PenPoint>,
    pub user_id: String,
    pub session_id: u32,
    pub label: SampleLabel,
}

impl SignatureSample {
    pub fn new(
        points: Vec<PenPoint>,
        user_id: impl Into<String>,
        session_id: u32,
        label: SampleLabel,
    ) -> Result<Self, IngestError> {
        if points.len() < 2 {
            return Err(IngestError::SampleTooShort(points.len()));
        }
        let has_pressure = points[0].pressure.is_some();
        for (i, p) in points.iter().enumerate() {
            if p.pressure.is_some() != has_pressure {
                return Err(IngestError::MixedPressure);
            }
            if matches!(p.pressure, Some(v) if v < 0) {
                return Err(IngestError::NegativePressure(i));
            }
            if i > 0 && p.t < points[i - 1].t {
                return Err(IngestError::NonMonotoneTime(i));
            }
        }
        Ok(SignatureSample {
            points,
            user_id: user_id.into(),
            session_id,
            label,
        })
    }

    pub fn points(&self) -> &[PenPoint] {
        &self.points
    }

    pub fn has_pressure(&self) -> bool {
        self.points[0].pressure.is_some()
    }

    pub fn with_identity(
        mut self,
        user_id: impl Into<String>,
        session_id: u32,
        label: SampleLabel,
    ) -> Self {
        self.user_id = user_id.into();
        self.session_id = session_id;
        self.label = label;
        self
    }

    /// Returns a copy with every point shifted by `(dx, dy)`.
    pub fn translated(&self, dx: i64, dy: i64) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| PenPoint {
                x: p.x + dx,
                y: p.y + dy,
                ..*p
            })
            .collect();
        SignatureSample {
            points,
            ..self.clone()
        }
    }

    /// Returns a copy with x and y multiplied by `factor`.
    pub fn scaled(&self, factor: i64) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| PenPoint {
                x: p.x * factor,
                y: p.y * factor,
                ..*p
            })
            .collect();
        SignatureSample {
            points,
            ..self.clone()
        }
    }
}

/// One repetition of the fixed keystroke phrase: 31 hold / down-down /
/// up-down timings in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeystrokeSample {
    pub user_id: String,
    pub session_id: u32,
    pub rep: u32,
    pub features: Vec<f64>,
}

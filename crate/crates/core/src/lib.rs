//! Template quality assessment for online signatures and keystroke dynamics.
//!
//! The crate computes three per-template measures from genuine samples only:
//!
//! * **distinctiveness** — summed decidability between the enrolled histogram
//!   features and a binomial random-signature population model,
//! * **complexity** — earth mover's distance of the min-pooled speed-angle
//!   histogram to a single-bin "simplest signature", times the inverse index
//!   of dispersion of the enrolled features,
//! * **repeatability** — inverse mean dissimilarity of cross-session
//!   validation genuines.
//!
//! Around those measures sit the verifiers used to produce dissimilarity
//! scores ([`verify`]), and the evaluation harness ([`eval`]) that relates
//! quality to FAR/FRR behaviour.

pub mod cli;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod quality;
pub mod verify;

pub use features::{extract_features, FeatureVector, HistogramSpec};
pub use ingest::{KeystrokeSample, PenPoint, SampleLabel, SignatureSample};
pub use quality::{PopulationStats, QualityReport, Template};

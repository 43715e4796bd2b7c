//! Fault identification toolkit for industrial CPS metric traces.
//!
//! The pipeline: ingest timestamped metric traces and phase-event logs, cut
//! them into segments (informed by phase knowledge, or uninformed by time
//! quartiles), fit per-segment regression signatures, compare against mean
//! passports built from normal runs, assemble labelled feature datasets, and
//! train tree-based multi-class classifiers. A sweep harness enumerates
//! knowledge/data-position cases (with data quality simulated by degradation
//! operators), runs the whole pipeline per case, and reports ranked results
//! plus a coverage matrix.
//!
//! Core math is generic over the scalar type via [`num::Real`]; the aliases
//! below fix `f64`, which is what the CLI and the on-disk formats use.

pub mod degrade;
pub mod error;
pub mod features;
pub mod ingest;
pub mod ml;
pub mod sweep;
pub mod num;
pub mod passport;
pub mod seed;
pub mod segmentation;
pub mod trace;

pub use error::{Error, Result};
pub use num::Real;

/// `f64` aliases for the pipeline types, used by the CLI and file formats.
pub type Sample64 = trace::Sample<f64>;
pub type Trace64 = trace::MetricTrace<f64>;
pub type Event64 = trace::PhaseEvent<f64>;
pub type Interval64 = trace::PhaseInterval<f64>;
pub type Segment64 = trace::Segment<f64>;
pub type Signature64 = passport::RegressionSignature<f64>;
pub type Passport64 = passport::Passport<f64>;
pub type PassportStore64 = passport::PassportStore<f64>;
pub type FeatureRow64 = features::FeatureRow<f64>;
pub type Dataset64 = features::Dataset<f64>;
pub type Model64 = ml::Model<f64>;
pub type TrainingSet64 = ml::TrainingSet<f64>;
pub type Context64 = sweep::SweepContext<f64>;

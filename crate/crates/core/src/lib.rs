//! Surface-EMG gesture recognition toolkit.
//!
//! The pipeline runs ingest -> bandpass -> segment -> extract -> split ->
//! standardize -> fit -> predict -> metrics. Each stage lives in its own
//! module and can be used on its own:
//!
//! - [`signal`]: canonical CSV/JSON-manifest datasets, a format-16 WFDB
//!   reader and a seeded synthetic generator.
//! - [`preprocess`]: zero-phase Butterworth bandpass and sliding windows.
//! - [`features`]: fused time-domain descriptors, temporal-spatial
//!   descriptors and sym8 wavelet subband features.
//! - [`classify`]: LDA, linear SVM, KNN, random forest, bagging, AdaBoost
//!   and hard voting behind one fit/predict contract.
//! - [`eval`]: stratified splits, confusion-matrix metrics and the
//!   feature x classifier benchmark grid.

pub mod classify;
pub mod error;
pub mod eval;
pub mod features;
pub mod preprocess;
pub mod signal;

pub use error::{Error, Result};

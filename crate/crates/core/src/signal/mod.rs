//! Signal records and dataset ingestion.

mod canonical;
mod synth;
mod wfdb;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use canonical::{
    load_canonical_csv, load_dataset, read_record_csv, write_dataset, write_record_csv, Dataset,
    DatasetManifest, ManifestEntry,
};
pub use synth::{generate_synthetic, SyntheticSpec};
pub use wfdb::{load_wfdb_record, WfdbHeader, WfdbSignalSpec};

/// One multi-channel sEMG trial, stored channel-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRecord {
    samples: Vec<Vec<f64>>,
    fs: f64,
    label: usize,
    subject: String,
    session: String,
}

impl SignalRecord {
    /// Builds a record, checking that `fs > 0`, every channel has the same
    /// length of at least two samples and every sample is finite.
    pub fn new(
        samples: Vec<Vec<f64>>,
        fs: f64,
        label: usize,
        subject: impl Into<String>,
        session: impl Into<String>,
    ) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidRecord(format!("sampling rate must be > 0, got {fs}")));
        }
        let Some(first) = samples.first() else {
            return Err(Error::InvalidRecord("no channels".into()));
        };
        let len = first.len();
        if len < 2 {
            return Err(Error::InvalidRecord(format!(
                "channels need at least 2 samples, got {len}"
            )));
        }
        for (c, ch) in samples.iter().enumerate() {
            if ch.len() != len {
                return Err(Error::InvalidRecord(format!(
                    "channel {c} has {} samples, channel 0 has {len}",
                    ch.len()
                )));
            }
            if let Some(t) = ch.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidRecord(format!(
                    "non-finite sample at channel {c}, index {t}"
                )));
            }
        }
        Ok(Self {
            samples,
            fs,
            label,
            subject: subject.into(),
            session: session.into(),
        })
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.samples[c]
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn session(&self) -> &str {
        &self.session
    }

    pub fn n_channels(&self) -> usize {
        self.samples.len()
    }

    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.label = label;
        self
    }

    pub fn with_tags(mut self, subject: impl Into<String>, session: impl Into<String>) -> Self {
        self.subject = subject.into();
        self.session = session.into();
        self
    }

    /// Replaces the sample matrix, keeping metadata. The new matrix is
    /// validated like in [`SignalRecord::new`].
    pub fn with_samples(self, samples: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(samples, self.fs, self.label, self.subject, self.session)
    }
}

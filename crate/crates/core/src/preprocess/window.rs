use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SignalRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowConfig {
    pub window_ms: f64,
    /// Fraction of a window shared with the next one, in `[0, 1)`.
    pub overlap: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            window_ms: 600.0,
            overlap: 0.5,
        }
    }
}

impl WindowConfig {
    /// `floor(window_ms / 1000 * fs)`.
    pub fn window_len(&self, fs: f64) -> usize {
        // absorbs representation error when the product is integral
        (self.window_ms * fs / 1000.0 + 1e-9).floor() as usize
    }

    /// `floor(window_len * (1 - overlap))`.
    pub fn step(&self, window_len: usize) -> usize {
        (window_len as f64 * (1.0 - self.overlap) + 1e-9).floor() as usize
    }

    fn validate(&self, fs: f64) -> Result<(usize, usize)> {
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::Config(format!(
                "overlap must lie in [0, 1), got {}",
                self.overlap
            )));
        }
        let len = self.window_len(fs);
        if len < 3 {
            return Err(Error::Config(format!(
                "window of {} ms at {fs} Hz holds fewer than 3 samples",
                self.window_ms
            )));
        }
        let step = self.step(len);
        if step == 0 {
            return Err(Error::Config("window step rounds to zero samples".into()));
        }
        Ok((len, step))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowOrigin {
    pub record: usize,
    pub start: usize,
    pub subject: String,
    pub session: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    /// Channel-major copy of the source samples.
    pub samples: Vec<Vec<f64>>,
    pub label: usize,
    pub origin: WindowOrigin,
}

impl Window {
    pub fn n_channels(&self) -> usize {
        self.samples.len()
    }

    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    pub windows: Vec<Window>,
    pub fs: f64,
    pub n_channels: usize,
    pub window_len: usize,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.windows.iter().map(|w| w.label).collect()
    }
}

/// Cuts one record into overlapping windows starting at `0, step, 2*step, ...`;
/// a trailing partial window is dropped.
pub fn segment(record: &SignalRecord, record_id: usize, config: &WindowConfig) -> Result<WindowSet> {
    let (len, step) = config.validate(record.fs())?;
    if record.len() < len {
        return Err(Error::RecordTooShort {
            len: record.len(),
            window: len,
        });
    }
    let count = (record.len() - len) / step + 1;
    let windows = (0..count)
        .map(|w| {
            let start = w * step;
            Window {
                samples: record
                    .samples()
                    .iter()
                    .map(|ch| ch[start..start + len].to_vec())
                    .collect(),
                label: record.label(),
                origin: WindowOrigin {
                    record: record_id,
                    start,
                    subject: record.subject().to_string(),
                    session: record.session().to_string(),
                },
            }
        })
        .collect();
    Ok(WindowSet {
        windows,
        fs: record.fs(),
        n_channels: record.n_channels(),
        window_len: len,
    })
}

/// Segments every record separately, so no window straddles two trials.
pub fn segment_all(records: &[SignalRecord], config: &WindowConfig) -> Result<WindowSet> {
    let first = records
        .first()
        .ok_or_else(|| Error::Config("no records to segment".into()))?;
    let mut out = WindowSet {
        windows: Vec::new(),
        fs: first.fs(),
        n_channels: first.n_channels(),
        window_len: config.window_len(first.fs()),
    };
    for (i, rec) in records.iter().enumerate() {
        if rec.fs() != out.fs || rec.n_channels() != out.n_channels {
            return Err(Error::InvalidRecord(format!(
                "record {i} has {} channels at {} Hz, expected {} channels at {} Hz",
                rec.n_channels(),
                rec.fs(),
                out.n_channels,
                out.fs
            )));
        }
        out.windows.extend(segment(rec, i, config)?.windows);
    }
    Ok(out)
}

//! Minimal WFDB reader: single-segment records whose signals all live in one
//! format-16 (16-bit two's complement, little-endian, interleaved) `.dat` file.

use std::fs;
use std::path::{Path, PathBuf};

use super::SignalRecord;
use crate::error::{Error, Result};

const DEFAULT_GAIN: f64 = 200.0;
const DEFAULT_FS: f64 = 250.0;

#[derive(Debug, Clone, PartialEq)]
pub struct WfdbSignalSpec {
    pub file_name: String,
    pub format: u32,
    pub byte_offset: usize,
    pub gain: f64,
    pub baseline: f64,
    pub units: Option<String>,
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WfdbHeader {
    pub record_name: String,
    pub fs: f64,
    pub n_samples: Option<usize>,
    pub signals: Vec<WfdbSignalSpec>,
}

impl WfdbHeader {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let record_line = lines.next().ok_or_else(|| err("empty header".into()))?;
        let mut fields = record_line.split_whitespace();
        let name = fields.next().ok_or_else(|| err("missing record name".into()))?;
        if name.contains('/') {
            return Err(Error::UnsupportedWfdbFormat(format!(
                "multi-segment record {name}"
            )));
        }
        let n_sig: usize = fields
            .next()
            .ok_or_else(|| err("missing signal count".into()))?
            .parse()
            .map_err(|_| err("bad signal count".into()))?;
        let fs = match fields.next() {
            Some(tok) => {
                let head = tok.split(['/', '(']).next().unwrap_or(tok);
                head.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v > 0.0)
                    .ok_or_else(|| err(format!("bad sampling frequency {tok:?}")))?
            }
            None => DEFAULT_FS,
        };
        let n_samples = match fields.next() {
            Some(tok) => Some(
                tok.parse::<usize>()
                    .map_err(|_| err(format!("bad sample count {tok:?}")))?,
            ),
            None => None,
        };

        let mut signals = Vec::with_capacity(n_sig);
        for _ in 0..n_sig {
            let line = lines
                .next()
                .ok_or_else(|| err(format!("header declares {n_sig} signals but lists fewer")))?;
            signals.push(parse_signal_line(line, path)?);
        }
        if n_sig == 0 {
            return Err(err("record has no signals".into()));
        }
        Ok(Self {
            record_name: name.to_string(),
            fs,
            n_samples,
            signals,
        })
    }
}

fn parse_signal_line(line: &str, path: &Path) -> Result<WfdbSignalSpec> {
    let err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut fields = line.split_whitespace();
    let file_name = fields.next().ok_or_else(|| err("missing file name".into()))?;
    let fmt_tok = fields.next().ok_or_else(|| err("missing format".into()))?;

    let digits: String = fmt_tok.chars().take_while(char::is_ascii_digit).collect();
    let format: u32 = digits
        .parse()
        .map_err(|_| err(format!("bad format field {fmt_tok:?}")))?;
    let mut rest = &fmt_tok[digits.len()..];
    let mut byte_offset = 0usize;
    while !rest.is_empty() {
        let (tag, tail) = rest.split_at(1);
        let end = tail.find(['x', ':', '+']).unwrap_or(tail.len());
        let value = &tail[..end];
        match tag {
            "x" if value == "1" => {}
            "x" => {
                return Err(Error::UnsupportedWfdbFormat(format!(
                    "{fmt_tok} (multiple samples per frame)"
                )))
            }
            ":" if value.parse::<i64>() == Ok(0) => {}
            ":" => return Err(Error::UnsupportedWfdbFormat(format!("{fmt_tok} (skew)"))),
            "+" => {
                byte_offset = value
                    .parse()
                    .map_err(|_| err(format!("bad byte offset in {fmt_tok:?}")))?
            }
            _ => return Err(err(format!("bad format field {fmt_tok:?}"))),
        }
        rest = &tail[end..];
    }
    if format != 16 {
        return Err(Error::UnsupportedWfdbFormat(fmt_tok.to_string()));
    }

    let mut gain = DEFAULT_GAIN;
    let mut baseline: Option<f64> = None;
    let mut units = None;
    if let Some(tok) = fields.next() {
        let (num, unit) = match tok.split_once('/') {
            Some((n, u)) => (n, Some(u.to_string())),
            None => (tok, None),
        };
        units = unit;
        let (g, b) = match num.split_once('(') {
            Some((g, b)) => (g, Some(b.trim_end_matches(')'))),
            None => (num, None),
        };
        gain = g
            .parse()
            .map_err(|_| err(format!("bad gain field {tok:?}")))?;
        if let Some(b) = b {
            baseline = Some(b.parse().map_err(|_| err(format!("bad baseline in {tok:?}")))?);
        }
    }
    if gain == 0.0 || !gain.is_finite() {
        return Err(err(format!("gain of zero for signal in {file_name}")));
    }
    let _adc_resolution = fields.next();
    let adc_zero: f64 = match fields.next() {
        Some(tok) => tok.parse().map_err(|_| err(format!("bad ADC zero {tok:?}")))?,
        None => 0.0,
    };
    // initial value, checksum, block size
    let _ = (fields.next(), fields.next(), fields.next());
    let description: Vec<&str> = fields.collect();
    Ok(WfdbSignalSpec {
        file_name: file_name.to_string(),
        format,
        byte_offset,
        gain,
        baseline: baseline.unwrap_or(adc_zero),
        units,
        description: (!description.is_empty()).then(|| description.join(" ")),
    })
}

/// Reads a `.hea` header and its `.dat` file. Values are returned in
/// physical units, `(adc - baseline) / gain`. The label is 0 and the subject
/// tag is the record name; callers relabel via [`SignalRecord::with_label`].
pub fn load_wfdb_record(header_path: &Path) -> Result<SignalRecord> {
    let text = fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header = WfdbHeader::parse(&text, header_path)?;
    let first = &header.signals[0];
    if header
        .signals
        .iter()
        .any(|s| s.file_name != first.file_name || s.byte_offset != first.byte_offset)
    {
        return Err(Error::UnsupportedWfdbFormat(
            "signals spread over several .dat files".into(),
        ));
    }
    let dir = header_path.parent().unwrap_or(Path::new("."));
    let dat_path: PathBuf = dir.join(&first.file_name);
    let bytes = fs::read(&dat_path).map_err(|e| Error::io(&dat_path, e))?;
    let n_sig = header.signals.len();
    let frame_bytes = 2 * n_sig;
    let payload = bytes.get(first.byte_offset..).unwrap_or(&[]);
    let n_samples = match header.n_samples {
        Some(n) => {
            let expected = n * frame_bytes;
            if payload.len() < expected {
                return Err(Error::TruncatedSignal {
                    path: dat_path,
                    expected: expected + first.byte_offset,
                    found: bytes.len(),
                });
            }
            n
        }
        None => payload.len() / frame_bytes,
    };

    let mut samples = vec![Vec::with_capacity(n_samples); n_sig];
    for frame in payload.chunks_exact(frame_bytes).take(n_samples) {
        for (c, spec) in header.signals.iter().enumerate() {
            let adc = i16::from_le_bytes([frame[2 * c], frame[2 * c + 1]]);
            samples[c].push((f64::from(adc) - spec.baseline) / spec.gain);
        }
    }
    SignalRecord::new(samples, header.fs, 0, header.record_name.clone(), "")
}

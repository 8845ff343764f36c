//! Canonical on-disk layout: a JSON manifest pointing at one CSV per trial,
//! rows = time samples, columns = channels.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{load_wfdb_record, SignalRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    /// Relative paths resolve against the manifest's directory. A `.hea`
    /// extension selects the WFDB reader.
    pub path: PathBuf,
    pub label: usize,
    pub subject: String,
    pub session: String,
    pub fs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub class_names: Vec<String>,
}

impl DatasetManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Manifest("no entries".into()));
        }
        let mut seen = HashSet::new();
        for e in &self.entries {
            if e.label >= self.class_names.len() {
                return Err(Error::Manifest(format!(
                    "label out of range: {} has label {} but only {} class names",
                    e.path.display(),
                    e.label,
                    self.class_names.len()
                )));
            }
            if !seen.insert(&e.path) {
                return Err(Error::Manifest(format!("duplicate path {}", e.path.display())));
            }
        }
        Ok(())
    }
}

/// Records plus the class names they index into.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub records: Vec<SignalRecord>,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn n_channels(&self) -> usize {
        self.records.first().map_or(0, SignalRecord::n_channels)
    }
}

/// Loads every entry of a manifest. See [`load_dataset`] to keep the class names.
pub fn load_canonical_csv(manifest_path: &Path) -> Result<Vec<SignalRecord>> {
    load_dataset(manifest_path).map(|d| d.records)
}

pub fn load_dataset(manifest_path: &Path) -> Result<Dataset> {
    let manifest = DatasetManifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut records = Vec::with_capacity(manifest.entries.len());
    let mut channels: Option<usize> = None;
    for entry in &manifest.entries {
        let path = base.join(&entry.path);
        let is_wfdb = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("hea"));
        let record = if is_wfdb {
            let rec = load_wfdb_record(&path)?;
            if (rec.fs() - entry.fs).abs() > 1e-9 * entry.fs.abs().max(1.0) {
                return Err(Error::Manifest(format!(
                    "{}: header sampling rate {} differs from manifest {}",
                    path.display(),
                    rec.fs(),
                    entry.fs
                )));
            }
            rec.with_label(entry.label)
                .with_tags(entry.subject.clone(), entry.session.clone())
        } else {
            let samples = read_record_csv(&path)?;
            SignalRecord::new(
                samples,
                entry.fs,
                entry.label,
                entry.subject.clone(),
                entry.session.clone(),
            )
            .map_err(|e| Error::Parse {
                path: path.clone(),
                message: e.to_string(),
            })?
        };
        match channels {
            None => channels = Some(record.n_channels()),
            Some(c) if c != record.n_channels() => {
                return Err(Error::Manifest(format!(
                    "inconsistent channel count: {} has {} channels, earlier entries have {c}",
                    path.display(),
                    record.n_channels()
                )))
            }
            Some(_) => {}
        }
        records.push(record);
    }
    Ok(Dataset {
        records,
        class_names: manifest.class_names,
    })
}

/// Reads a samples-as-rows CSV and returns it channel-major. A first row in
/// which no cell parses as a number is treated as a header.
pub fn read_record_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut channels: Vec<Vec<f64>> = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map_or(i + 1, |p| p.line() as usize);
        if i == 0 && row.iter().all(|cell| cell.parse::<f64>().is_err()) {
            continue;
        }
        if channels.is_empty() {
            channels = vec![Vec::new(); row.len()];
        } else if row.len() != channels.len() {
            return Err(Error::Cell {
                path: path.to_path_buf(),
                row: line,
                column: row.len().min(channels.len()) + 1,
                message: format!("expected {} columns, found {}", channels.len(), row.len()),
            });
        }
        for (c, cell) in row.iter().enumerate() {
            let value = cell.parse::<f64>().ok().filter(|v| v.is_finite());
            let Some(value) = value else {
                return Err(Error::Cell {
                    path: path.to_path_buf(),
                    row: line,
                    column: c + 1,
                    message: format!("non-numeric or non-finite value {cell:?}"),
                });
            };
            channels[c].push(value);
        }
    }
    if channels.is_empty() || channels[0].is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "empty file".into(),
        });
    }
    Ok(channels)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Writes a record with a `ch0,ch1,...` header. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_record_csv(path: &Path, record: &SignalRecord) -> Result<()> {
    let mut out = String::with_capacity(record.len() * record.n_channels() * 12);
    let header: Vec<String> = (0..record.n_channels()).map(|c| format!("ch{c}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for t in 0..record.len() {
        for c in 0..record.n_channels() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&record.channel(c)[t].to_string());
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes `trial_XXXX.csv` files plus `manifest.json` into `dir`.
pub fn write_dataset(dir: &Path, records: &[SignalRecord], class_names: &[String]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let name = PathBuf::from(format!("trial_{i:04}.csv"));
        write_record_csv(&dir.join(&name), rec)?;
        entries.push(ManifestEntry {
            path: name,
            label: rec.label(),
            subject: rec.subject().to_string(),
            session: rec.session().to_string(),
            fs: rec.fs(),
        });
    }
    let manifest = DatasetManifest {
        entries,
        class_names: class_names.to_vec(),
    };
    manifest.validate()?;
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Serde(e.to_string()))?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    fn manifest_json(entries: &[(&str, usize)], n_classes: usize) -> String {
        let entries: Vec<String> = entries
            .iter()
            .map(|(p, l)| {
                format!(r#"{{"path":"{p}","label":{l},"subject":"s1","session":"d1","fs":2048}}"#)
            })
            .collect();
        let names: Vec<String> = (0..n_classes).map(|i| format!("\"g{i}\"")).collect();
        format!(
            r#"{{"entries":[{}],"class_names":[{}]}}"#,
            entries.join(","),
            names.join(",")
        )
    }

    #[test]
    fn one_entry_is_transposed() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.csv", "1,10\n2,20\n3,30\n4,40\n");
        let m = write(dir.path(), "m.json", &manifest_json(&[("a.csv", 0)], 1));
        let recs = load_canonical_csv(&m).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].n_channels(), 2);
        assert_eq!(recs[0].len(), 4);
        assert_eq!(recs[0].channel(1), &[10.0, 20.0, 30.0, 40.0]);
        assert_eq!(recs[0].fs(), 2048.0);
    }

    #[test]
    fn label_at_class_count_is_out_of_range() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.csv", "1,2\n3,4\n");
        let m = write(dir.path(), "m.json", &manifest_json(&[("a.csv", 17)], 17));
        let err = load_canonical_csv(&m).unwrap_err().to_string();
        assert!(err.contains("label out of range"), "{err}");
    }

    #[test]
    fn nan_cell_is_named() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.csv", "ch0,ch1\n1,2\n3,NaN\n");
        let m = write(dir.path(), "m.json", &manifest_json(&[("a.csv", 0)], 1));
        let err = load_canonical_csv(&m).unwrap_err();
        match err {
            Error::Cell { row, column, .. } => assert_eq!((row, column), (3, 2)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn text_cell_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "1,2\n3,x\n");
        assert!(matches!(read_record_csv(&p), Err(Error::Cell { row: 2, column: 2, .. })));
    }

    #[test]
    fn empty_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "");
        assert!(read_record_csv(&p).unwrap_err().to_string().contains("empty file"));
        let p = write(dir.path(), "b.csv", "ch0,ch1\n");
        assert!(read_record_csv(&p).unwrap_err().to_string().contains("empty file"));
        assert!(load_canonical_csv(&dir.path().join("nope.json")).is_err());
    }

    #[test]
    fn channel_count_must_agree_across_entries() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.csv", "1,2\n3,4\n");
        write(dir.path(), "b.csv", "1,2,3\n3,4,5\n");
        let m = write(dir.path(), "m.json", &manifest_json(&[("a.csv", 0), ("b.csv", 0)], 1));
        let err = load_canonical_csv(&m).unwrap_err().to_string();
        assert!(err.contains("inconsistent channel count"), "{err}");
    }

    #[test]
    fn duplicate_paths_rejected() {
        let m = DatasetManifest {
            entries: vec![
                ManifestEntry {
                    path: "a.csv".into(),
                    label: 0,
                    subject: "s".into(),
                    session: "d".into(),
                    fs: 1000.0,
                },
                ManifestEntry {
                    path: "a.csv".into(),
                    label: 0,
                    subject: "s".into(),
                    session: "d".into(),
                    fs: 1000.0,
                },
            ],
            class_names: vec!["g".into()],
        };
        assert!(m.validate().is_err());
    }

    #[test]
    fn round_trip_through_dataset_writer() {
        let dir = tempfile::tempdir().unwrap();
        let rec = SignalRecord::new(
            vec![vec![0.1, -2.5e-7, 3.0], vec![1.0 / 3.0, 7.0, -0.0]],
            985.0,
            1,
            "s2",
            "d8",
        )
        .unwrap();
        let m = write_dataset(dir.path(), std::slice::from_ref(&rec), &["a".into(), "b".into()]).unwrap();
        let ds = load_dataset(&m).unwrap();
        assert_eq!(ds.records, vec![rec]);
        assert_eq!(ds.class_names, vec!["a", "b"]);
    }
}

//! Dataset files: line-delimited records, a content-addressed image store
//! and a manifest; plus dedup, URL-level splitting and statistics.
//!
//! ```text
//! <dir>/records.jsonl
//! <dir>/images/<sha256>.png
//! <dir>/manifest.json
//! ```

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::raster::{image_key, sha256_hex};
use crate::sample::{QASample, Source, TaskKind};
use crate::seed::derive_seed;

pub const RECORDS: &str = "records.jsonl";
pub const MANIFEST: &str = "manifest.json";
pub const IMAGES: &str = "images";

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("sample id {0} appears more than once")]
    DuplicateId(String),
    #[error("sample {id} references image {image}, which was not supplied")]
    MissingImage { id: String, image: String },
    #[error("image bytes do not match key {0}")]
    ImageKeyMismatch(String),
    #[error("{path} line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("validation fraction {0} outside [0, 1)")]
    InvalidFraction(f64),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub records: usize,
    /// sha256 of the record file.
    pub digest: String,
    pub created_with_seed: u64,
    pub config_digest: String,
    pub images: usize,
}

/// Writes `samples` in order. `images` maps image keys to PNG bytes; every
/// referenced key must be supplied unless the file already exists in `dir`.
pub fn write_dataset(
    samples: &[QASample],
    images: &BTreeMap<String, Vec<u8>>,
    dir: &Path,
    seed: u64,
    config_digest: &str,
) -> Result<Manifest, DatasetError> {
    let mut ids = HashSet::with_capacity(samples.len());
    for s in samples {
        if !ids.insert(s.id.as_str()) {
            return Err(DatasetError::DuplicateId(s.id.clone()));
        }
    }

    let image_dir = dir.join(IMAGES);
    std::fs::create_dir_all(&image_dir).map_err(io_err(&image_dir))?;
    let mut referenced: Vec<&str> = samples.iter().map(|s| s.image.as_str()).collect();
    referenced.sort_unstable();
    referenced.dedup();
    for key in &referenced {
        let path = dir.join(key);
        match images.get(*key) {
            Some(png) => {
                if image_key(png) != *key {
                    return Err(DatasetError::ImageKeyMismatch(key.to_string()));
                }
                if !path.exists() {
                    std::fs::write(&path, png).map_err(io_err(&path))?;
                }
            }
            None if path.exists() => {}
            None => {
                let s = samples
                    .iter()
                    .find(|s| s.image == *key)
                    .expect("key came from a sample");
                return Err(DatasetError::MissingImage {
                    id: s.id.clone(),
                    image: key.to_string(),
                });
            }
        }
    }

    let mut body = Vec::new();
    for s in samples {
        serde_json::to_writer(&mut body, s).expect("samples serialize");
        body.push(b'\n');
    }
    let records_path = dir.join(RECORDS);
    std::fs::write(&records_path, &body).map_err(io_err(&records_path))?;

    let manifest = Manifest {
        records: samples.len(),
        digest: sha256_hex(&body),
        created_with_seed: seed,
        config_digest: config_digest.to_string(),
        images: referenced.len(),
    };
    let manifest_path = dir.join(MANIFEST);
    let mut f = std::fs::File::create(&manifest_path).map_err(io_err(&manifest_path))?;
    serde_json::to_writer_pretty(&mut f, &manifest).expect("manifest serializes");
    f.write_all(b"\n").map_err(io_err(&manifest_path))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, DatasetError> {
    let path = dir.join(MANIFEST);
    let bytes = std::fs::read(&path).map_err(io_err(&path))?;
    serde_json::from_slice(&bytes).map_err(|e| DatasetError::Manifest {
        path,
        message: e.to_string(),
    })
}

/// Calls `f` with every record of a record file, in order.
pub fn for_each_record(
    path: &Path,
    mut f: impl FnMut(QASample) -> Result<(), DatasetError>,
) -> Result<(), DatasetError> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let sample: QASample = serde_json::from_str(&line).map_err(|e| DatasetError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        f(sample)?;
    }
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<QASample>, DatasetError> {
    let mut out = Vec::new();
    for_each_record(path, |s| {
        out.push(s);
        Ok(())
    })?;
    Ok(out)
}

/// Reads the records of the dataset at `dir`.
pub fn read_dataset(dir: &Path) -> Result<Vec<QASample>, DatasetError> {
    read_records(&dir.join(RECORDS))
}

/// Drops samples equal to an earlier one in image, task and every turn.
pub fn dedup(samples: Vec<QASample>) -> Vec<QASample> {
    let mut seen = HashSet::new();
    samples
        .into_iter()
        .filter(|s| {
            let turns = serde_json::to_string(&s.turns).expect("turns serialize");
            seen.insert((s.image.clone(), s.task, turns))
        })
        .collect()
}

/// Grouping key of a sample for splitting: its page URL, else its image.
fn split_key(s: &QASample) -> &str {
    s.url().unwrap_or(&s.image)
}

/// True if `key` falls into the validation share.
pub fn in_validation(key: &str, val_fraction: f64, seed: u64) -> bool {
    let h = derive_seed(seed, &["split", key]);
    (h as f64 / u64::MAX as f64) < val_fraction
}

/// Splits by page URL so all samples of one page land on one side.
pub fn split(
    samples: Vec<QASample>,
    val_fraction: f64,
    seed: u64,
) -> Result<(Vec<QASample>, Vec<QASample>), DatasetError> {
    if !(0.0..1.0).contains(&val_fraction) {
        return Err(DatasetError::InvalidFraction(val_fraction));
    }
    Ok(samples
        .into_iter()
        .partition(|s| !in_validation(split_key(s), val_fraction, seed)))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub records: usize,
    pub images: usize,
    /// Assistant turns over all records.
    pub qa_pairs: usize,
    pub by_task: BTreeMap<TaskKind, usize>,
    pub by_source: BTreeMap<Source, usize>,
    pub qa_pairs_by_task: BTreeMap<TaskKind, usize>,
    /// Share of records per source.
    pub source_fractions: BTreeMap<Source, f64>,
}

#[derive(Debug, Default)]
pub struct StatsAccumulator {
    report: StatsReport,
    images: HashSet<String>,
}

impl StatsAccumulator {
    pub fn add(&mut self, s: &QASample) {
        let r = &mut self.report;
        r.records += 1;
        let pairs = s.qa_pairs();
        r.qa_pairs += pairs;
        *r.by_task.entry(s.task).or_default() += 1;
        *r.qa_pairs_by_task.entry(s.task).or_default() += pairs;
        *r.by_source.entry(s.source).or_default() += 1;
        if !self.images.contains(&s.image) {
            self.images.insert(s.image.clone());
        }
    }

    pub fn finish(mut self) -> StatsReport {
        self.report.images = self.images.len();
        let total = self.report.records as f64;
        self.report.source_fractions = self
            .report
            .by_source
            .iter()
            .map(|(k, &v)| (*k, v as f64 / total))
            .collect();
        self.report
    }
}

pub fn stats_of<'a>(samples: impl IntoIterator<Item = &'a QASample>) -> StatsReport {
    let mut acc = StatsAccumulator::default();
    for s in samples {
        acc.add(s);
    }
    acc.finish()
}

/// Streams the record file of the dataset at `dir`.
pub fn compute_stats(dir: &Path) -> Result<StatsReport, DatasetError> {
    let mut acc = StatsAccumulator::default();
    for_each_record(&dir.join(RECORDS), |s| {
        acc.add(&s);
        Ok(())
    })?;
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Turn;

    fn sample(id: &str, image: &str, task: TaskKind, answer: &str) -> QASample {
        let mut meta = BTreeMap::new();
        meta.insert("url".to_string(), serde_json::json!(format!("https://{id}.test/")));
        QASample {
            id: id.into(),
            image: image.into(),
            width: 10,
            height: 10,
            task,
            source: Source::Fixture,
            turns: vec![Turn::user("q"), Turn::assistant(answer)],
            meta,
        }
    }

    #[test]
    fn empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let m = write_dataset(&[], &BTreeMap::new(), dir.path(), 1, "c").unwrap();
        assert_eq!(m.records, 0);
        assert_eq!(std::fs::read(dir.path().join(RECORDS)).unwrap(), b"");
        assert_eq!(compute_stats(dir.path()).unwrap(), StatsReport::default());
        assert_eq!(read_manifest(dir.path()).unwrap(), m);
    }

    #[test]
    fn shared_image_is_stored_once() {
        let png = crate::raster::encode_png(&image::RgbaImage::new(2, 2));
        let key = image_key(&png);
        let samples: Vec<_> = (0..3)
            .map(|i| sample(&format!("s{i}"), &key, TaskKind::OCR, "a"))
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let images = BTreeMap::from([(key.clone(), png)]);
        let m = write_dataset(&samples, &images, dir.path(), 1, "c").unwrap();
        assert_eq!((m.records, m.images), (3, 1));
        assert_eq!(std::fs::read_dir(dir.path().join(IMAGES)).unwrap().count(), 1);
        assert_eq!(read_dataset(dir.path()).unwrap(), samples);

        let again = tempfile::tempdir().unwrap();
        assert_eq!(
            write_dataset(&samples, &images, again.path(), 1, "c").unwrap().digest,
            m.digest
        );
    }

    #[test]
    fn write_errors() {
        let dir = tempfile::tempdir().unwrap();
        let a = sample("a", "images/x.png", TaskKind::OCR, "a");
        assert!(matches!(
            write_dataset(&[a.clone(), a.clone()], &BTreeMap::new(), dir.path(), 1, ""),
            Err(DatasetError::DuplicateId(_))
        ));
        assert!(matches!(
            write_dataset(&[a], &BTreeMap::new(), dir.path(), 1, ""),
            Err(DatasetError::MissingImage { .. })
        ));
    }

    #[test]
    fn corrupt_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let good = serde_json::to_string(&sample("a", "i", TaskKind::OCR, "x")).unwrap();
        std::fs::write(dir.path().join(RECORDS), format!("{good}\n{{not json\n")).unwrap();
        match compute_stats(dir.path()) {
            Err(DatasetError::Corrupt { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dedup_rules() {
        let a = sample("a", "i", TaskKind::OCR, "x");
        let mut b = a.clone();
        b.id = "b".into();
        let c = sample("c", "i", TaskKind::OCR, "y");
        let out = dedup(vec![a.clone(), b, c.clone()]);
        assert_eq!(out, vec![a, c]);
    }

    #[test]
    fn split_rules() {
        let s: Vec<_> = (0..50)
            .map(|i| sample(&format!("s{i}"), "i", TaskKind::OCR, "x"))
            .collect();
        let (train, val) = split(s.clone(), 0.0, 3).unwrap();
        assert_eq!((train.len(), val.len()), (50, 0));
        assert!(matches!(split(s, 1.0, 3), Err(DatasetError::InvalidFraction(_))));
    }

    #[test]
    fn multi_turn_counts_assistant_turns() {
        let mut s = sample("a", "i", TaskKind::Grounding, "x");
        s.turns.extend([Turn::user("q2"), Turn::assistant("a2")]);
        assert_eq!(stats_of([&s]).qa_pairs, 2);
    }
}

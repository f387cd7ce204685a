//! Click accuracy for grounding predictions: the share of cases whose
//! predicted point falls inside the ground-truth box.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::geom::{BBox, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundingCase {
    pub id: String,
    pub image: String,
    pub instruction: String,
    /// Normalized to [0, 1].
    pub gt_bbox: BBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prediction {
    pub id: String,
    /// Normalized to [0, 1].
    pub point: Point,
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("prediction for unknown case {0}")]
    UnknownCase(String),
    #[error("case {0} has more than one prediction")]
    DuplicatePrediction(String),
    #[error("case id {0} appears more than once")]
    DuplicateCase(String),
    #[error("case {0}: ground-truth box is not a valid normalized box")]
    InvalidCase(String),
    #[error("prediction for {0}: point outside [0, 1]")]
    InvalidPrediction(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path} line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// Boundary-inclusive containment.
pub fn point_in_bbox(p: Point, b: &BBox) -> bool {
    b.x1 <= p.x && p.x <= b.x2 && b.y1 <= p.y && p.y <= b.y2
}

fn unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub total: usize,
    pub hits: usize,
    pub accuracy: f64,
}

impl Score {
    fn finish(mut self) -> Self {
        self.accuracy = if self.total == 0 {
            0.0
        } else {
            self.hits as f64 / self.total as f64
        };
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total: usize,
    pub hits: usize,
    pub accuracy: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_source: BTreeMap<String, Score>,
}

/// Scores `predictions` against `cases`. A case without a prediction is a miss.
pub fn evaluate(cases: &[GroundingCase], predictions: &[Prediction]) -> Result<EvalReport, EvalError> {
    let mut index = HashMap::with_capacity(cases.len());
    for (i, c) in cases.iter().enumerate() {
        if !(c.gt_bbox.is_valid()
            && unit(c.gt_bbox.x1)
            && unit(c.gt_bbox.y1)
            && unit(c.gt_bbox.x2)
            && unit(c.gt_bbox.y2))
        {
            return Err(EvalError::InvalidCase(c.id.clone()));
        }
        if index.insert(c.id.as_str(), i).is_some() {
            return Err(EvalError::DuplicateCase(c.id.clone()));
        }
    }
    let mut hit = vec![None; cases.len()];
    for p in predictions {
        let &i = index
            .get(p.id.as_str())
            .ok_or_else(|| EvalError::UnknownCase(p.id.clone()))?;
        if !(unit(p.point.x) && unit(p.point.y)) {
            return Err(EvalError::InvalidPrediction(p.id.clone()));
        }
        if hit[i].is_some() {
            return Err(EvalError::DuplicatePrediction(p.id.clone()));
        }
        hit[i] = Some(point_in_bbox(p.point, &cases[i].gt_bbox));
    }

    let mut overall = Score::default();
    let mut per_source: BTreeMap<String, Score> = BTreeMap::new();
    for (c, h) in cases.iter().zip(&hit) {
        let h = h.unwrap_or(false) as usize;
        overall.total += 1;
        overall.hits += h;
        if let Some(src) = &c.source {
            let s = per_source.entry(src.clone()).or_default();
            s.total += 1;
            s.hits += h;
        }
    }
    let overall = overall.finish();
    Ok(EvalReport {
        total: overall.total,
        hits: overall.hits,
        accuracy: overall.accuracy,
        per_source: per_source.into_iter().map(|(k, v)| (k, v.finish())).collect(),
    })
}

pub fn click_accuracy(cases: &[GroundingCase], predictions: &[Prediction]) -> Result<f64, EvalError> {
    Ok(evaluate(cases, predictions)?.accuracy)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, EvalError> {
    let file = std::fs::File::open(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| EvalError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

//! File formats and deterministic report serialization.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::linalg::ComplexMatrix;
use crate::states::{BipartitePureState, StateError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("state {index}: {reason}")]
    BadState { index: usize, reason: String },
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum DualInput {
    Flat(Vec<[f64; 2]>),
    Rows(Vec<Vec<[f64; 2]>>),
}

#[derive(Debug, Clone, Deserialize)]
struct RawStateSet {
    dims: [usize; 2],
    states: Vec<DualInput>,
}

/// `{dims: [DA, DB], states: [...]}` where each state is its dual matrix,
/// either flat row-major or as rows, with entries `[re, im]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSet {
    pub dims: (usize, usize),
    pub states: Vec<BipartitePureState>,
}

impl Serialize for StateSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            dims: [usize; 2],
            states: Vec<Vec<[f64; 2]>>,
        }
        Out {
            dims: [self.dims.0, self.dims.1],
            states: self.states.iter().map(|st| st.dual().as_slice().iter().map(|z| [z.re, z.im]).collect()).collect(),
        }
        .serialize(s)
    }
}

impl StateSet {
    pub fn new(states: Vec<BipartitePureState>) -> Result<Self, IoError> {
        let dims = states.first().map(|s| s.dims()).ok_or(IoError::BadState { index: 0, reason: "no states".into() })?;
        if let Some(index) = states.iter().position(|s| s.dims() != dims) {
            return Err(IoError::BadState { index, reason: format!("dims {:?}, expected {dims:?}", states[index].dims()) });
        }
        Ok(Self { dims, states })
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let raw: RawStateSet = serde_json::from_str(text)?;
        let [da, db] = raw.dims;
        if raw.states.is_empty() {
            return Err(IoError::BadState { index: 0, reason: "no states".into() });
        }
        let mut states = Vec::with_capacity(raw.states.len());
        for (index, input) in raw.states.into_iter().enumerate() {
            let entries: Vec<C64> = match input {
                DualInput::Flat(v) => v.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
                DualInput::Rows(rows) => {
                    if rows.len() != da || rows.iter().any(|r| r.len() != db) {
                        return Err(IoError::BadState { index, reason: format!("expected {da}x{db} rows") });
                    }
                    rows.into_iter().flatten().map(|[re, im]| C64::new(re, im)).collect()
                }
            };
            let m = ComplexMatrix::from_vec(da, db, entries)
                .map_err(|e| IoError::BadState { index, reason: e.to_string() })?;
            states.push(BipartitePureState::new(m).map_err(|e| IoError::BadState { index, reason: e.to_string() })?);
        }
        Ok(Self { dims: (da, db), states })
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        Self::from_json(&read_text(path)?)
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::Write { path: path.display().to_string(), source })
}

/// Report JSON with sorted keys, shortest round-trip floats and a
/// `schema_version` field; `kind` names the report type.
pub fn report_json<T: Serialize>(kind: &str, body: &T) -> Result<String, IoError> {
    let mut value = serde_json::to_value(body)?;
    match &mut value {
        Value::Object(map) => {
            map.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
            map.insert("report".into(), Value::from(kind));
        }
        other => {
            let inner = std::mem::take(other);
            *other = serde_json::json!({ "schema_version": SCHEMA_VERSION, "report": kind, "data": inner });
        }
    }
    let mut s = serde_json::to_string_pretty(&value)?;
    s.push('\n');
    Ok(s)
}

/// Parses `"uniform"` or a comma list, normalized by its sum.
pub fn parse_weights(text: &str, len: usize) -> Result<Vec<f64>, String> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("uniform") {
        return Ok(vec![1.0 / len as f64; len]);
    }
    let raw = parse_list(t)?;
    if raw.len() != len {
        return Err(format!("expected {len} weights, got {}", raw.len()));
    }
    if raw.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return Err("weights must be finite and strictly positive".into());
    }
    let s: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / s).collect())
}

pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("not a number: {:?}", p.trim())))
        .collect()
}

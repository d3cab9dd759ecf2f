//! File formats: instance JSON, solve-report JSON and the trace CSV.
//!
//! Instance files look like
//!
//! ```json
//! {"format": 1, "m": 3, "n": 2,
//!  "entries": [[0, 0, 0, 1.0], [1, 1, 1, 1.0]],
//!  "b": [1.0, 2.0], "planted": null, "seed": 7}
//! ```
//!
//! Indices are 0-based and duplicate entries are summed on load. `"b"`,
//! `"planted"`, `"seed"` and `"format"` may be omitted when reading: a
//! missing `"b"` is an error only for callers that need a right-hand side.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::generate::ProblemInstance;
use crate::npa::{IterationRecord, SolveReport};
use crate::tensor::{SquareTensor, TensorError};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Field {
        field: field.into(),
        message: message.into(),
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn as_index(v: &Value, field: &str, what: &str) -> Result<usize, IoError> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| field_err(field, format!("expected a nonnegative integer {what}, got {v}")))
}

fn as_real(v: &Value, field: &str) -> Result<f64, IoError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| field_err(field, format!("expected a finite number, got {v}")))
}

fn as_vector(v: &Value, field: &str, n: usize) -> Result<Vec<f64>, IoError> {
    let arr = v
        .as_array()
        .ok_or_else(|| field_err(field, "expected an array of numbers"))?;
    if arr.len() != n {
        return Err(field_err(field, format!("expected {n} values, got {}", arr.len())));
    }
    arr.iter()
        .enumerate()
        .map(|(k, x)| as_real(x, &format!("{field}[{k}]")))
        .collect()
}

/// A parsed instance file. `b` is absent for tensor-only files.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub a: SquareTensor,
    pub b: Option<Vec<f64>>,
    pub planted: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub recipe: Option<String>,
}

impl InstanceFile {
    /// The instance, failing when the file has no right-hand side.
    pub fn into_instance(self) -> Result<ProblemInstance, IoError> {
        let b = self.b.ok_or_else(|| field_err("b", "missing right-hand side"))?;
        Ok(ProblemInstance {
            a: self.a,
            b,
            planted: self.planted,
            seed: self.seed.unwrap_or(0),
            recipe: self.recipe.unwrap_or_else(|| "file".to_string()),
            redraws: 0,
        })
    }
}

pub fn parse_instance(text: &str) -> Result<InstanceFile, IoError> {
    let root: Value = serde_json::from_str(text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| field_err("<root>", "expected a JSON object"))?;
    if let Some(f) = obj.get("format") {
        if f.as_u64() != Some(FORMAT_VERSION) {
            return Err(field_err("format", format!("unsupported version {f}, expected {FORMAT_VERSION}")));
        }
    }
    let m = as_index(obj.get("m").ok_or_else(|| field_err("m", "missing"))?, "m", "order")?;
    let n = as_index(obj.get("n").ok_or_else(|| field_err("n", "missing"))?, "n", "dimension")?;
    let entries = obj
        .get("entries")
        .ok_or_else(|| field_err("entries", "missing"))?
        .as_array()
        .ok_or_else(|| field_err("entries", "expected an array of [i1, ..., im, value] rows"))?;

    let mut a = SquareTensor::zeros(m, n).map_err(|e| match e {
        TensorError::OrderTooSmall(_) => field_err("m", e.to_string()),
        _ => field_err("n", e.to_string()),
    })?;
    let mut idx = vec![0usize; m];
    for (k, row) in entries.iter().enumerate() {
        let field = format!("entries[{k}]");
        let row = row
            .as_array()
            .ok_or_else(|| field_err(&field, "expected an array"))?;
        if row.len() != m + 1 {
            return Err(field_err(
                &field,
                format!("expected {} indices and a value, got {} items", m, row.len()),
            ));
        }
        for (p, v) in row[..m].iter().enumerate() {
            let f = format!("{field}[{p}]");
            idx[p] = as_index(v, &f, "index")?;
            if idx[p] >= n {
                return Err(field_err(f, format!("index {} out of range for n = {n}", idx[p])));
            }
        }
        let value = as_real(&row[m], &format!("{field}[{m}]"))?;
        a.push(&idx, value)?;
    }
    let a = a.into_canonical();

    let opt_vec = |key: &str| -> Result<Option<Vec<f64>>, IoError> {
        match obj.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => as_vector(v, key, n).map(Some),
        }
    };
    let seed = match obj.get("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| field_err("seed", format!("expected a nonnegative integer, got {v}")))?,
        ),
    };
    let recipe = match obj.get("recipe") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(v) => return Err(field_err("recipe", format!("expected a string, got {v}"))),
    };
    Ok(InstanceFile {
        a,
        b: opt_vec("b")?,
        planted: opt_vec("planted")?,
        seed,
        recipe,
    })
}

pub fn read_instance(path: &Path) -> Result<InstanceFile, IoError> {
    parse_instance(&read_text(path)?)
}

fn entries_json(a: &SquareTensor) -> Vec<Value> {
    a.entries()
        .map(|(t, v)| {
            let mut row: Vec<Value> = t.iter().map(|&i| json!(i)).collect();
            row.push(json!(v));
            Value::Array(row)
        })
        .collect()
}

/// Tensor-only JSON document.
pub fn tensor_to_json(a: &SquareTensor) -> Value {
    json!({
        "format": FORMAT_VERSION,
        "m": a.order(),
        "n": a.dim(),
        "entries": entries_json(a),
    })
}

pub fn instance_to_json(inst: &ProblemInstance) -> Value {
    json!({
        "format": FORMAT_VERSION,
        "m": inst.a.order(),
        "n": inst.a.dim(),
        "entries": entries_json(&inst.a),
        "b": inst.b,
        "planted": inst.planted,
        "seed": inst.seed,
        "recipe": inst.recipe,
        "redraws": inst.redraws,
    })
}

pub fn write_instance(path: &Path, inst: &ProblemInstance) -> Result<(), IoError> {
    let mut text = serde_json::to_string(&instance_to_json(inst))?;
    text.push('\n');
    write_text(path, &text)
}

/// C-style `%.16e`: 16 fractional digits and a signed exponent of at
/// least two digits.
pub fn fmt_e16(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.16e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Trace CSV with header `iter,ReErr,card_I,p,q`. `p` and `q` are blank
/// where no step was taken.
pub fn trace_csv(trace: &[IterationRecord]) -> String {
    let mut out = String::from("iter,ReErr,card_I,p,q\n");
    let opt = |v: Option<u32>| v.map(|u| u.to_string()).unwrap_or_default();
    for r in trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iter,
            fmt_e16(r.re_err),
            r.card_active,
            opt(r.p),
            opt(r.q)
        );
    }
    out
}

pub fn report_to_json(report: &SolveReport) -> Value {
    let mut obj = Map::new();
    obj.insert("format".into(), json!(FORMAT_VERSION));
    obj.insert("status".into(), json!(report.status));
    obj.insert("x".into(), json!(report.x));
    obj.insert("re_err".into(), json!(report.re_err));
    obj.insert("iterations".into(), json!(report.iterations));
    obj.insert("wall_time_s".into(), json!(report.wall_time.as_secs_f64()));
    obj.insert("kappa".into(), json!(report.kappa));
    obj.insert("eps_active".into(), json!(report.eps_active));
    obj.insert("start_source".into(), json!(report.start_source));
    obj.insert("message".into(), json!(report.message));
    obj.insert("deterministic".into(), json!(report.deterministic));
    obj.insert("trace".into(), json!(report.trace));
    Value::Object(obj)
}

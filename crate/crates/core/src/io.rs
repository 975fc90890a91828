//! Text formats: state files, coefficient files and complex CLI arguments.
//!
//! State files are JSON documents `{"dim_a": 2, "dim_b": 2, "amps": [[re, im], ...]}`
//! with amplitudes in A-major order. Writers emit every number with 17
//! significant digits so a dump re-parses to the identical doubles.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::state::{StateRecord, StateVector, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    /// Malformed or truncated JSON.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    /// Well-formed JSON with a missing, unknown or mistyped field.
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    /// Fields parse but describe an invalid state.
    #[error("field `{field}`: {source}")]
    Invalid {
        field: String,
        #[source]
        source: Error,
    },
    #[error("invalid value `{input}`: {message}")]
    Value { input: String, message: String },
}

fn from_json_error(path: String, e: serde_json::Error) -> ParseError {
    use serde_json::error::Category;
    match e.classify() {
        Category::Syntax | Category::Eof | Category::Io => ParseError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        },
        Category::Data => ParseError::Field {
            field: if path.is_empty() || path == "." {
                "<root>".into()
            } else {
                path
            },
            message: e.to_string(),
        },
    }
}

/// Parses `T` from JSON, reporting the path of any field that fails.
pub fn parse_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, ParseError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value =
        serde_path_to_error::deserialize(&mut de).map_err(|e| from_json_error(e.path().to_string(), e.into_inner()))?;
    de.end().map_err(|e| from_json_error(String::new(), e))?;
    Ok(value)
}

/// Parses a state file. Dimensions and length are validated; normalization
/// is left to the caller.
pub fn parse_state_json(text: &str) -> Result<StateVector, ParseError> {
    let record: StateRecord = parse_json(text)?;
    StateVector::try_from(record).map_err(|source| {
        let field = match &source {
            Error::ZeroDimension { .. } => "dim_a/dim_b".to_string(),
            Error::NonFinite { index } => format!("amps[{index}]"),
            _ => "amps".to_string(),
        };
        ParseError::Invalid { field, source }
    })
}

/// 17 significant digits, always a valid JSON number.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a state file at full precision.
pub fn write_state_json(s: &StateVector) -> String {
    let mut out = String::new();
    let _ = write!(out, "{{\"dim_a\": {}, \"dim_b\": {}, \"amps\": [", s.dim_a(), s.dim_b());
    for (k, z) in s.amps().iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "[{}, {}]", fmt_f64(z.re), fmt_f64(z.im));
    }
    out.push_str("]}\n");
    out
}

/// Superposition coefficients as dumped next to a searched state pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsRecord {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

pub fn write_coefficients_json(alpha: C64, beta: C64) -> String {
    format!(
        "{{\"alpha\": [{}, {}], \"beta\": [{}, {}]}}\n",
        fmt_f64(alpha.re),
        fmt_f64(alpha.im),
        fmt_f64(beta.re),
        fmt_f64(beta.im)
    )
}

/// Parses `re,im` (or a bare `re`) into a finite complex number.
pub fn parse_complex(text: &str) -> Result<C64, ParseError> {
    let err = |message: &str| ParseError::Value {
        input: text.to_string(),
        message: message.to_string(),
    };
    let mut parts = text.split(',');
    let re_s = parts.next().unwrap_or("");
    let im_s = parts.next();
    if parts.next().is_some() {
        return Err(err("expected `re,im`"));
    }
    let num = |s: &str| -> Result<f64, ParseError> {
        let v: f64 = s.trim().parse().map_err(|_| err("not a number"))?;
        if !v.is_finite() {
            return Err(err("must be finite"));
        }
        Ok(v)
    };
    let re = num(re_s)?;
    let im = match im_s {
        Some(s) => num(s)?,
        None => 0.0,
    };
    Ok(C64::new(re, im))
}

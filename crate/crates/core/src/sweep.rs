//! Parameter grids and family sweeps.
//!
//! A grid spec is a comma-separated list of axes `name=start:stop:steps`,
//! each optionally followed by a `log` token for geometric spacing:
//!
//! ```text
//! x=0.5:0.5:1,y=1e-2:1e-4:3,log
//! ```
//!
//! Points are visited lexicographically over axis indices, first axis
//! slowest.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::entanglement::{check_for_class, run_check, BoundReport};
use crate::error::Error;
use crate::families::{self, FamilyInstance};
use crate::io::fmt_f64;

/// Per-axis and whole-grid point limits.
pub const MAX_AXIS_STEPS: usize = 100_000;
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("empty grid spec")]
    Empty,
    #[error("axis `{0}`: expected name=start:stop:steps")]
    Malformed(String),
    #[error("axis `{axis}`: {message}")]
    BadValue { axis: String, message: String },
    #[error("parameter `{0}` appears twice")]
    Duplicate(String),
    #[error("`log` must follow an axis")]
    DanglingLog,
    #[error("grid has more than {MAX_GRID_POINTS} points")]
    TooLarge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub log: bool,
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == 0 {
                    self.start
                } else if i == self.steps - 1 {
                    self.stop
                } else if self.log {
                    let (a, b) = (self.start.ln(), self.stop.ln());
                    (a + (b - a) * i as f64 / last).exp()
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every grid point as `(name, value)` pairs in axis order.
    pub fn points(&self) -> Vec<Vec<(String, f64)>> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(GridAxis::values).collect();
        let mut out = Vec::with_capacity(self.len());
        let mut idx = vec![0usize; self.axes.len()];
        loop {
            out.push(
                self.axes
                    .iter()
                    .zip(&idx)
                    .enumerate()
                    .map(|(a, (axis, &i))| (axis.name.clone(), values[a][i]))
                    .collect(),
            );
            // odometer, last axis fastest
            let mut k = self.axes.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.axes[k].steps {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

pub fn parse_grid(spec: &str) -> Result<GridSpec, GridError> {
    let mut axes: Vec<GridAxis> = Vec::new();
    for token in spec.split(',').map(str::trim) {
        if token.is_empty() {
            continue;
        }
        if token == "log" {
            let axis = axes.last_mut().ok_or(GridError::DanglingLog)?;
            if axis.log {
                return Err(GridError::Malformed(token.into()));
            }
            if !(axis.start > 0.0 && axis.stop > 0.0) {
                return Err(GridError::BadValue {
                    axis: axis.name.clone(),
                    message: "log spacing needs positive endpoints".into(),
                });
            }
            axis.log = true;
            continue;
        }
        let (name, range) = token
            .split_once('=')
            .ok_or_else(|| GridError::Malformed(token.into()))?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(GridError::Malformed(token.into()));
        }
        let parts: Vec<&str> = range.split(':').map(str::trim).collect();
        let [start, stop, steps] = parts[..] else {
            return Err(GridError::Malformed(token.into()));
        };
        let bad = |message: &str| GridError::BadValue {
            axis: name.into(),
            message: message.into(),
        };
        let number = |s: &str| -> Result<f64, GridError> {
            let v: f64 = s.parse().map_err(|_| bad(&format!("`{s}` is not a number")))?;
            if !v.is_finite() {
                return Err(bad("endpoints must be finite"));
            }
            Ok(v)
        };
        let start = number(start)?;
        let stop = number(stop)?;
        let steps: usize = steps
            .parse()
            .map_err(|_| bad(&format!("`{steps}` is not a step count")))?;
        if steps == 0 || steps > MAX_AXIS_STEPS {
            return Err(bad(&format!("step count must be in 1..={MAX_AXIS_STEPS}")));
        }
        if !(stop - start).is_finite() {
            return Err(bad("endpoints are too far apart"));
        }
        if axes.iter().any(|a| a.name == name) {
            return Err(GridError::Duplicate(name.into()));
        }
        axes.push(GridAxis {
            name: name.into(),
            start,
            stop,
            steps,
            log: false,
        });
        if axes
            .iter()
            .try_fold(1usize, |acc, a| {
                acc.checked_mul(a.steps).filter(|&n| n <= MAX_GRID_POINTS)
            })
            .is_none()
        {
            return Err(GridError::TooLarge);
        }
    }
    if axes.is_empty() {
        return Err(GridError::Empty);
    }
    Ok(GridSpec { axes })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("unknown family `{0}` (expected one of {list})", list = families::FAMILY_NAMES.join(", "))]
    UnknownFamily(String),
    #[error("family `{family}` has no parameter `{param}`")]
    UnknownParam { family: String, param: String },
    #[error("row {row} ({params}): {source}")]
    Domain {
        row: usize,
        params: String,
        #[source]
        source: Error,
    },
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRow {
    pub family: String,
    /// All family parameters in column order, after integer rounding.
    pub params: Vec<(String, f64)>,
    pub instance: FamilyInstance,
    pub report: BoundReport,
}

/// Builds and checks `family` at every grid point. Each row's report is the
/// headline check for the family's declared constraint class.
pub fn sweep_family(family: &str, grid: &GridSpec) -> Result<Vec<FamilyRow>, SweepError> {
    let defaults = families::family_params(family).ok_or_else(|| SweepError::UnknownFamily(family.into()))?;
    if let Some(axis) = grid.axes.iter().find(|a| !defaults.iter().any(|(n, _)| *n == a.name)) {
        return Err(SweepError::UnknownParam {
            family: family.into(),
            param: axis.name.clone(),
        });
    }
    grid.points()
        .into_iter()
        .enumerate()
        .map(|(row, point)| {
            let params: BTreeMap<String, f64> = point.iter().cloned().collect();
            let describe = || {
                point
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            let domain = |source| SweepError::Domain {
                row,
                params: describe(),
                source,
            };
            let instance = families::build(family, &params).map_err(domain)?;
            let report = run_check(check_for_class(instance.constraint), &instance.superposition).map_err(domain)?;
            let params = defaults
                .iter()
                .map(|(n, _)| (n.to_string(), instance.params[*n]))
                .collect();
            Ok(FamilyRow {
                family: family.into(),
                params,
                instance,
                report,
            })
        })
        .collect()
}

/// Column names for a family sweep CSV.
pub fn csv_header(family: &str) -> Vec<String> {
    let mut h = vec!["family".to_string()];
    if let Some(params) = families::family_params(family) {
        h.extend(params.iter().map(|(n, _)| n.to_string()));
    }
    h.extend(
        [
            "norm_sum",
            "e_phi",
            "e_psi",
            "e_superposition",
            "upsilon",
            "gain",
            "ratio",
            "satisfied",
        ]
        .map(String::from),
    );
    h
}

/// Renders rows as CSV. Integer parameters print as integers, every other
/// number with 17 significant digits; an undefined ratio is an empty field.
pub fn render_csv(family: &str, rows: &[FamilyRow]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(csv_header(family))?;
    for r in rows {
        let mut rec = vec![r.family.clone()];
        for (name, v) in &r.params {
            rec.push(if families::is_integer_param(name) {
                format!("{}", *v as u64)
            } else {
                fmt_f64(*v)
            });
        }
        let rep = &r.report;
        for v in [
            rep.norm_sum,
            rep.e_phi,
            rep.e_psi,
            rep.e_superposition,
            rep.upsilon,
            rep.gain,
        ] {
            rec.push(fmt_f64(v));
        }
        rec.push(rep.ratio.map(fmt_f64).unwrap_or_default());
        rec.push(rep.satisfied.to_string());
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

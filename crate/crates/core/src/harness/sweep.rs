use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::numtheory::odd_primes_between;
use crate::predictions::balance_threshold_t;

use super::config::ExperimentConfig;
use super::report::{ReportRow, VerificationReport, CSV_HEADER};
use super::run;

/// Upper limit on the number of grid points in one sweep.
pub const MAX_GRID_POINTS: usize = 100_000;

/// Values for one axis: an explicit list or every odd prime in a range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValues {
    List(Vec<Value>),
    Primes { primes: [u64; 2] },
}

/// A value computed from other fields of each grid point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DerivedValue {
    /// `round((1 − 2^{−1/(m−1)})·q)`, reading `m` and `q` from JSON pointers.
    BalanceThresholdSize { m: String, q: String },
}

/// Axes are keyed by JSON pointer into the base config, e.g.
/// `/construction/params/p`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterGrid {
    pub axes: BTreeMap<String, AxisValues>,
    #[serde(default)]
    pub derived: BTreeMap<String, DerivedValue>,
}

impl ParameterGrid {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: format!("grid.{}", e.path()),
            message: e.inner().to_string(),
        })
    }

    fn axis_values(&self) -> Vec<(String, Vec<Value>)> {
        self.axes
            .iter()
            .map(|(ptr, values)| {
                let list = match values {
                    AxisValues::List(v) => v.clone(),
                    AxisValues::Primes { primes: [lo, hi] } => odd_primes_between(*lo, *hi)
                        .into_iter()
                        .map(Value::from)
                        .collect(),
                };
                (ptr.clone(), list)
            })
            .collect()
    }

    /// Every grid point in lexicographic order of axis index, axes sorted by pointer.
    pub fn points(&self) -> Result<Vec<BTreeMap<String, Value>>> {
        let axes = self.axis_values();
        if axes.is_empty() || axes.iter().any(|(_, v)| v.is_empty()) {
            return Err(Error::EmptyGrid);
        }
        let total = axes
            .iter()
            .try_fold(1usize, |acc, (_, v)| acc.checked_mul(v.len()))
            .unwrap_or(usize::MAX);
        if total > MAX_GRID_POINTS {
            return Err(Error::BudgetExceeded {
                estimate: total as u128,
                budget: MAX_GRID_POINTS as u128,
            });
        }
        let mut points = vec![BTreeMap::new()];
        for (ptr, values) in &axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut next = p.clone();
                        next.insert(ptr.clone(), v.clone());
                        next
                    })
                })
                .collect();
        }
        Ok(points)
    }
}

fn set_pointer(doc: &mut Value, ptr: &str, value: Value) -> Result<()> {
    match doc.pointer_mut(ptr) {
        Some(slot) => {
            *slot = value;
            Ok(())
        }
        None => Err(Error::Config {
            path: ptr.into(),
            message: "pointer does not name a field of the base config".into(),
        }),
    }
}

fn read_u64(doc: &Value, ptr: &str) -> Result<u64> {
    doc.pointer(ptr)
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Config {
            path: ptr.into(),
            message: "expected a nonnegative integer".into(),
        })
}

/// Applies one grid point (and its derived values) to the base config.
pub fn instantiate_point(
    base: &ExperimentConfig,
    grid: &ParameterGrid,
    point: &BTreeMap<String, Value>,
) -> Result<(ExperimentConfig, BTreeMap<String, Value>)> {
    let mut doc = serde_json::to_value(base).expect("config serializes");
    for (ptr, value) in point {
        set_pointer(&mut doc, ptr, value.clone())?;
    }
    let mut params = point.clone();
    for (ptr, derived) in &grid.derived {
        let value = match derived {
            DerivedValue::BalanceThresholdSize { m, q } => {
                let threshold = balance_threshold_t(read_u64(&doc, m)?)?;
                Value::from(threshold.nearest_size(read_u64(&doc, q)?))
            }
        };
        set_pointer(&mut doc, ptr, value.clone())?;
        params.insert(ptr.clone(), value);
    }
    let text = serde_json::to_string(&doc).expect("json");
    Ok((ExperimentConfig::from_json(&text)?, params))
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub params: BTreeMap<String, Value>,
    /// A failed point keeps its error message; other points are unaffected.
    pub report: std::result::Result<VerificationReport, String>,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub columns: Vec<String>,
    pub points: Vec<SweepPoint>,
}

/// Runs `base` at every grid point on a pool of `workers` threads. Results
/// are in grid order regardless of completion order.
pub fn sweep(
    base: &ExperimentConfig,
    grid: &ParameterGrid,
    workers: usize,
) -> Result<SweepOutcome> {
    let points = grid.points()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let results: Vec<SweepPoint> = pool.install(|| {
        points
            .par_iter()
            .map(|point| {
                let start = Instant::now();
                let (params, report) = match instantiate_point(base, grid, point) {
                    Ok((config, params)) => (params, run(&config).map_err(|e| e.to_string())),
                    Err(e) => (point.clone(), Err(e.to_string())),
                };
                SweepPoint {
                    params,
                    report,
                    seconds: start.elapsed().as_secs_f64(),
                }
            })
            .collect()
    });
    let columns = grid
        .axes
        .keys()
        .chain(grid.derived.keys())
        .cloned()
        .collect();
    Ok(SweepOutcome {
        columns,
        points: results,
    })
}

fn param_text(v: Option<&Value>) -> String {
    match v {
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
        None => String::new(),
    }
}

impl SweepOutcome {
    pub fn any_failed(&self) -> bool {
        self.points
            .iter()
            .any(|p| matches!(&p.report, Ok(r) if !r.passed()))
    }

    pub fn any_errors(&self) -> bool {
        self.points.iter().any(|p| p.report.is_err())
    }

    /// One row per (grid point, compared quantity); failed points get a
    /// single `ERROR` row carrying the message.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut header: Vec<String> = self.columns.clone();
        header.extend(
            [
                "analysis",
                "sequence",
                "item",
                "empirical",
                "predicted",
                "deviation",
                "budget",
                "status",
                "seconds",
            ]
            .map(String::from),
        );
        w.write_record(&header).map_err(io)?;
        for point in &self.points {
            let params: Vec<String> = self
                .columns
                .iter()
                .map(|c| param_text(point.params.get(c)))
                .collect();
            let seconds = format!("{:.6}", point.seconds);
            match &point.report {
                Ok(report) => {
                    for row in &report.rows {
                        w.write_record(
                            params
                                .iter()
                                .map(String::as_str)
                                .chain(aggregate_fields(row))
                                .chain([seconds.as_str()]),
                        )
                        .map_err(io)?;
                    }
                }
                Err(message) => {
                    let tail = [
                        "error",
                        "",
                        message.as_str(),
                        "",
                        "",
                        "",
                        "",
                        "ERROR",
                        seconds.as_str(),
                    ];
                    w.write_record(params.iter().map(String::as_str).chain(tail))
                        .map_err(io)?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// The reports as a JSON array of `{"params", "report" | "error"}` records.
    pub fn to_json(&self) -> String {
        let items: Vec<Value> = self
            .points
            .iter()
            .map(|p| {
                let mut obj = serde_json::Map::new();
                obj.insert(
                    "params".into(),
                    serde_json::to_value(&p.params).expect("json"),
                );
                match &p.report {
                    Ok(r) => obj.insert("report".into(), serde_json::to_value(r).expect("json")),
                    Err(e) => obj.insert("error".into(), Value::from(e.clone())),
                };
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&items).expect("json");
        s.push('\n');
        s
    }
}

fn aggregate_fields(row: &ReportRow) -> [&str; 8] {
    let f = row.csv_fields();
    debug_assert_eq!(CSV_HEADER[5], "predicted_decimal");
    // analysis, sequence, item, empirical, predicted (decimal), deviation, budget, status
    [f[0], f[1], f[2], f[3], f[5], f[6], f[7], f[9]]
}

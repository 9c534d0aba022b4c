//! Run reports and their JSON / CSV encodings.

use std::collections::BTreeMap;
use std::io::Write;

use foldlab::{DyadicRational, OverlapResult};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

pub const SCHEMA: &str = "foldlab/1";
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Decimal places kept for real-valued quantities.
pub const REAL_PRECISION: u32 = 12;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: String,
    pub params: Value,
    pub results: Value,
    pub version: &'static str,
    pub elapsed_ms: f64,
}

/// Plain table for CSV output; the header row is mandatory.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.rows
            .push(row.into_iter().map(|s| s.to_string()).collect());
    }

    pub fn write<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// What a command hands back to the driver.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Value,
    pub table: Table,
    /// Named scalar metrics available to `--assert`.
    pub metrics: BTreeMap<String, f64>,
    /// Set when an exact property was violated (exit code 3).
    pub violation: Option<String>,
}

/// Numerator as a JSON integer when it fits in 64 bits, otherwise as a
/// decimal string.
fn wide_int(n: i128) -> Value {
    match i64::try_from(n) {
        Ok(v) => json!(v),
        Err(_) => json!(n.to_string()),
    }
}

pub fn round_real(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{:.*}", REAL_PRECISION as usize, x)
        .parse()
        .unwrap_or(x)
}

/// Exact pair plus text and decimal renderings.
pub fn dyadic(q: DyadicRational) -> Value {
    json!({
        "numerator": wide_int(q.numerator()),
        "log2_denominator": q.log2_denominator(),
        "text": q.to_string(),
        "decimal": q.to_f64(),
    })
}

pub fn real(x: f64) -> Value {
    json!({ "decimal": round_real(x), "precision": REAL_PRECISION })
}

pub fn ratio(r: &Ratio<i64>) -> Value {
    json!({
        "numerator": r.numer(),
        "denominator": r.denom(),
        "decimal": *r.numer() as f64 / *r.denom() as f64,
    })
}

pub fn ratio_text(r: &Ratio<i64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn overlap_result(r: &OverlapResult) -> Value {
    match *r {
        OverlapResult::Resolved {
            value,
            resolution_level,
        } => json!({
            "kind": "resolved",
            "value": dyadic(value),
            "resolution_level": resolution_level,
        }),
        OverlapResult::Undetermined {
            partial_sum,
            remainder_bound,
            depth,
        } => json!({
            "kind": "undetermined",
            "partial_sum": dyadic(partial_sum),
            "remainder_bound": dyadic(remainder_bound),
            "depth": depth,
        }),
    }
}

pub fn metrics_json(metrics: &BTreeMap<String, f64>) -> Value {
    Value::Object(metrics.iter().map(|(k, v)| (k.clone(), real(*v))).collect())
}

/// `<metric><=<value>` or `<metric>>=<value>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub metric: String,
    pub upper: bool,
    pub bound: f64,
}

impl std::str::FromStr for Assertion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (metric, bound, upper) = if let Some((m, b)) = s.split_once("<=") {
            (m, b, true)
        } else if let Some((m, b)) = s.split_once(">=") {
            (m, b, false)
        } else {
            return Err(format!("assertion {s:?} must look like metric<=value"));
        };
        let bound = bound
            .trim()
            .parse()
            .map_err(|_| format!("bad bound in {s:?}"))?;
        Ok(Self {
            metric: metric.trim().to_string(),
            upper,
            bound,
        })
    }
}

impl Serialize for Assertion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl std::fmt::Display for Assertion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}{}{}",
            self.metric,
            if self.upper { "<=" } else { ">=" },
            self.bound
        )
    }
}

impl Assertion {
    pub fn holds(&self, value: f64) -> bool {
        if self.upper {
            value <= self.bound
        } else {
            value >= self.bound
        }
    }
}

/// Evaluates the assertions; unknown metric names are usage errors.
pub fn evaluate(
    assertions: &[Assertion],
    metrics: &BTreeMap<String, f64>,
) -> Result<(Value, bool), CliError> {
    let mut all = true;
    let mut out = Vec::new();
    for a in assertions {
        let Some(&v) = metrics.get(&a.metric) else {
            let known: Vec<_> = metrics.keys().cloned().collect();
            return Err(CliError::Usage(format!(
                "unknown metric {:?} in --assert (available: {})",
                a.metric,
                known.join(", ")
            )));
        };
        let pass = a.holds(v);
        all &= pass;
        out.push(json!({ "assertion": a.to_string(), "value": real(v), "pass": pass }));
    }
    Ok((Value::Array(out), all))
}

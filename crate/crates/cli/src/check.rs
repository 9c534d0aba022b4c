use std::collections::BTreeMap;

use clap::{Args, Subcommand};
use foldlab::checks::{check_consistency, check_flip, check_hamming_triples, check_ultrametric};
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{dyadic, overlap_result, real, Outcome, Table};
use crate::{CliError, OutputArgs};

#[derive(Debug, Subcommand)]
pub enum CheckCommand {
    /// Tree-distance ultrametric inequality on random triples.
    Ultrametric(UltrametricArgs),
    /// The flip map negates the sequence.
    Flip(FlipArgs),
    /// Exact overlaps against finite-window overlaps.
    Consistency(ConsistencyArgs),
    /// Exploratory: ultrametric inequality for the Hamming density. Always exits 0.
    HammingTriples(UltrametricArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct UltrametricArgs {
    #[arg(long, default_value_t = 100_000)]
    pub triples: u64,
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct FlipArgs {
    #[arg(long, default_value_t = 1000)]
    pub cases: u64,
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    /// Windows compared on `[1, window]`.
    #[arg(long, default_value_t = 4096)]
    pub window: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ConsistencyArgs {
    #[arg(long, default_value_t = 100)]
    pub pairs: u64,
    #[arg(long, default_value_t = 1 << 20)]
    pub window: usize,
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
    #[arg(long, default_value_t = 40)]
    pub depth: usize,
    /// Only pairs resolved at or before this level are drawn.
    #[arg(long, default_value_t = 8)]
    pub resolve_by: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

impl CheckCommand {
    pub fn describe(&self) -> Result<(String, Value, OutputArgs), CliError> {
        let (name, params, output) = match self {
            CheckCommand::Ultrametric(a) => ("ultrametric", serde_json::to_value(a)?, &a.output),
            CheckCommand::Flip(a) => ("flip", serde_json::to_value(a)?, &a.output),
            CheckCommand::Consistency(a) => ("consistency", serde_json::to_value(a)?, &a.output),
            CheckCommand::HammingTriples(a) => {
                ("hamming-triples", serde_json::to_value(a)?, &a.output)
            }
        };
        Ok((name.to_string(), params, output.clone()))
    }

    pub fn run(&self) -> Result<Outcome, CliError> {
        let mut extra = Value::Null;
        let (metrics, violations, exploratory): (Vec<(&str, f64)>, u64, bool) = match self {
            CheckCommand::Ultrametric(a) => {
                let r = check_ultrametric(a.triples, a.depth, a.seed)?;
                (
                    vec![
                        ("triples", r.triples as f64),
                        ("violations", r.violations as f64),
                    ],
                    r.violations,
                    false,
                )
            }
            CheckCommand::Flip(a) => {
                let r = check_flip(a.cases, a.depth, a.window, a.seed)?;
                let m = vec![
                    ("cases", r.cases as f64),
                    ("overlap_violations", r.overlap_violations as f64),
                    ("window_violations", r.window_violations as f64),
                    ("violations", r.violations() as f64),
                ];
                (m, r.violations(), false)
            }
            CheckCommand::Consistency(a) => {
                if a.tol.is_nan() || a.tol < 0.0 {
                    return Err(CliError::Usage("--tol must be non-negative".into()));
                }
                let r = check_consistency(a.pairs, a.window, a.tol, a.depth, a.resolve_by, a.seed)?;
                let unresolved = r.cases.iter().filter(|c| c.q_window.is_none()).count();
                extra = json!(r
                    .cases
                    .iter()
                    .map(|c| json!({
                        "a": c.a,
                        "b": c.b,
                        "exact": overlap_result(&c.exact),
                        "q_window": c.q_window.map(real),
                        "residual": c.residual.map(real),
                    }))
                    .collect::<Vec<_>>());
                let m = vec![
                    ("pairs", r.cases.len() as f64),
                    ("max_residual", r.max_residual()),
                    ("unresolved_windows", unresolved as f64),
                    ("violations", r.violations() as f64),
                ];
                (m, r.violations(), false)
            }
            CheckCommand::HammingTriples(a) => {
                let r = check_hamming_triples(a.triples, a.depth, a.seed)?;
                extra = json!({ "max_excess": dyadic(r.max_excess) });
                let m = vec![
                    ("triples", r.triples as f64),
                    ("evaluated", r.evaluated as f64),
                    ("skipped", r.skipped as f64),
                    ("violations", r.violations as f64),
                    ("max_excess", r.max_excess.to_f64()),
                ];
                (m, r.violations, true)
            }
        };

        let metrics: BTreeMap<String, f64> = metrics
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let mut table = Table::new(&["metric", "value"]);
        for (k, v) in &metrics {
            table.push([k.clone(), v.to_string()]);
        }
        let mut results = json!({
            "violations": violations,
            "exploratory": exploratory,
            "metrics": crate::report::metrics_json(&metrics),
        });
        match self {
            CheckCommand::Consistency(_) => results["cases"] = extra,
            CheckCommand::HammingTriples(_) => results["details"] = extra,
            _ => {}
        }
        let violation =
            (!exploratory && violations > 0).then(|| format!("{violations} violations"));
        Ok(Outcome {
            results,
            table,
            metrics,
            violation,
        })
    }
}

//! `foldlab`: generate paperfolding and reference sequences, compute exact
//! overlaps, and reproduce overlap distributions.
//!
//! Exit codes: 0 success, 2 usage or parameter error, 3 assertion or
//! property failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

mod check;
mod dist;
mod generate;
mod overlap;
mod report;

use report::{evaluate, Assertion, Outcome, RunReport, SCHEMA, VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] foldlab::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "foldlab",
    version,
    about = "Paperfolding sequences and their overlap distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a window of one of the sequence families.
    Generate(generate::GenerateArgs),
    /// Exact overlap between two paperfolding choice sequences.
    Overlap(overlap::OverlapArgs),
    /// Exact and sampled overlap distributions.
    #[command(subcommand)]
    Dist(dist::DistCommand),
    /// Randomized property suites.
    #[command(subcommand)]
    Check(check::CheckCommand),
    /// Print the JSON schema of run reports.
    Schema,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub out: Format,
    /// Write to a file instead of stdout.
    #[arg(long, short = 'o')]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Threshold check on a reported metric, e.g. `tv<=0.005`; repeatable.
    #[arg(long = "assert", value_name = "METRIC<=VALUE")]
    #[serde(rename = "assert")]
    pub asserts: Vec<Assertion>,
}

fn params_of<T: Serialize>(args: &T) -> Result<Value, CliError> {
    Ok(serde_json::to_value(args)?)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let started = Instant::now();
    if let Command::Schema = cli.command {
        print!("{}", report::REPORT_SCHEMA);
        return Ok(ExitCode::SUCCESS);
    }
    let (name, params, output, outcome) = match cli.command {
        Command::Generate(a) => (
            "generate".to_string(),
            params_of(&a)?,
            a.output.clone(),
            generate::run(&a)?,
        ),
        Command::Overlap(a) => (
            "overlap".to_string(),
            params_of(&a)?,
            a.output.clone(),
            overlap::run(&a)?,
        ),
        Command::Dist(d) => {
            let (sub, params, output) = d.describe()?;
            (format!("dist {sub}"), params, output, d.run()?)
        }
        Command::Check(c) => {
            let (sub, params, output) = c.describe()?;
            (format!("check {sub}"), params, output, c.run()?)
        }
        Command::Schema => unreachable!("handled above"),
    };

    let Outcome {
        mut results,
        table,
        metrics,
        violation,
    } = outcome;
    let (assertions, asserts_ok) = evaluate(&output.asserts, &metrics)?;
    if !output.asserts.is_empty() {
        results["assertions"] = assertions;
    }
    let report = RunReport {
        schema: SCHEMA,
        command: name,
        params,
        results,
        version: VERSION,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    };

    let sink: Box<dyn Write> = match &output.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match output.out {
        Format::Json => {
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, &report)?;
            writeln!(sink)?;
            sink.flush()?;
        }
        Format::Csv => table.write(sink)?,
    }

    if let Some(v) = violation {
        eprintln!("property violated: {v}");
        return Ok(ExitCode::from(3));
    }
    if !asserts_ok {
        eprintln!("assertion failed: {}", json!(report.results["assertions"]));
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

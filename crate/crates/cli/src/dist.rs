use std::collections::BTreeMap;

use clap::{Args, Subcommand};
use foldlab::dist::{
    alternating_dist, paperfolding_atoms, sturmian_dist, ExactDistribution, GOLDEN_GAMMA,
    MAX_EXACT_DEPTH,
};
use foldlab::sample::{
    sample_alternating, sample_paperfolding, sample_period_doubling, sample_sturmian,
    sample_thue_morse, LagSample, SamplerMode,
};
use foldlab::stats::tv_distance;
use foldlab::{DyadicRational, OverlapKey, SturmianParams};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{dyadic, ratio, ratio_text, real, Outcome, Table};
use crate::{CliError, OutputArgs};

#[derive(Debug, Subcommand)]
pub enum DistCommand {
    /// Exact paperfolding overlap law truncated at a depth.
    Exact(ExactArgs),
    /// Monte Carlo histogram of paperfolding overlaps.
    Sample(SampleArgs),
    /// Alternating system: exact law, optionally with an empirical check.
    Alternating(AlternatingArgs),
    /// Sturmian codings of a rotation: reference law and sampled phase pairs.
    Sturmian(SturmianArgs),
    /// Thue–Morse overlaps against random translates.
    ThueMorse(LagArgs),
    /// Period-doubling overlaps against random translates (exploratory).
    PeriodDoubling(LagArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ExactArgs {
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub pairs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 30)]
    pub depth: usize,
    /// `choices` draws full choice pairs; `relation` draws level relations.
    #[arg(long, default_value_t = SamplerMode::Choices)]
    pub mode: SamplerMode,
    /// Compare against the exact law truncated at this depth (adds `tv`).
    #[arg(long)]
    pub compare_depth: Option<u32>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct AlternatingArgs {
    /// Also sample this many random phase pairs.
    #[arg(long)]
    pub pairs: Option<u64>,
    #[arg(long, default_value_t = 1024)]
    pub window: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SturmianArgs {
    #[arg(long, default_value_t = 100_000)]
    pub pairs: u64,
    #[arg(long, default_value_t = GOLDEN_GAMMA)]
    pub alpha: f64,
    #[arg(long, default_value_t = GOLDEN_GAMMA)]
    pub c: f64,
    /// Window length for audited pairs.
    #[arg(long, default_value_t = 1_000_000)]
    pub window: usize,
    /// Number of pairs also measured on a finite window.
    #[arg(long, default_value_t = 100)]
    pub audit: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Histogram bins on [-1, 1].
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct LagArgs {
    #[arg(long, default_value_t = 10_000)]
    pub lags: u64,
    #[arg(long, default_value_t = 1 << 16)]
    pub window: usize,
    #[arg(long, default_value_t = 1 << 24)]
    pub max_lag: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

impl DistCommand {
    pub fn describe(&self) -> Result<(String, Value, OutputArgs), CliError> {
        let (name, params, output) = match self {
            DistCommand::Exact(a) => ("exact", serde_json::to_value(a)?, &a.output),
            DistCommand::Sample(a) => ("sample", serde_json::to_value(a)?, &a.output),
            DistCommand::Alternating(a) => ("alternating", serde_json::to_value(a)?, &a.output),
            DistCommand::Sturmian(a) => ("sturmian", serde_json::to_value(a)?, &a.output),
            DistCommand::ThueMorse(a) => ("thue-morse", serde_json::to_value(a)?, &a.output),
            DistCommand::PeriodDoubling(a) => {
                ("period-doubling", serde_json::to_value(a)?, &a.output)
            }
        };
        Ok((name.to_string(), params, output.clone()))
    }

    pub fn run(&self) -> Result<Outcome, CliError> {
        match self {
            DistCommand::Exact(a) => exact(a),
            DistCommand::Sample(a) => sample(a),
            DistCommand::Alternating(a) => alternating(a),
            DistCommand::Sturmian(a) => sturmian(a),
            DistCommand::ThueMorse(a) => {
                lags(sample_thue_morse(a.lags, a.window, a.max_lag, a.seed)?)
            }
            DistCommand::PeriodDoubling(a) => {
                lags(sample_period_doubling(a.lags, a.window, a.max_lag, a.seed)?)
            }
        }
    }
}

fn atoms_json(d: &ExactDistribution) -> Value {
    let atoms: Vec<_> = d
        .atoms
        .iter()
        .map(|(v, p)| json!({ "value": dyadic(*v), "probability": dyadic(*p) }))
        .collect();
    json!({
        "atoms": atoms,
        "atom_count": d.atoms.len(),
        "unresolved_mass": dyadic(d.unresolved_mass),
        "atom_mass": dyadic(d.atom_mass()),
        "total_mass": dyadic(d.total_mass()),
    })
}

fn atoms_table(d: &ExactDistribution) -> Table {
    let mut t = Table::new(&["num", "log2den", "prob_num", "prob_log2den"]);
    for (v, p) in &d.atoms {
        t.push([
            v.numerator().to_string(),
            v.log2_denominator().to_string(),
            p.numerator().to_string(),
            p.log2_denominator().to_string(),
        ]);
    }
    if !d.unresolved_mass.is_zero() {
        let u = d.unresolved_mass;
        t.push([
            "unresolved".to_string(),
            String::new(),
            u.numerator().to_string(),
            u.log2_denominator().to_string(),
        ]);
    }
    t
}

fn exact(a: &ExactArgs) -> Result<Outcome, CliError> {
    if a.depth > MAX_EXACT_DEPTH {
        return Err(CliError::Usage(format!(
            "--depth must be at most {MAX_EXACT_DEPTH}"
        )));
    }
    let d = paperfolding_atoms(a.depth)?;
    let metrics = BTreeMap::from([
        ("atom_count".to_string(), d.atoms.len() as f64),
        ("unresolved_mass".to_string(), d.unresolved_mass.to_f64()),
    ]);
    let violation = (!d.satisfies_dyadic_support() || d.total_mass() != DyadicRational::ONE)
        .then(|| "exact law is not a probability on the dyadic support".to_string());
    Ok(Outcome {
        results: atoms_json(&d),
        table: atoms_table(&d),
        metrics,
        violation,
    })
}

fn key_text(k: &OverlapKey) -> String {
    match k {
        OverlapKey::Value(q) => q.to_string(),
        OverlapKey::Unresolved => "unresolved".to_string(),
    }
}

fn key_json(k: &OverlapKey) -> Value {
    match k {
        OverlapKey::Value(q) => dyadic(*q),
        OverlapKey::Unresolved => json!("unresolved"),
    }
}

fn sample(a: &SampleArgs) -> Result<Outcome, CliError> {
    if let Some(c) = a.compare_depth {
        if c as usize > a.depth || c > MAX_EXACT_DEPTH {
            return Err(CliError::Usage(format!(
                "--compare-depth must be at most --depth and at most {MAX_EXACT_DEPTH}"
            )));
        }
    }
    let h = sample_paperfolding(a.pairs, a.seed, a.depth, a.mode)?;
    let n = h.sample_count;
    let freq = |q: DyadicRational| h.frequency(&OverlapKey::Value(q));

    let mut metrics = BTreeMap::from([
        ("freq_0".to_string(), freq(DyadicRational::ZERO)),
        ("freq_plus_half".to_string(), freq(DyadicRational::HALF)),
        ("freq_minus_half".to_string(), freq(-DyadicRational::HALF)),
        (
            "unresolved_freq".to_string(),
            h.frequency(&OverlapKey::Unresolved),
        ),
    ]);

    // Symmetry on the atoms of level <= 3: |f(q) - f(-q)| in units of the
    // multinomial standard deviation sqrt(2p/N) of the difference.
    let reference = paperfolding_atoms(3)?;
    let mut symmetry = Vec::new();
    let mut max_z: f64 = 0.0;
    for (&q, &p) in reference
        .atoms
        .range(DyadicRational::ZERO..)
        .filter(|(q, _)| !q.is_zero())
    {
        let diff = freq(q) - freq(-q);
        let sigma = (2.0 * p.to_f64() / n as f64).sqrt();
        let z = diff.abs() / sigma;
        max_z = max_z.max(z);
        symmetry.push(
            json!({ "value": dyadic(q), "diff": real(diff), "sigma": real(sigma), "z": real(z) }),
        );
    }
    metrics.insert("symmetry_max_z".to_string(), max_z);

    let comparison = match a.compare_depth {
        None => Value::Null,
        Some(c) => {
            let exact = paperfolding_atoms(c)?;
            let tv = tv_distance(&h.truncated(c).frequencies(), &exact.to_probabilities())?;
            metrics.insert("tv".to_string(), tv);
            json!({ "depth": c, "tv": real(tv) })
        }
    };

    let mut table = Table::new(&["value", "count"]);
    let mut histogram = Vec::new();
    for (k, &c) in &h.counts {
        table.push([key_text(k), c.to_string()]);
        histogram.push(json!({ "value": key_json(k), "count": c }));
    }
    let results = json!({
        "sample_count": n,
        "seed": a.seed,
        "depth": a.depth,
        "mode": a.mode.to_string(),
        "histogram": histogram,
        "symmetry": symmetry,
        "comparison": comparison,
        "metrics": crate::report::metrics_json(&metrics),
    });
    Ok(Outcome {
        results,
        table,
        metrics,
        violation: None,
    })
}

fn ratio_histogram(counts: &BTreeMap<Ratio<i64>, u64>) -> (Vec<Value>, Table) {
    let mut table = Table::new(&["value", "count"]);
    let mut out = Vec::new();
    for (q, &c) in counts {
        table.push([ratio_text(q), c.to_string()]);
        out.push(json!({ "value": ratio(q), "count": c }));
    }
    (out, table)
}

fn alternating(a: &AlternatingArgs) -> Result<Outcome, CliError> {
    let d = alternating_dist();
    let mut results = atoms_json(&d);
    let mut table = atoms_table(&d);
    let mut metrics = BTreeMap::new();
    let mut violation = None;
    if let Some(pairs) = a.pairs {
        let s = sample_alternating(pairs, a.window, a.seed)?;
        let (hist, t) = ratio_histogram(&s.histogram.counts);
        table = t;
        metrics.insert("disagreements".to_string(), s.disagreements as f64);
        if s.disagreements > 0 {
            violation = Some(format!(
                "{} phase pairs disagree with the exact overlap",
                s.disagreements
            ));
        }
        results["sample"] = json!({
            "pairs": pairs,
            "window": a.window,
            "seed": a.seed,
            "histogram": hist,
            "disagreements": s.disagreements,
        });
    }
    Ok(Outcome {
        results,
        table,
        metrics,
        violation,
    })
}

fn sturmian(a: &SturmianArgs) -> Result<Outcome, CliError> {
    if a.bins == 0 {
        return Err(CliError::Usage("--bins must be positive".into()));
    }
    let params = SturmianParams::new(a.alpha, a.c)?;
    let reference = sturmian_dist(&params);
    let s = sample_sturmian(params, a.pairs, a.window, a.audit, a.seed)?;

    let atom_mass = s.atom_mass();
    let ks = s.ks_continuous()?;
    let mut metrics = BTreeMap::from([
        ("atom_mass".to_string(), atom_mass),
        (
            "atom_mass_error".to_string(),
            (atom_mass - params.atom_weight()).abs(),
        ),
        ("ks".to_string(), ks),
    ]);
    if let Some(r) = s.max_residual() {
        metrics.insert("max_residual".to_string(), r);
    }

    let hist = s.histogram(a.bins);
    let mut table = Table::new(&["value", "count"]);
    let mut bins = Vec::new();
    for (i, &c) in hist.counts.iter().enumerate() {
        let x = hist.bin_center(i);
        table.push([crate::report::round_real(x).to_string(), c.to_string()]);
        bins.push(json!({ "center": real(x), "count": c }));
    }
    let results = json!({
        "reference": {
            "atoms": reference.atoms.iter().map(|t| json!({ "value": real(t.value), "probability": real(t.probability) })).collect::<Vec<_>>(),
            "continuous": reference.continuous.map(|c| json!({ "density": real(c.density), "lo": real(c.lo), "hi": real(c.hi) })),
        },
        "pairs": a.pairs,
        "audited": s.audited(),
        "histogram": { "lo": hist.lo, "hi": hist.hi, "bins": bins },
        "metrics": crate::report::metrics_json(&metrics),
    });
    Ok(Outcome {
        results,
        table,
        metrics,
        violation: None,
    })
}

fn lags(s: LagSample) -> Result<Outcome, CliError> {
    let metrics = BTreeMap::from([
        ("mean_q2".to_string(), s.mean_q2()),
        ("median_abs_q".to_string(), s.median_abs_q()),
    ]);
    let (hist, table) = ratio_histogram(&s.histogram().counts);
    let results = json!({
        "family": s.family,
        "lags": s.lags.len(),
        "window": s.window,
        "max_lag": s.max_lag,
        "seed": s.seed,
        "exploratory": s.exploratory,
        "histogram": hist,
        "metrics": crate::report::metrics_json(&metrics),
    });
    Ok(Outcome {
        results,
        table,
        metrics,
        violation: None,
    })
}

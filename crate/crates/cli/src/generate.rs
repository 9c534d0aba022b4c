use clap::{Args, ValueEnum};
use foldlab::dist::GOLDEN_GAMMA;
use foldlab::sample::chunk_rng;
use foldlab::seq::{
    alternating_window, looks_rational, paperfold_window, period_doubling_window_at,
    sturmian_window, thue_morse_window,
};
use foldlab::ChoiceSequence;
use serde::Serialize;
use serde_json::json;

use crate::report::{Outcome, Table};
use crate::{CliError, OutputArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Paperfold,
    Alternating,
    ThueMorse,
    PeriodDoubling,
    Sturmian,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Paperfolding choices, e.g. `1,2,1`.
    #[arg(long)]
    pub choices: Option<ChoiceSequence>,
    /// Draw random paperfolding choices from this seed when `--choices` is absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of paperfolding levels used.
    #[arg(long, default_value_t = 64)]
    pub depth: usize,
    /// Alternating phase (0 or 1).
    #[arg(long, default_value_t = 0)]
    pub phase: u8,
    /// First index for Thue–Morse and period-doubling windows.
    #[arg(long, default_value_t = 0)]
    pub offset: u64,
    /// First site for paperfolding, alternating and Sturmian windows.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub start: i64,
    #[arg(long)]
    pub length: usize,
    /// Sturmian rotation number.
    #[arg(long, default_value_t = GOLDEN_GAMMA)]
    pub alpha: f64,
    /// Sturmian coding-interval length.
    #[arg(long, default_value_t = GOLDEN_GAMMA)]
    pub c: f64,
    /// Sturmian phase.
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

fn paperfold_choices(args: &GenerateArgs) -> Result<ChoiceSequence, CliError> {
    if args.depth == 0 {
        return Err(CliError::Usage("--depth must be positive".into()));
    }
    match (&args.choices, args.seed) {
        (Some(c), _) => Ok(c.truncated(args.depth)),
        (None, Some(seed)) => {
            if args.depth > foldlab::seq::MAX_DEPTH {
                return Err(CliError::Usage(format!(
                    "--depth exceeds {}",
                    foldlab::seq::MAX_DEPTH
                )));
            }
            Ok(ChoiceSequence::random(&mut chunk_rng(seed, 0), args.depth))
        }
        (None, None) => Err(CliError::Usage(
            "paperfold needs --choices or --seed".into(),
        )),
    }
}

pub fn run(args: &GenerateArgs) -> Result<Outcome, CliError> {
    let mut extra = json!({});
    let window = match args.family {
        Family::Paperfold => {
            let k = paperfold_choices(args)?;
            extra = json!({ "choices": k, "depth": k.depth() });
            paperfold_window(&k, args.start, args.length)?
        }
        Family::Alternating => alternating_window(args.phase, args.start, args.length)?,
        Family::ThueMorse => thue_morse_window(args.offset, args.length)?,
        Family::PeriodDoubling => period_doubling_window_at(args.offset, args.length)?,
        Family::Sturmian => {
            extra = json!({ "periodic": looks_rational(args.alpha, 10_000) });
            sturmian_window(args.alpha, args.c, args.beta, args.start, args.length)?
        }
    };

    let levels: Option<Vec<Option<u32>>> = window
        .has_fill_levels()
        .then(|| (0..window.len()).map(|i| window.fill_level(i)).collect());
    let mut results = json!({
        "family": args.family,
        "start": window.start(),
        "length": window.len(),
        "window": window.to_sign_string(),
        "fill_levels": levels,
        "unresolved_count": window.unresolved_count(),
    });
    if let (Some(r), Some(e)) = (results.as_object_mut(), extra.as_object()) {
        r.extend(e.clone());
    }

    let mut table = Table::new(&["site", "value", "fill_level"]);
    let signs = window.to_sign_string();
    for (i, c) in signs.chars().enumerate() {
        let level = window
            .fill_level(i)
            .map(|l| l.to_string())
            .unwrap_or_default();
        table.push([
            (window.start() + i as i64).to_string(),
            c.to_string(),
            level,
        ]);
    }

    let metrics = [(
        "unresolved_count".to_string(),
        window.unresolved_count() as f64,
    )]
    .into();
    Ok(Outcome {
        results,
        table,
        metrics,
        violation: None,
    })
}

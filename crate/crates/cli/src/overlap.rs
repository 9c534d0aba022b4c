use clap::Args;
use foldlab::overlap::{
    hamming_from_overlap, level_relations, overlap_exact, window_overlap, LevelRelation,
};
use foldlab::seq::paperfold_window;
use foldlab::{ChoiceSequence, Error, OverlapResult};
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{dyadic, overlap_result, ratio, ratio_text, real, Outcome, Table};
use crate::{CliError, OutputArgs};

#[derive(Debug, Args, Serialize)]
pub struct OverlapArgs {
    /// Choices of the first sequence, e.g. `1,3`.
    #[arg(long)]
    pub a: ChoiceSequence,
    /// Choices of the second sequence.
    #[arg(long)]
    pub b: ChoiceSequence,
    /// Compare site `s` of the first with site `s + shift` of the second.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub shift: i64,
    /// Also measure the overlap on the window `[1, N]`.
    #[arg(long, value_name = "N")]
    pub window_check: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

fn relation_name(r: LevelRelation) -> &'static str {
    match r {
        LevelRelation::Mismatch => "mismatch",
        LevelRelation::Same => "same",
        LevelRelation::Opposite => "opposite",
    }
}

pub fn run(args: &OverlapArgs) -> Result<Outcome, CliError> {
    let exact = overlap_exact(&args.a, &args.b, args.shift);
    let relations: Vec<_> = level_relations(&args.a, &args.b, args.shift)
        .into_iter()
        .map(relation_name)
        .collect();

    let (lo, hi) = exact.interval();
    // Undetermined overlaps may poke outside [-1, 1] by the remainder bound.
    let clamp = |q: foldlab::DyadicRational| {
        q.clamp(
            foldlab::DyadicRational::MINUS_ONE,
            foldlab::DyadicRational::ONE,
        )
    };
    let hamming = match exact {
        OverlapResult::Resolved { value, .. } => {
            json!({ "value": dyadic(hamming_from_overlap(value)?) })
        }
        OverlapResult::Undetermined { .. } => json!({
            "lower": dyadic(hamming_from_overlap(clamp(hi))?),
            "upper": dyadic(hamming_from_overlap(clamp(lo))?),
        }),
    };

    let mut table = Table::new(&["field", "value"]);
    table.push([
        "kind",
        if exact.is_resolved() {
            "resolved"
        } else {
            "undetermined"
        },
    ]);
    match exact {
        OverlapResult::Resolved {
            value,
            resolution_level,
        } => {
            table.push(["value".to_string(), value.to_string()]);
            table.push(["resolution_level".to_string(), resolution_level.to_string()]);
        }
        OverlapResult::Undetermined {
            partial_sum,
            remainder_bound,
            ..
        } => {
            table.push(["partial_sum".to_string(), partial_sum.to_string()]);
            table.push(["remainder_bound".to_string(), remainder_bound.to_string()]);
        }
    }

    let mut metrics = std::collections::BTreeMap::new();
    metrics.insert("q".to_string(), exact.partial_sum().to_f64());
    let window_check = match args.window_check {
        None => Value::Null,
        Some(n) => {
            let w = paperfold_window(&args.a, 1, n)?;
            let w2 = paperfold_window(&args.b, 1 + args.shift, n)?.relabelled(1);
            match window_overlap(&w, &w2) {
                Ok(q) => {
                    let q_real = *q.numer() as f64 / *q.denom() as f64;
                    let residual = exact.residual(q_real);
                    metrics.insert("residual".to_string(), residual);
                    table.push(["q_window".to_string(), ratio_text(&q)]);
                    table.push(["residual".to_string(), residual.to_string()]);
                    json!({ "window": n, "q_window": ratio(&q), "residual": real(residual) })
                }
                Err(Error::UnresolvedSite(s)) => {
                    table.push(["unresolved_site".to_string(), s.to_string()]);
                    json!({ "window": n, "unresolved_site": s })
                }
                Err(e) => return Err(e.into()),
            }
        }
    };

    let results = json!({
        "a": args.a,
        "b": args.b,
        "shift": args.shift,
        "overlap": overlap_result(&exact),
        "relations": relations,
        "hamming": hamming,
        "window_check": window_check,
    });
    Ok(Outcome {
        results,
        table,
        metrics,
        violation: None,
    })
}

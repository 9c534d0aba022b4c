//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use foldlab::checks::{check_consistency, check_flip, check_ultrametric};
use foldlab::dist::{alternating_dist, paperfolding_atoms, GOLDEN_GAMMA};
use foldlab::sample::{
    sample_alternating, sample_paperfolding, sample_sturmian, sample_thue_morse, Histogram,
    SamplerMode,
};
use foldlab::stats::tv_distance;
use foldlab::{DyadicRational, OverlapKey, SturmianParams};
use num_rational::Ratio;
use serde_json::Value;

const SEED: u64 = 7;
const PAIRS: u64 = 1_000_000;

type Criterion<'a> = Box<dyn FnOnce() -> Verdict + 'a>;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn foldlab(args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_foldlab"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code(), out.stdout)
}

/// `(numerator, log2_denominator)` from an exact JSON value.
fn pair(v: &Value) -> (i128, u32) {
    let n = match &v["numerator"] {
        Value::String(s) => s.parse().unwrap(),
        n => n.as_i64().unwrap().into(),
    };
    (n, v["log2_denominator"].as_u64().unwrap() as u32)
}

fn exact_depth_10() -> Verdict {
    const N: u32 = 10;
    let t = Instant::now();
    let (code, stdout) = foldlab(&["dist", "exact", "--depth", "10"]);
    let elapsed = t.elapsed();
    if code != Some(0) {
        return verdict(false, format!("exit code {code:?}"));
    }
    let report: Value = serde_json::from_slice(&stdout).unwrap();
    let atoms = report["results"]["atoms"].as_array().unwrap();

    // Independent enumeration of the expected support and masses.
    let mut expected = BTreeSet::from([((0i128, 0u32), (1i128, 1u32))]);
    for n in 1..=N {
        for m in (-(1i128 << n) + 1..1i128 << n).step_by(2) {
            expected.insert(((m, n), (1, 2 * n + 1)));
        }
    }
    let got: BTreeSet<_> = atoms
        .iter()
        .map(|a| (pair(&a["value"]), pair(&a["probability"])))
        .collect();

    // Total atom mass over the common denominator 2^(2N+1).
    let scale = 2 * N + 1;
    let total: i128 = got.iter().map(|(_, (p, e))| p << (scale - e)).sum();
    let target = (1i128 << scale) - (1i128 << (scale - (N + 1)));
    let count_ok = atoms.len() == 1 + (1..=N).map(|n| 1usize << n).sum::<usize>();
    let (un, ue) = pair(&report["results"]["unresolved_mass"]);

    verdict(
        count_ok
            && got == expected
            && total == target
            && (un, ue) == (1, N + 1)
            && within(elapsed, 1.0),
        format!(
            "{} atoms, mass exact: {}, {:.0} ms",
            atoms.len(),
            total == target,
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn headline(h: &Histogram<OverlapKey>, elapsed: Duration) -> Verdict {
    let f = |q: DyadicRational| h.frequency(&OverlapKey::Value(q));
    let (f0, fp, fm) = (
        f(DyadicRational::ZERO),
        f(DyadicRational::HALF),
        f(-DyadicRational::HALF),
    );
    let pass = (f0 - 0.5).abs() <= 0.0015
        && (fp - 0.125).abs() <= 0.001
        && (fm - 0.125).abs() <= 0.001
        && within(elapsed, 10.0);
    verdict(
        pass,
        format!(
            "freq(0)={f0:.5} freq(+1/2)={fp:.5} freq(-1/2)={fm:.5}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn tv_agreement(h: &Histogram<OverlapKey>) -> Verdict {
    let exact = paperfolding_atoms(8).unwrap().to_probabilities();
    let tv = tv_distance(&h.truncated(8).frequencies(), &exact).unwrap();
    // The same check through the CLI's --assert contract.
    let (code, _) = foldlab(&[
        "dist",
        "sample",
        "--pairs",
        "1000000",
        "--seed",
        "7",
        "--depth",
        "30",
        "--compare-depth",
        "8",
        "--assert",
        "tv<=0.005",
    ]);
    verdict(
        tv <= 0.005 && code == Some(0),
        format!("tv={tv:.5}, cli exit {code:?}"),
    )
}

fn consistency() -> Verdict {
    let t = Instant::now();
    let r = check_consistency(100, 1 << 20, 0.01, 40, 8, SEED).unwrap();
    let elapsed = t.elapsed();
    let all_measured = r.cases.iter().all(|c| c.residual.is_some());
    verdict(
        r.cases.len() == 100 && all_measured && r.violations() == 0 && within(elapsed, 30.0),
        format!(
            "{} pairs, {} violations, max residual {:.2e}, {:.2} s",
            r.cases.len(),
            r.violations(),
            r.max_residual(),
            elapsed.as_secs_f64()
        ),
    )
}

fn ultrametric() -> Verdict {
    let r = check_ultrametric(100_000, 20, SEED).unwrap();
    verdict(
        r.violations == 0,
        format!("{} triples, {} violations", r.triples, r.violations),
    )
}

fn spin_flip() -> Verdict {
    let r = check_flip(1000, 20, 1 << 12, SEED).unwrap();
    verdict(
        r.violations() == 0,
        format!(
            "{} cases, {} overlap and {} window violations",
            r.cases, r.overlap_violations, r.window_violations
        ),
    )
}

fn alternating() -> Verdict {
    let d = alternating_dist();
    let expected = BTreeMap::from([
        (DyadicRational::MINUS_ONE, DyadicRational::HALF),
        (DyadicRational::ONE, DyadicRational::HALF),
    ]);
    let exact_ok = d.atoms == expected && d.unresolved_mass.is_zero();
    let s = sample_alternating(10_000, 1001, SEED).unwrap();
    let support_ok = s
        .histogram
        .counts
        .keys()
        .all(|q| *q == Ratio::from_integer(1) || *q == Ratio::from_integer(-1));
    verdict(
        exact_ok && support_ok && s.disagreements == 0,
        format!(
            "exact law ok: {exact_ok}, {} sampled pairs, {} disagreements",
            s.histogram.sample_count, s.disagreements
        ),
    )
}

fn sturmian() -> Verdict {
    let t = Instant::now();
    let s = sample_sturmian(SturmianParams::fibonacci(), 100_000, 1_000_000, 100, SEED).unwrap();
    let elapsed = t.elapsed();
    let mass = s.atom_mass();
    let target = 2.0 * GOLDEN_GAMMA - 1.0;
    let ks = s.ks_continuous().unwrap();
    let residual = s.max_residual().unwrap_or(f64::INFINITY);
    verdict(
        (mass - target).abs() <= 0.01 && ks <= 0.01 && s.audited() == 100 && residual <= 0.005 && within(elapsed, 60.0),
        format!(
            "atom mass {mass:.5} (target {target:.5}), ks {ks:.5}, max residual {residual:.2e} over {} audits, {:.2} s",
            s.audited(),
            elapsed.as_secs_f64()
        ),
    )
}

fn thue_morse() -> Verdict {
    let s = sample_thue_morse(10_000, 1 << 16, 1 << 24, SEED).unwrap();
    let (m2, med) = (s.mean_q2(), s.median_abs_q());
    verdict(
        m2 <= 0.02 && med <= 0.05,
        format!("mean q^2 {m2:.5}, median |q| {med:.5}"),
    )
}

fn symmetry(h: &Histogram<OverlapKey>) -> Verdict {
    let n = h.sample_count as f64;
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for (&q, &p) in paperfolding_atoms(3)
        .unwrap()
        .atoms
        .iter()
        .filter(|(q, _)| **q > DyadicRational::ZERO)
    {
        let diff = (h.frequency(&OverlapKey::Value(q)) - h.frequency(&OverlapKey::Value(-q))).abs();
        // Given the combined count of q and -q, the split is Binomial(M, 1/2).
        let sigma = (2.0 * p.to_f64() / n).sqrt();
        worst = worst.max(diff / sigma);
        pass &= diff <= 3.0 * sigma;
    }
    verdict(
        pass,
        format!("max |f(q)-f(-q)| = {worst:.2} sigma over atoms with n <= 3"),
    )
}

fn main() -> ExitCode {
    let t = Instant::now();
    let h = sample_paperfolding(PAIRS, SEED, 30, SamplerMode::Choices).unwrap();
    let sample_time = t.elapsed();

    let criteria: Vec<(&str, Criterion)> = vec![
        ("exact law at depth 10", Box::new(exact_depth_10)),
        (
            "headline probabilities",
            Box::new(|| headline(&h, sample_time)),
        ),
        ("sampler vs exact law (TV)", Box::new(|| tv_agreement(&h))),
        ("exact vs window consistency", Box::new(consistency)),
        ("ultrametricity", Box::new(ultrametric)),
        ("spin flip", Box::new(spin_flip)),
        ("alternating system", Box::new(alternating)),
        ("Fibonacci / Sturmian", Box::new(sturmian)),
        ("Thue-Morse concentration", Box::new(thue_morse)),
        ("symmetry of the empirical law", Box::new(|| symmetry(&h))),
    ];

    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let v = run();
        println!(
            "{} [{:>2}] {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

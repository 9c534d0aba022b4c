use std::process::{Command, Output};

use foldlab::DyadicRational;
use serde_json::{json, Value};

fn foldlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foldlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let out = foldlab(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn csv_rows(args: &[&str]) -> (Vec<String>, Vec<Vec<String>>) {
    let out = foldlab(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn dyadic_of(v: &Value) -> DyadicRational {
    v["text"].as_str().unwrap().parse().unwrap()
}

fn d(s: &str) -> DyadicRational {
    s.parse().unwrap()
}

#[test]
fn generate_examples() {
    let r = json_of(&[
        "generate",
        "--family",
        "paperfold",
        "--choices",
        "1,2,1",
        "--start",
        "1",
        "--length",
        "7",
    ]);
    assert_eq!(r["results"]["window"], "+---++-");
    assert_eq!(r["results"]["fill_levels"], json!([1, 2, 1, 3, 1, 2, 1]));
    assert_eq!(r["results"]["unresolved_count"], 0);

    let r = json_of(&[
        "generate",
        "--family",
        "alternating",
        "--phase",
        "0",
        "--start",
        "0",
        "--length",
        "4",
    ]);
    assert_eq!(r["results"]["window"], "+-+-");
    let r = json_of(&[
        "generate",
        "--family",
        "thue-morse",
        "--offset",
        "0",
        "--length",
        "8",
    ]);
    assert_eq!(r["results"]["window"], "+--+-++-");
    assert_eq!(r["results"]["fill_levels"], Value::Null);
}

#[test]
fn generate_reports_unresolved_sites() {
    // Depth 2 leaves every fourth site open.
    let r = json_of(&[
        "generate",
        "--family",
        "paperfold",
        "--choices",
        "1,1",
        "--start",
        "1",
        "--length",
        "8",
    ]);
    let w = r["results"]["window"].as_str().unwrap();
    assert_eq!(w.matches('?').count(), 2);
    assert_eq!(r["results"]["unresolved_count"], 2);
}

#[test]
fn generate_csv() {
    let (header, rows) = csv_rows(&[
        "generate",
        "--family",
        "paperfold",
        "--choices",
        "1,2,1",
        "--start",
        "1",
        "--length",
        "7",
        "--out",
        "csv",
    ]);
    assert_eq!(header, ["site", "value", "fill_level"]);
    assert_eq!(rows[3], ["4", "-", "3"]);
    let signs: String = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(signs, "+---++-");
}

#[test]
fn overlap_examples() {
    let r = json_of(&["overlap", "--a", "1,3", "--b", "2,4"]);
    let o = &r["results"]["overlap"];
    assert_eq!(o["kind"], "resolved");
    assert_eq!(dyadic_of(&o["value"]), DyadicRational::ZERO);
    assert_eq!(
        dyadic_of(&r["results"]["hamming"]["value"]),
        DyadicRational::HALF
    );

    let r = json_of(&["overlap", "--a", "1,2", "--b", "3,2"]);
    assert_eq!(dyadic_of(&r["results"]["overlap"]["value"]), d("-1/2"));
    assert_eq!(r["results"]["relations"], json!(["opposite", "mismatch"]));

    let r = json_of(&["overlap", "--a", "1,1,1", "--b", "1,1,1"]);
    let o = &r["results"]["overlap"];
    assert_eq!(o["kind"], "undetermined");
    assert_eq!(dyadic_of(&o["partial_sum"]), d("7/8"));
    assert_eq!(dyadic_of(&o["remainder_bound"]), d("1/8"));
    assert_eq!(
        dyadic_of(&r["results"]["hamming"]["lower"]),
        DyadicRational::ZERO
    );
    assert_eq!(dyadic_of(&r["results"]["hamming"]["upper"]), d("1/8"));
}

#[test]
fn overlap_window_check() {
    let a = "1,2,3,4,2,1,3,3,4,1,2,2,4,3,1,2,3,1,4,2,2,3";
    let b = "3,2,1,2,4,4,1,3,2,2,1,4,3,3,2,1,4,2,1,3,4,1";
    let r = json_of(&["overlap", "--a", a, "--b", b, "--window-check", "65536"]);
    let exact = dyadic_of(&r["results"]["overlap"]["value"]).to_f64();
    let q = r["results"]["window_check"]["q_window"]["decimal"]
        .as_f64()
        .unwrap();
    assert!((q - exact).abs() < 0.01, "{q} vs {exact}");

    let r = json_of(&[
        "overlap",
        "--a",
        a,
        "--b",
        b,
        "--shift",
        "-3",
        "--window-check",
        "65536",
    ]);
    assert!(
        r["results"]["window_check"]["residual"]["decimal"]
            .as_f64()
            .unwrap()
            < 0.01
    );
}

#[test]
fn malformed_choices_exit_2() {
    for args in [
        &["overlap", "--a", "1,5", "--b", "1"][..],
        &["overlap", "--a", "x", "--b", "1"],
        &["generate", "--family", "paperfold", "--length", "4"],
        &["generate", "--family", "nope", "--length", "4"],
        &["dist", "exact", "--depth", "99"],
        &["dist", "thue-morse", "--window", "1024", "--max-lag", "10"],
    ] {
        let out = foldlab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn dist_exact_depth_2() {
    let r = json_of(&["dist", "exact", "--depth", "2"]);
    let atoms: Vec<(DyadicRational, DyadicRational)> = r["results"]["atoms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| (dyadic_of(&a["value"]), dyadic_of(&a["probability"])))
        .collect();
    let expected = [
        ("-3/4", "1/32"),
        ("-1/2", "1/8"),
        ("-1/4", "1/32"),
        ("0", "1/2"),
        ("1/4", "1/32"),
        ("1/2", "1/8"),
        ("3/4", "1/32"),
    ]
    .map(|(v, p)| (d(v), d(p)));
    assert_eq!(atoms, expected);
    assert_eq!(dyadic_of(&r["results"]["unresolved_mass"]), d("1/8"));
    assert_eq!(dyadic_of(&r["results"]["total_mass"]), DyadicRational::ONE);
}

#[test]
fn dist_exact_csv_round_trip() {
    let json = json_of(&["dist", "exact", "--depth", "6"]);
    let (header, rows) = csv_rows(&["dist", "exact", "--depth", "6", "--out", "csv"]);
    assert_eq!(header, ["num", "log2den", "prob_num", "prob_log2den"]);
    let atoms = json["results"]["atoms"].as_array().unwrap();
    assert_eq!(rows.len(), atoms.len() + 1);
    for (row, atom) in rows.iter().zip(atoms) {
        let v = DyadicRational::new(row[0].parse().unwrap(), row[1].parse().unwrap());
        let p = DyadicRational::new(row[2].parse().unwrap(), row[3].parse().unwrap());
        assert_eq!(v, dyadic_of(&atom["value"]));
        assert_eq!(p, dyadic_of(&atom["probability"]));
    }
    let last = rows.last().unwrap();
    assert_eq!(last[0], "unresolved");
    let u = DyadicRational::new(last[2].parse().unwrap(), last[3].parse().unwrap());
    assert_eq!(u, dyadic_of(&json["results"]["unresolved_mass"]));
}

#[test]
fn dist_sample_csv_round_trip() {
    let args = [
        "dist", "sample", "--pairs", "20000", "--seed", "3", "--depth", "12",
    ];
    let json = json_of(&args);
    let (header, rows) = csv_rows(&[&args[..], &["--out", "csv"]].concat());
    assert_eq!(header, ["value", "count"]);
    let hist = json["results"]["histogram"].as_array().unwrap();
    assert_eq!(rows.len(), hist.len());
    let mut total = 0;
    for (row, h) in rows.iter().zip(hist) {
        if row[0] == "unresolved" {
            assert_eq!(h["value"], "unresolved");
        } else {
            assert_eq!(d(&row[0]), dyadic_of(&h["value"]));
        }
        let c: u64 = row[1].parse().unwrap();
        assert_eq!(json!(c), h["count"]);
        total += c;
    }
    assert_eq!(total, 20000);
}

#[test]
fn dist_alternating() {
    let r = json_of(&["dist", "alternating"]);
    let atoms = r["results"]["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 2);
    assert_eq!(dyadic_of(&atoms[0]["value"]), DyadicRational::MINUS_ONE);
    assert_eq!(dyadic_of(&atoms[0]["probability"]), DyadicRational::HALF);
    assert_eq!(dyadic_of(&atoms[1]["value"]), DyadicRational::ONE);
    assert_eq!(dyadic_of(&atoms[1]["probability"]), DyadicRational::HALF);

    let r = json_of(&[
        "dist",
        "alternating",
        "--pairs",
        "500",
        "--window",
        "101",
        "--seed",
        "2",
    ]);
    assert_eq!(r["results"]["sample"]["disagreements"], 0);
}

#[test]
fn assertions_drive_exit_codes() {
    let base = [
        "dist",
        "sample",
        "--pairs",
        "50000",
        "--seed",
        "7",
        "--depth",
        "20",
        "--compare-depth",
        "6",
    ];
    let out = foldlab(&[&base[..], &["--assert", "tv<=0.02"]].concat());
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["results"]["assertions"][0]["pass"], true);

    let out = foldlab(&[&base[..], &["--assert", "tv<=0.0000001"]].concat());
    assert_eq!(out.status.code(), Some(3));
    let out = foldlab(&[&base[..], &["--assert", "freq_0>=0.9"]].concat());
    assert_eq!(out.status.code(), Some(3));
    let out = foldlab(&[&base[..], &["--assert", "nonsense<=1"]].concat());
    assert_eq!(out.status.code(), Some(2));
    let out = foldlab(&[&base[..], &["--assert", "tv<1"]].concat());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn checks_pass_on_small_runs() {
    for args in [
        &[
            "check",
            "ultrametric",
            "--triples",
            "2000",
            "--depth",
            "20",
            "--seed",
            "1",
        ][..],
        &[
            "check", "flip", "--cases", "50", "--depth", "20", "--window", "1024",
        ],
        &[
            "check",
            "consistency",
            "--pairs",
            "5",
            "--window",
            "16384",
            "--tol",
            "0.02",
            "--depth",
            "30",
            "--resolve-by",
            "4",
        ],
    ] {
        let r = json_of(args);
        assert_eq!(r["results"]["violations"], 0, "{args:?}");
    }
}

#[test]
fn consistency_with_impossible_tolerance_exits_3() {
    // Some pair resolved at level <= 8 has a nonzero residual on a short window.
    let out = foldlab(&[
        "check",
        "consistency",
        "--pairs",
        "20",
        "--window",
        "64",
        "--tol",
        "0",
        "--depth",
        "30",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn hamming_triples_is_exploratory() {
    let r = json_of(&[
        "check",
        "hamming-triples",
        "--triples",
        "3000",
        "--depth",
        "12",
        "--seed",
        "5",
    ]);
    assert_eq!(r["results"]["exploratory"], true);
    let m = &r["results"]["metrics"];
    let total =
        m["evaluated"]["decimal"].as_f64().unwrap() + m["skipped"]["decimal"].as_f64().unwrap();
    assert_eq!(total, 3000.0);
}

#[test]
fn period_doubling_is_flagged_exploratory() {
    let r = json_of(&[
        "dist",
        "period-doubling",
        "--lags",
        "50",
        "--window",
        "512",
        "--max-lag",
        "100000",
    ]);
    assert_eq!(r["results"]["exploratory"], true);
    let r = json_of(&[
        "dist",
        "thue-morse",
        "--lags",
        "50",
        "--window",
        "512",
        "--max-lag",
        "100000",
    ]);
    assert_eq!(r["results"]["exploratory"], false);
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("elapsed_ms");
    v
}

#[test]
fn seeded_commands_are_reproducible() {
    let commands: [&[&str]; 5] = [
        &[
            "dist", "sample", "--pairs", "40000", "--seed", "11", "--depth", "16", "--mode",
            "relation",
        ],
        &[
            "dist", "sturmian", "--pairs", "3000", "--window", "2000", "--audit", "3", "--seed",
            "11",
        ],
        &[
            "dist",
            "thue-morse",
            "--lags",
            "40",
            "--window",
            "1024",
            "--max-lag",
            "1000000",
            "--seed",
            "11",
        ],
        &[
            "check",
            "consistency",
            "--pairs",
            "3",
            "--window",
            "4096",
            "--tol",
            "0.05",
            "--depth",
            "20",
            "--seed",
            "11",
        ],
        &[
            "generate",
            "--family",
            "paperfold",
            "--seed",
            "11",
            "--start",
            "-20",
            "--length",
            "40",
        ],
    ];
    for args in commands {
        let a = without_timing(json_of(args));
        let b = without_timing(json_of(args));
        assert_eq!(a, b, "{args:?}");
    }
    let a = json_of(&[
        "dist", "sample", "--pairs", "40000", "--seed", "11", "--depth", "16",
    ]);
    let b = json_of(&[
        "dist", "sample", "--pairs", "40000", "--seed", "12", "--depth", "16",
    ]);
    assert_ne!(a["results"]["histogram"], b["results"]["histogram"]);
}

#[test]
fn params_round_trip_into_the_same_report() {
    // The recorded params are enough to rerun the command.
    let r = json_of(&[
        "dist", "sturmian", "--pairs", "2000", "--window", "1000", "--audit", "2", "--seed", "4",
    ]);
    let p = &r["params"];
    let rerun = json_of(&[
        "dist",
        "sturmian",
        "--pairs",
        &p["pairs"].to_string(),
        "--window",
        &p["window"].to_string(),
        "--audit",
        &p["audit"].to_string(),
        "--seed",
        &p["seed"].to_string(),
        "--alpha",
        &p["alpha"].to_string(),
        "--c",
        &p["c"].to_string(),
        "--bins",
        &p["bins"].to_string(),
    ]);
    assert_eq!(without_timing(r), without_timing(rerun));
}

#[test]
fn reports_validate_against_schema() {
    let schema: Value =
        serde_json::from_str(&String::from_utf8(foldlab(&["schema"]).stdout).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let commands: [&[&str]; 14] = [
        &[
            "generate",
            "--family",
            "paperfold",
            "--choices",
            "1,2,1",
            "--start",
            "1",
            "--length",
            "7",
        ],
        &["generate", "--family", "sturmian", "--length", "30"],
        &[
            "generate",
            "--family",
            "period-doubling",
            "--offset",
            "5",
            "--length",
            "30",
        ],
        &["overlap", "--a", "1,3", "--b", "2,4"],
        &[
            "overlap",
            "--a",
            "1,1,1",
            "--b",
            "1,1,1",
            "--window-check",
            "64",
        ],
        &["dist", "exact", "--depth", "5"],
        &[
            "dist",
            "sample",
            "--pairs",
            "5000",
            "--depth",
            "10",
            "--compare-depth",
            "4",
            "--assert",
            "tv<=1",
        ],
        &["dist", "alternating", "--pairs", "10"],
        &[
            "dist", "sturmian", "--pairs", "1000", "--window", "500", "--audit", "2",
        ],
        &[
            "dist",
            "thue-morse",
            "--lags",
            "20",
            "--window",
            "256",
            "--max-lag",
            "10000",
        ],
        &[
            "dist",
            "period-doubling",
            "--lags",
            "20",
            "--window",
            "256",
            "--max-lag",
            "10000",
        ],
        &["check", "ultrametric", "--triples", "100"],
        &[
            "check",
            "consistency",
            "--pairs",
            "2",
            "--window",
            "4096",
            "--tol",
            "0.05",
            "--depth",
            "20",
        ],
        &["check", "hamming-triples", "--triples", "100"],
    ];
    for args in commands {
        let report = json_of(args);
        let errors: Vec<String> = validator
            .iter_errors(&report)
            .map(|e| e.to_string())
            .collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
    // A tampered report fails.
    let mut bad = json_of(&["dist", "exact", "--depth", "1"]);
    bad["results"]["atoms"][0]["value"]["log2_denominator"] = json!(-1);
    assert!(!validator.is_valid(&bad));
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("foldlab-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("exact.csv");
    let out = foldlab(&[
        "dist",
        "exact",
        "--depth",
        "1",
        "--out",
        "csv",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("num,log2den,prob_num,prob_log2den")
    );
    std::fs::remove_dir_all(dir).unwrap();
}

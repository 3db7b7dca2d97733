use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gauge-lab"))
}

fn corpus(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(file)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn gauge_of_a_unit_vector() {
    let out = run(&["gauge", "--space", "bpq:3,5", "--vec", "1,0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["gauge"], 1.0);
    let out = run(&["gauge", "--space", "lp:1:real", "--vec", "-0.5,0.25"]);
    assert_eq!(json(&out)["gauge"], 0.75);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(
        run(&["gauge", "--space", "bpq:0.5,2", "--vec", "1,0"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["gauge", "--space", "lp:2", "--vec", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["gamma", "--space", "lp:2", "--budget", "64"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let out = bin()
        .env("GAUGE_LAB_THREADS", "0")
        .args(["gauge", "--space", "lp:2", "--vec", "1,0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_pair_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"n": 2, "T": [[1,0],[0,0],[0,0],[1,0]], "space": {"kind": "lp", "p": 1.0}}"#,
    )
    .unwrap();
    let out = run(&["descent", "run", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`S`"));
    fs::write(
        &path,
        r#"{"n": 2, "T": [[1,0],[0,0],[0,0]], "S": [[1,0],[0,0],[0,0],[1,0]], "space": {"kind": "lp", "p": 1.0}}"#,
    )
    .unwrap();
    let out = run(&["bj", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("T"));
}

#[test]
fn gamma_certificate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for path in [&a, &b] {
        let out = run(&[
            "gamma",
            "--space",
            "bpq:1,2",
            "--budget",
            "64x500",
            "--expect",
            "fails",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let cert: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert!(cert["witness"]["value"].as_f64().unwrap() > 1.001);
    assert_eq!(cert["seed"], 0x5EED);
}

#[test]
fn gamma_expectation_mismatch_exits_with_one() {
    let out = run(&[
        "gamma",
        "--space",
        "linf:real",
        "--budget",
        "8x200",
        "--expect",
        "fails",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&[
        "gamma",
        "--space",
        "linf:real",
        "--budget",
        "8x200",
        "--expect",
        "not-refuted",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn gamma_grid_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let out = run(&[
        "gamma-grid",
        "--points",
        "1,1.5,2,3",
        "--budget",
        "16x300",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,q,value,normA,normB,starts,iters,wall_ms"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.windows(2).all(|w| (w[0][0], w[0][1]) < (w[1][0], w[1][1])));
    for r in &rows {
        if r[0] == 2.0 && r[1] == 2.0 {
            assert!((r[2] - 2.0).abs() <= 1e-3);
        }
        if r[0].max(r[1]) > 1.0 {
            assert!(r[2] > 1.001, "{r:?}");
        }
    }
}

#[test]
fn descent_on_corpus_pairs() {
    let b12 = corpus("b12_pair.json");
    let out = run(&[
        "descent",
        "run",
        "--input",
        b12.to_str().unwrap(),
        "--expect",
        "isometry_certified",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"]["verdict"], "isometry_certified");
    let out = run(&[
        "descent",
        "run",
        "--input",
        b12.to_str().unwrap(),
        "--expect",
        "refuted",
    ]);
    assert_eq!(out.status.code(), Some(1));

    let l1 = corpus("real_l1_pair.json");
    let out = run(&[
        "descent",
        "run",
        "--input",
        l1.to_str().unwrap(),
        "--max-steps",
        "32",
        "--tol",
        "1e-7",
    ]);
    assert_eq!(json(&out)["verdict"]["reason"], "density-step-inapplicable");
}

#[test]
fn candidate_trace_replays() {
    let dir = tempfile::tempdir().unwrap();
    let pair = dir.path().join("pair.json");
    let trace = dir.path().join("trace.json");
    let out = run(&[
        "descent",
        "candidate",
        "--n",
        "6",
        "--phases",
        "2",
        "--seed",
        "5",
        "--output",
        pair.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&[
        "descent",
        "run",
        "--input",
        pair.to_str().unwrap(),
        "--phases",
        "2",
        "--expect",
        "refuted",
        "--output",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["descent", "replay", "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["reproduced"], true);
}

#[test]
fn orthogonality_and_parallelism_commands() {
    let l1 = corpus("real_l1_pair.json");
    let out = run(&["parallel", "--input", l1.to_str().unwrap(), "--expect", "holds"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["agree"], true);
    let diag = corpus("l3_diagonal_pair.json");
    let out = run(&["bj", "--input", diag.to_str().unwrap(), "--expect", "holds"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["parallel", "--input", diag.to_str().unwrap(), "--expect", "holds"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn corpus_reproduces_recorded_verdicts() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let out = run(&["corpus", "--dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports = json(&out);
    assert!(reports.as_array().unwrap().iter().all(|r| r["pass"] == true));
}

use std::path::Path;
use std::process::{Command, Output};

use nalgebra::{DMatrix, DVector};
use qtsvm::data::{example_curve, Example};
use qtsvm::{Label, LiftingMode, NormalizationParams, QuadraticSurface, TrainedModel};

fn qtsvm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtsvm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = qtsvm(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

fn labels(dir: &Path, name: &str) -> Vec<String> {
    String::from_utf8(read(dir, name))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_string())
        .collect()
}

fn metric(stdout: &str, name: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{name} ")))
        .unwrap_or_else(|| panic!("no {name} in {stdout}"))
        .parse()
        .unwrap()
}

#[test]
fn generate_writes_header_and_rows_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "generate",
            "--example",
            "1",
            "--m",
            "200",
            "--out",
            "a.csv",
            "--seed",
            "5",
        ],
    );
    ok(
        d,
        &[
            "generate",
            "--example",
            "1",
            "--m",
            "200",
            "--out",
            "b.csv",
            "--seed",
            "5",
        ],
    );
    let text = String::from_utf8(read(d, "a.csv")).unwrap();
    assert_eq!(text.lines().count(), 401);
    assert_eq!(text.lines().next(), Some("x1,x2,label"));
    assert_eq!(read(d, "a.csv"), read(d, "b.csv"));
    assert!(d.join("a.csv.manifest.json").exists());
    ok(d, &["generate", "--example", "1", "--out", "c.csv", "--seed", "6"]);
    assert_ne!(read(d, "a.csv"), read(d, "c.csv"));
}

#[test]
fn label_noise_flips_the_floor_of_ratio_times_m() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--example", "2", "--out", "clean.csv", "--seed", "1"]);
    let out = ok(
        d,
        &[
            "generate",
            "--example",
            "2",
            "--noise-ratio",
            "0.05",
            "--out",
            "noisy.csv",
            "--seed",
            "1",
        ],
    );
    assert!(out.contains("20 labels flipped"), "{out}");
    let (a, b) = (labels(d, "clean.csv"), labels(d, "noisy.csv"));
    assert_eq!(a.len(), 400);
    assert_eq!(a.iter().zip(&b).filter(|(x, y)| x != y).count(), 20);
}

#[test]
fn train_and_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--example", "3", "--out", "ex3.csv", "--seed", "2"]);
    let train = ok(d, &["train", "--data", "ex3.csv", "--model-out", "m.json"]);
    assert!(train.contains("positive surface:"), "{train}");
    let report: serde_json::Value = serde_json::from_slice(&read(d, "m.json.report.json")).unwrap();
    assert_eq!(report["fit"]["positive"]["branch"], "direct");
    assert!(report["fit"]["negative"]["objective_trace"].as_array().unwrap().len() >= 2);

    let pred = ok(
        d,
        &["predict", "--model", "m.json", "--data", "ex3.csv", "--out", "p.csv"],
    );
    assert!(metric(&pred, "accuracy") >= 0.97, "{pred}");
    let text = String::from_utf8(read(d, "p.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("prediction"));
    assert_eq!(text.lines().count(), 401);

    let model = TrainedModel::load(d.join("m.json")).unwrap();
    assert_eq!(model.dim(), 2);

    ok(
        d,
        &[
            "train",
            "--data",
            "ex3.csv",
            "--method",
            "lsqtsvm",
            "--c1",
            "1e-3",
            "--model-out",
            "l.json",
        ],
    );
    let pred = ok(
        d,
        &["predict", "--model", "l.json", "--data", "ex3.csv", "--out", "q.csv"],
    );
    assert!(metric(&pred, "accuracy") >= 0.97, "{pred}");
}

#[test]
fn reduced_mode_trains() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--example", "1", "--out", "ex1.csv"]);
    ok(
        d,
        &[
            "train",
            "--data",
            "ex1.csv",
            "--mode",
            "reduced",
            "--model-out",
            "m.json",
        ],
    );
    let text = String::from_utf8(read(d, "m.json")).unwrap();
    assert!(text.contains("\"mode\": \"reduced\""));
}

#[test]
fn unlabeled_input_gives_predictions_only() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--example", "3", "--out", "ex3.csv"]);
    ok(d, &["train", "--data", "ex3.csv", "--model-out", "m.json"]);
    let features: String = String::from_utf8(read(d, "ex3.csv"))
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string() + "\n")
        .collect();
    std::fs::write(d.join("x.csv"), features).unwrap();
    let out = ok(
        d,
        &["predict", "--model", "m.json", "--data", "x.csv", "--out", "p.csv"],
    );
    assert!(!out.contains("accuracy"), "{out}");
    assert_eq!(String::from_utf8(read(d, "p.csv")).unwrap().lines().count(), 401);
}

#[test]
fn dimension_mismatch_names_expected_n() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--example", "3", "--out", "ex3.csv"]);
    ok(d, &["train", "--data", "ex3.csv", "--model-out", "m.json"]);
    std::fs::write(d.join("wide.csv"), "1,2,3,4,1\n0,1,2,3,-1\n").unwrap();
    let out = qtsvm(
        d,
        &["predict", "--model", "m.json", "--data", "wide.csv", "--out", "p.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("n = 2"), "{err}");
}

#[test]
fn perfect_model_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // surfaces exactly on the noiseless example 1 curves, identity scaling
    let pos = QuadraticSurface::new(
        DMatrix::from_diagonal(&DVector::from_vec(vec![-0.4444, 0.0])),
        DVector::from_vec(vec![0.0, 1.0]),
        -0.5,
    )
    .unwrap();
    let neg = QuadraticSurface::new(
        DMatrix::from_diagonal(&DVector::from_vec(vec![0.4444, 0.0])),
        DVector::from_vec(vec![0.0, 1.0]),
        -1.5,
    )
    .unwrap();
    let scaler = NormalizationParams::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    TrainedModel::new(pos, neg, LiftingMode::Full, scaler)
        .unwrap()
        .save(d.join("m.json"))
        .unwrap();
    let mut csv = String::from("x1,x2,label\n");
    for k in 0..21 {
        let t = -1.0 + 0.1 * k as f64;
        for (label, tag) in [(Label::Positive, 1), (Label::Negative, -1)] {
            let [a, b] = example_curve(Example::One, label, t);
            csv.push_str(&format!("{a},{b},{tag}\n"));
        }
    }
    std::fs::write(d.join("curve.csv"), csv).unwrap();
    let out = ok(
        d,
        &["predict", "--model", "m.json", "--data", "curve.csv", "--out", "p.csv"],
    );
    assert_eq!(metric(&out, "accuracy"), 1.0);
    assert_eq!(metric(&out, "f1"), 1.0);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--example", "3", "--out", "ex3.csv"]);
    for args in [
        vec!["train", "--data", "ex3.csv", "--method", "svm", "--model-out", "m.json"],
        vec!["generate", "--example", "4", "--out", "x.csv"],
        vec!["generate", "--example", "1", "--noise-ratio", "1.5", "--out", "x.csv"],
        vec![
            "train",
            "--data",
            "ex3.csv",
            "--method",
            "lsqtsvm",
            "--c2",
            "1",
            "--model-out",
            "m.json",
        ],
        vec!["train", "--data", "ex3.csv", "--c1", "-1", "--model-out", "m.json"],
        vec!["--jobs", "0", "generate", "--example", "1", "--out", "x.csv"],
        vec!["frobnicate"],
    ] {
        assert_eq!(qtsvm(d, &args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(qtsvm(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = qtsvm(d, &["train", "--data", "missing.csv", "--model-out", "m.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
    let out = qtsvm(d, &["generate", "--example", "1", "--out", "no/such/dir/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

const BENCH: &str = r#"
seed = 3
folds = 2
repeats = 1
methods = ["cl1qtsvm", "lsqtsvm"]
noise_ratios = [0.0, 0.1]
grid = [0.01, 1.0, 100.0]
inner_folds = 2

[[datasets]]
name = "ex1"
example = 1
m = 20

[[datasets]]
name = "ex3"
example = 3
m = 20
"#;

#[test]
fn benchmark_tables_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bench.toml"), BENCH).unwrap();
    let out = ok(d, &["benchmark", "--config", "bench.toml", "--out-dir", "r1"]);
    assert!(out.contains("cl1qtsvm"), "{out}");
    ok(
        d,
        &["--jobs", "1", "benchmark", "--config", "bench.toml", "--out-dir", "r2"],
    );
    let table = String::from_utf8(read(d, "r1/results.csv")).unwrap();
    assert_eq!(
        table.lines().next(),
        Some("dataset,method,noise_ratio,fold,repeat,c1,c2,acc,f1,seconds")
    );
    // 2 datasets x 2 ratios x 2 methods x 2 folds
    assert_eq!(table.lines().count(), 17);
    assert_eq!(read(d, "r1/results.csv"), read(d, "r2/results.csv"));
    assert_eq!(read(d, "r1/summary.csv"), read(d, "r2/summary.csv"));

    let manifest: serde_json::Value = serde_json::from_slice(&read(d, "r1/manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 3);
    std::fs::remove_dir_all(d.join("r1")).unwrap();
    std::fs::create_dir(d.join("saved")).unwrap();
    std::fs::rename(d.join("r2/manifest.json"), d.join("saved/manifest.json")).unwrap();
    let reference = read(d, "r2/results.csv");
    std::fs::remove_dir_all(d.join("r2")).unwrap();
    ok(d, &["replay", "--manifest", "saved/manifest.json"]);
    assert_eq!(read(d, "r2/results.csv"), reference);

    let seeded = ok(
        d,
        &["--seed", "4", "benchmark", "--config", "bench.toml", "--out-dir", "r3"],
    );
    assert!(!seeded.is_empty());
    assert_ne!(read(d, "r3/results.csv"), reference);
}

#[test]
fn benchmark_config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("empty.toml"), BENCH.replace(r#"["cl1qtsvm", "lsqtsvm"]"#, "[]")).unwrap();
    assert_eq!(
        qtsvm(d, &["benchmark", "--config", "empty.toml"]).status.code(),
        Some(2)
    );
    std::fs::write(d.join("broken.toml"), "methods = [").unwrap();
    assert_eq!(
        qtsvm(d, &["benchmark", "--config", "broken.toml"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qtsvm(d, &["benchmark", "--config", "absent.toml"]).status.code(),
        Some(2)
    );
}

#[test]
fn benchmark_reads_csv_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--example", "3", "--m", "20", "--out", "ex3.csv"]);
    std::fs::write(
        d.join("csv.toml"),
        "folds = 2\nrepeats = 1\nselection = \"flat\"\ngrid = [1.0]\nmethods = [\"lsqtsvm\"]\n[[datasets]]\nname = \"file\"\npath = \"ex3.csv\"\nlabel_column = \"label\"\n",
    )
    .unwrap();
    ok(d, &["benchmark", "--config", "csv.toml", "--out-dir", "out"]);
    let summary = String::from_utf8(read(d, "out/summary.csv")).unwrap();
    assert!(
        summary.lines().nth(1).unwrap().starts_with("file,lsqtsvm,0,"),
        "{summary}"
    );
}

fn wide_matrix(k: usize, n: usize, f: impl Fn(usize, usize) -> f64) -> String {
    let mut s = String::from("dataset");
    for j in 0..k {
        s.push_str(&format!(",m{j}"));
    }
    s.push('\n');
    for i in 0..n {
        s.push_str(&format!("d{i}"));
        for j in 0..k {
            s.push_str(&format!(",{}", f(i, j)));
        }
        s.push('\n');
    }
    s
}

#[test]
fn nemenyi_on_eight_methods_and_sixteen_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("acc.csv"),
        wide_matrix(8, 16, |i, j| 60.0 + j as f64 * 3.0 + (i % 3) as f64),
    )
    .unwrap();
    let out = ok(d, &["nemenyi", "--results", "acc.csv", "--out", "ranks.json"]);
    assert!(out.contains("CD = 2.6249"), "{out}");
    assert!(out.contains("significant: m0 vs m7"), "{out}");
    let ranks: serde_json::Value = serde_json::from_slice(&read(d, "ranks.json")).unwrap();
    assert_eq!(ranks["mean_ranks"][7], 1.0);

    std::fs::write(d.join("flat.csv"), wide_matrix(4, 5, |_, _| 0.8)).unwrap();
    let out = ok(d, &["nemenyi", "--results", "flat.csv"]);
    assert!(out.contains("no pair differs"), "{out}");

    std::fs::write(d.join("one.csv"), wide_matrix(1, 5, |_, _| 0.8)).unwrap();
    assert_ne!(qtsvm(d, &["nemenyi", "--results", "one.csv"]).status.code(), Some(0));
}

#[test]
fn nemenyi_reads_benchmark_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bench.toml"), BENCH).unwrap();
    ok(d, &["benchmark", "--config", "bench.toml", "--out-dir", "r"]);
    let out = ok(d, &["nemenyi", "--results", "r/results.csv"]);
    assert!(out.contains("k = 2, N = 4"), "{out}");
}

#[test]
fn every_command_reruns_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bench.toml"), BENCH).unwrap();
    for run in ["a", "b"] {
        std::fs::create_dir(d.join(run)).unwrap();
        let p = |f: &str| format!("{run}/{f}");
        ok(
            d,
            &[
                "generate",
                "--example",
                "1",
                "--noise-ratio",
                "0.1",
                "--seed",
                "9",
                "--out",
                &p("g.csv"),
            ],
        );
        ok(d, &["train", "--data", &p("g.csv"), "--model-out", &p("m.json")]);
        ok(
            d,
            &[
                "predict",
                "--model",
                &p("m.json"),
                "--data",
                &p("g.csv"),
                "--out",
                &p("p.csv"),
            ],
        );
        ok(d, &["benchmark", "--config", "bench.toml", "--out-dir", &p("bench")]);
        ok(
            d,
            &["nemenyi", "--results", &p("bench/results.csv"), "--out", &p("n.json")],
        );
    }
    for f in [
        "g.csv",
        "m.json",
        "m.json.report.json",
        "p.csv",
        "bench/results.csv",
        "bench/summary.csv",
        "n.json",
    ] {
        assert_eq!(read(d, &format!("a/{f}")), read(d, &format!("b/{f}")), "{f} differs");
    }
}

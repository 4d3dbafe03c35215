use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use artiforest::compact::read_ctf;
use artiforest::dataset::FeatureTable;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_artiforest"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Small corpus, feature table and 8-tree model in a fresh directory.
fn pipeline() -> (tempfile::TempDir, PathBuf) {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().to_path_buf();
    ok(&d, &["synth", "--out", "corpus", "--n-patients", "4", "--duration-s", "40", "--seed", "2"]);
    ok(&d, &["features", "--corpus", "corpus", "--out", "f.csv", "--seed", "2"]);
    ok(&d, &["train", "--features", "f.csv", "--out", "m.ctf", "--n-trees", "8", "--seed", "2"]);
    (tmp, d)
}

fn tree_listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn synth_is_reproducible_and_paired() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for out in ["a", "b"] {
        ok(d, &["synth", "--out", out, "--n-patients", "2", "--duration-s", "5", "--seed", "11"]);
    }
    let a = tree_listing(&d.join("a"));
    assert_eq!(a, tree_listing(&d.join("b")));
    let names: Vec<_> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["p000_s00.ann.csv", "p000_s00.csv", "p001_s00.ann.csv", "p001_s00.csv"]);
}

#[test]
fn zero_artifact_rate_writes_empty_annotations() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["synth", "--out", "c", "--n-patients", "2", "--duration-s", "5", "--artifact-rate", "0"]);
    for (name, body) in tree_listing(&tmp.path().join("c")) {
        if name.ends_with(".ann.csv") {
            assert_eq!(body, b"channel,start_s,stop_s,label\n");
        }
    }
}

#[test]
fn features_shape_and_rerun() {
    let (_tmp, d) = pipeline();
    let first = fs::read(d.join("f.csv")).unwrap();
    ok(&d, &["features", "--corpus", "corpus", "--out", "g.csv", "--seed", "2"]);
    assert_eq!(first, fs::read(d.join("g.csv")).unwrap());
    let table = FeatureTable::read(d.join("f.csv")).unwrap();
    assert_eq!(table.n_channels, 4);
    assert_eq!(table.rows.len(), 4 * 40);
    assert!(table.rows.iter().all(|r| r.features.len() == 20));
}

#[test]
fn empty_corpus_gives_header_only_table() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir(tmp.path().join("empty")).unwrap();
    ok(tmp.path(), &["features", "--corpus", "empty", "--out", "f.csv"]);
    assert_eq!(
        fs::read_to_string(tmp.path().join("f.csv")).unwrap(),
        "patient,recording,start_s,split\n"
    );
}

#[test]
fn train_rejects_tree_count_off_the_lane_width() {
    let (_tmp, d) = pipeline();
    let out = run(&d, &["train", "--features", "f.csv", "--out", "x.ctf", "--n-trees", "7"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("multiple of 8"));
    assert!(!d.join("x.ctf").exists());
}

#[test]
fn train_is_reproducible_and_loads_back() {
    let (_tmp, d) = pipeline();
    ok(&d, &["train", "--features", "f.csv", "--out", "m2.ctf", "--n-trees", "8", "--seed", "2"]);
    assert_eq!(fs::read(d.join("m.ctf")).unwrap(), fs::read(d.join("m2.ctf")).unwrap());
    let model = read_ctf(d.join("m.ctf")).unwrap();
    assert_eq!(model.tree_count(), 8);
    assert_eq!(model.n_features, 20);
}

#[test]
fn memorized_training_set_scores_perfectly() {
    let (_tmp, d) = pipeline();
    let out = ok(&d, &["eval", "--model", "m.ctf", "--features", "f.csv", "--split", "train"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("metric,class,value\naccuracy,,1\n"), "{text}");
    let again = ok(&d, &["eval", "--model", "m.ctf", "--features", "f.csv", "--split", "train"]);
    assert_eq!(text.as_bytes(), again.stdout.as_slice());
}

#[test]
fn eval_rejects_feature_arity_mismatch() {
    let (_tmp, d) = pipeline();
    ok(&d, &["synth", "--out", "narrow", "--n-patients", "2", "--n-channels", "2", "--duration-s", "5"]);
    ok(&d, &["features", "--corpus", "narrow", "--out", "n.csv", "--no-split"]);
    let out = run(&d, &["eval", "--model", "m.ctf", "--features", "n.csv", "--split", "all"]);
    assert_ne!(code(&out), 0);
}

#[test]
fn prune_by_budget_and_alpha() {
    let (_tmp, d) = pipeline();
    let full = fs::metadata(d.join("m.ctf")).unwrap().len();
    ok(&d, &["prune", "--model", "m.ctf", "--features", "f.csv", "--out", "z.ctf", "--alpha", "0"]);
    assert!(fs::metadata(d.join("z.ctf")).unwrap().len() <= full);

    ok(&d, &["prune", "--model", "m.ctf", "--features", "f.csv", "--out", "b.ctf", "--budget", "900"]);
    let pruned = read_ctf(d.join("b.ctf")).unwrap();
    assert!(pruned.node_count() * 9 <= 900);
    assert_eq!(pruned.tree_count(), 8);

    let out = run(&d, &["prune", "--model", "m.ctf", "--features", "f.csv", "--out", "t.ctf", "--budget", "71"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("72 bytes"));

    let out = run(&d, &["prune", "--model", "m.ctf", "--features", "f.csv", "--out", "t.ctf"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn sweep_writes_a_monotone_curve() {
    let (_tmp, d) = pipeline();
    ok(&d, &["sweep", "--model", "m.ctf", "--features", "f.csv", "--out", "curve.csv"]);
    let text = fs::read_to_string(d.join("curve.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,nodes,bytes,accuracy,f1"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() >= 2);
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0] && w[0][1] >= w[1][1]));
    assert_eq!(rows.last().unwrap()[1], 8.0);
}

#[test]
fn bench_reports_visits() {
    let (_tmp, d) = pipeline();
    let out = ok(&d, &["bench", "--model", "m.ctf", "--features", "f.csv", "--split", "all", "--repetitions", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("inferences,320\n"), "{text}");
}

#[test]
fn corrupt_model_is_a_data_error() {
    let (_tmp, d) = pipeline();
    let mut bytes = fs::read(d.join("m.ctf")).unwrap();
    bytes.truncate(bytes.len() - 1);
    fs::write(d.join("cut.ctf"), bytes).unwrap();
    let out = run(&d, &["eval", "--model", "cut.ctf", "--features", "f.csv"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_and_help() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(tmp.path(), &["--help"])), 0);
    assert_eq!(code(&run(tmp.path(), &["frobnicate"])), 1);
    assert_eq!(code(&run(tmp.path(), &["train", "--scheme", "xyz"])), 1);
    assert_eq!(code(&run(tmp.path(), &["synth"])), 1);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let (_tmp, d) = pipeline();
    fs::write(
        d.join("run.toml"),
        "seed = 2\n[train]\nfeatures = \"f.csv\"\nout = \"cfg.ctf\"\nn_trees = 16\n",
    )
    .unwrap();
    let out = ok(&d, &["train", "--config", "run.toml", "--n-trees", "8"]);
    assert_eq!(fs::read(d.join("cfg.ctf")).unwrap(), fs::read(d.join("m.ctf")).unwrap());
    let log = String::from_utf8(out.stderr).unwrap();
    assert!(log.contains("n_trees = 8"));

    // the logged config replays the run
    let logged: String = log
        .lines()
        .skip(1)
        .take_while(|l| !l.starts_with(|c: char| c.is_ascii_digit()))
        .map(|l| format!("{l}\n"))
        .collect::<String>()
        .replace("cfg.ctf", "replay.ctf");
    fs::write(d.join("logged.toml"), logged).unwrap();
    ok(&d, &["train", "--config", "logged.toml"]);
    assert_eq!(fs::read(d.join("replay.ctf")).unwrap(), fs::read(d.join("m.ctf")).unwrap());

    fs::write(d.join("bad.toml"), "[train]\nn_tress = 8\n").unwrap();
    assert_eq!(code(&run(&d, &["train", "--config", "bad.toml"])), 1);
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use sshmc::bundle::{RunManifest, TrainedModel};
use sshmc::dataset::{generate_artificial, load_part};
use sshmc::evaluation::EvalSummary;
use sshmc::Hierarchy;

fn sshmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sshmc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = sshmc(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, seed: u64) {
    ok(&["synth", "--seed", &seed.to_string(), "--out", s(dir)]);
}

fn manifest(bundle: &Path) -> RunManifest {
    RunManifest::load(&bundle.join("manifest.txt")).unwrap()
}

#[test]
fn train_lcn_records_balanced_bottom_up() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("art");
    let bundle = tmp.path().join("lcn");
    synth(&data, 1);
    ok(&["train", "--data", s(&data), "--method", "lcn", "--n-trees", "10", "--out", s(&bundle)]);
    assert!(bundle.join("hierarchy.txt").exists());
    assert!(bundle.join("nodes").is_dir());
    let m = manifest(&bundle);
    assert_eq!(m.get("policy"), Some("balanced_bottom_up"));
    assert_eq!(m.get("method"), Some("lcn"));
    assert_eq!(m.get("n_labeled"), Some("12"));
}

#[test]
fn sshmc_v3_echoes_k_step_iters() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("art");
    synth(&data, 2);
    for step in ["10", "4"] {
        let bundle = tmp.path().join(format!("v3-{step}"));
        ok(&[
            "train", "--data", s(&data), "--method", "sshmc-v3", "--k-step-iters", step, "--n-trees", "10",
            "--out", s(&bundle),
        ]);
        let m = manifest(&bundle);
        assert_eq!(m.get("sshmc.k_step_iters"), Some(step));
        assert_eq!(m.get("sshmc.variant"), Some("v3"));
        let log = fs::read_to_string(bundle.join("iterations.csv")).unwrap();
        assert!(log.starts_with("iteration,pool_size,n_valid,n_changed,current_k\n"));
    }
}

#[test]
fn missing_hierarchy_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sshmc(&["train", "--data", s(tmp.path()), "--method", "lcn", "--out", s(&tmp.path().join("m"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("error kind=io code=2"), "{err}");
    assert!(err.contains("hierarchy.txt"), "{err}");
}

#[test]
fn malformed_hierarchy_surfaces_parse_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("hierarchy.txt"), "root\tA\nA B C\n").unwrap();
    let out = sshmc(&["train", "--data", s(tmp.path()), "--method", "lcn", "--out", s(&tmp.path().join("m"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("error kind=parse"), "{err}");
    assert!(err.contains("hierarchy.txt:2"), "{err}");
}

#[test]
fn usage_errors_exit_with_one() {
    let out = sshmc(&["train", "--method", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error kind=usage code=1"));
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("art");
    synth(&data, 3);
    let out = sshmc(&["train", "--data", s(&data), "--method", "lcn", "--thr", "2", "--out", s(&tmp.path().join("m"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error kind=config code=1"));
    assert!(sshmc(&["--help"]).status.success());
}

#[test]
fn synth_round_trips_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    synth(&a, 7);
    synth(&b, 7);
    for f in ["hierarchy.txt", "labeled.features.csv", "unlabeled.labels.txt", "test.features.csv", "valid.labels.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let expected = generate_artificial(7);
    let h = Arc::new(Hierarchy::load(&a.join("hierarchy.txt")).unwrap());
    assert_eq!(*h, *expected.labeled.hierarchy);
    for (part, ds) in [
        ("labeled", &expected.labeled),
        ("unlabeled", &expected.unlabeled),
        ("test", &expected.test),
        ("valid", &expected.validation),
    ] {
        let (got, _) = load_part(&a, part, &h).unwrap();
        assert_eq!(got.labels, ds.labels, "{part}");
        assert_eq!(got.features, ds.features, "{part}");
    }
    assert_eq!((expected.labeled.len(), expected.unlabeled.len(), expected.test.len()), (12, 330, 300));
}

#[test]
fn evaluate_matches_library_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("art");
    let bundle = tmp.path().join("m");
    synth(&data, 4);
    ok(&["train", "--data", s(&data), "--method", "sshmc-v1", "--n-trees", "10", "--out", s(&bundle)]);
    let csv = tmp.path().join("metrics.csv");
    let stdout = ok(&["evaluate", "--model", s(&bundle), "--data", s(&data), "--out", s(&csv)]);
    assert_eq!(fs::read_to_string(&csv).unwrap(), stdout);

    let (model, _) = TrainedModel::load(&bundle).unwrap();
    let (test, _) = load_part(&data, "test", &model.hierarchy).unwrap();
    let pred = model.predict(&test.features).unwrap();
    let e = EvalSummary::compute(&model.hierarchy, &pred, &test.labels).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), format!("method,dataset,part,{}", EvalSummary::CSV_HEADER));
    assert_eq!(lines.next().unwrap(), format!("sshmc-v1,art,test,{}", e.csv_row()));
}

fn write_separable(dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join("hierarchy.txt"), "root\tA\nA\tB\nA\tC\n").unwrap();
    let mut x = String::from("x\n");
    let mut y = String::new();
    for i in 0..20 {
        let (v, label) = if i % 2 == 0 { (0.0, "B") } else { (10.0, "C") };
        x.push_str(&format!("{}\n", v + (i / 2) as f64 * 0.01));
        y.push_str(label);
        y.push('\n');
    }
    for part in ["labeled", "test"] {
        fs::write(dir.join(format!("{part}.features.csv")), &x).unwrap();
        fs::write(dir.join(format!("{part}.labels.txt")), &y).unwrap();
    }
    fs::write(dir.join("empty.features.csv"), "x\n").unwrap();
    fs::write(dir.join("empty.labels.txt"), "").unwrap();
}

#[test]
fn perfect_model_scores_one_and_empty_test_set_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("sep");
    let bundle = tmp.path().join("m");
    write_separable(&data);
    ok(&["train", "--data", s(&data), "--method", "lcn", "--n-trees", "15", "--out", s(&bundle)]);
    let stdout = ok(&["evaluate", "--model", s(&bundle), "--data", s(&data)]);
    let row: Vec<&str> = stdout.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3].parse::<f64>().unwrap(), 1.0);

    let out = sshmc(&["evaluate", "--model", s(&bundle), "--data", s(&data), "--part", "empty"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("empty test set"), "{}", stderr(&out));
}

#[test]
fn predict_imputes_with_training_means() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("sep");
    write_separable(&data);
    // One missing training cell switches imputation on.
    let feats = data.join("labeled.features.csv");
    let text = fs::read_to_string(&feats).unwrap().replacen("\n0\n", "\n?\n", 1);
    fs::write(&feats, text).unwrap();
    let bundle = tmp.path().join("m");
    ok(&["train", "--data", s(&data), "--method", "stml", "--n-trees", "5", "--out", s(&bundle)]);
    assert_ne!(manifest(&bundle).get("preprocess.impute_means"), Some("none"));

    let input = tmp.path().join("new.csv");
    fs::write(&input, "id,x\nr1,?\nr2,10\n").unwrap();
    let out = ok(&["predict", "--model", s(&bundle), "--features", s(&input)]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "row,A,B,C");
    assert!(lines[1].starts_with("r1,"));
    assert!(lines[2].starts_with("r2,"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("art");
    synth(&data, 5);
    let conf = tmp.path().join("run.conf");
    fs::write(&conf, "method = sshmc-v2\nk = 4\nn_trees = 6\nseed = 3\n").unwrap();
    let bundle = tmp.path().join("m");
    ok(&["train", "--data", s(&data), "--config", s(&conf), "--k", "5", "--out", s(&bundle)]);
    let m = manifest(&bundle);
    assert_eq!(m.get("method"), Some("sshmc-v2"));
    assert_eq!(m.get("sshmc.k"), Some("5"));
    assert_eq!(m.get("forest.n_trees"), Some("6"));
    assert_eq!(m.get("seed"), Some("3"));

    // A bundle manifest works as a config file and reproduces the model.
    let again = tmp.path().join("again");
    ok(&["train", "--data", s(&data), "--config", s(&bundle.join("manifest.txt")), "--out", s(&again)]);
    let node = "nodes/node_0003.json";
    assert_eq!(fs::read(bundle.join(node)).unwrap(), fs::read(again.join(node)).unwrap());
}

#[test]
fn benchmark_reports_six_methods() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("art");
    let out = tmp.path().join("bench");
    synth(&data, 6);
    ok(&[
        "benchmark", "--data", s(&data), "--out", s(&out), "--repetitions", "1", "--n-trees", "10", "--k-grid", "3,4",
        "--thr-grid", "0.5",
    ]);
    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    let rows: Vec<&str> = results.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.split(',').nth(5) == Some("ok")));
    for r in &rows {
        let id = r.split(',').next().unwrap();
        assert!(out.join("manifests").join(format!("{id}.txt")).exists(), "{id}");
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let rank_sum: f64 = summary
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert_eq!(rank_sum, 21.0);
    assert!(out.join("report.txt").exists());
}

#[test]
fn stats_writes_rank_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("t.csv");
    fs::write(&input, "block,a,b,c\nx,1,2,3\ny,1,3,2\nz,0.5,0.9,0.8\n").unwrap();
    let out = tmp.path().join("s");
    let text = ok(&["stats", "--input", s(&input), "--out", s(&out)]);
    assert!(text.contains("3 algorithms over 3 blocks"));
    let ranks = fs::read_to_string(out.join("ranks.csv")).unwrap();
    assert_eq!(ranks.lines().next(), Some("block,a,b,c"));
    assert_eq!(ranks.lines().nth(1), Some("x,3.0,2.0,1.0"));
    assert!(fs::read_to_string(out.join("nemenyi.csv")).unwrap().starts_with("algorithm,average_rank,cd\n"));
}

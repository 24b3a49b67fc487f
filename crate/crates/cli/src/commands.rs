use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use sshmc::bundle::{Method, RunManifest, TrainedModel};
use sshmc::dataset::{generate_artificial, parse_features, prune_rare_nodes, write_part, Dataset, ARTIFICIAL_SIZES};
use sshmc::evaluation::{ComparisonReport, EvalSummary};
use sshmc::protocol::{run_benchmark, train_method, BenchmarkConfig, BenchmarkData, TrainPart};
use sshmc::{Error, Matrix};

use crate::data::{DataDir, Preprocess};
use crate::{BenchmarkArgs, EvaluateArgs, PredictArgs, StatsArgs, SynthArgs, TrainArgs};

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let (spec, file) = a.model.resolve(0)?;
    let method = a.model.method(a.method, &file)?;
    let mut dir = DataDir::open(&a.data)?;
    let (labeled, labeled_part) = match &a.labeled {
        Some(p) => (dir.load(p)?.0, p.clone()),
        None => {
            let (d, _, p) = dir.load_any(&["labeled", "train"])?;
            (d, p)
        }
    };
    let unlabeled_part = match &a.unlabeled {
        Some(p) => Some(p.clone()),
        None => dir.has_part_features("unlabeled").then(|| "unlabeled".to_string()),
    };
    let unlabeled = match &unlabeled_part {
        Some(p) => dir.load_features(p)?,
        None => Matrix::zeros(0, labeled.n_features()),
    };
    if unlabeled.rows() > 0 && unlabeled.cols() != labeled.n_features() {
        return Err(Error::WidthMismatch {
            expected: labeled.n_features(),
            actual: unlabeled.cols(),
        }
        .into());
    }
    let prep = Preprocess::fit(&[&labeled.features, &unlabeled], a.standardize)?;
    let labeled = labeled.with_features(prep.apply(&labeled.features)?)?;
    let unlabeled = prep.apply(&unlabeled)?;

    let start = Instant::now();
    let out = train_method(method, &spec, &labeled, &unlabeled)?;
    let wall = start.elapsed().as_secs_f64();

    let mut manifest = RunManifest::new();
    manifest.extend(spec.describe(method));
    manifest
        .set("dataset", dir.name())
        .set("labeled_part", &labeled_part)
        .set("unlabeled_part", unlabeled_part.as_deref().unwrap_or("none"))
        .set("n_labeled", labeled.len())
        .set("n_unlabeled", unlabeled.rows())
        .set("n_pseudo_labeled", out.pseudo_labeled.len());
    if let Some(log) = &out.log {
        manifest
            .set("sshmc.iterations", log.records.len())
            .set("sshmc.converged", log.converged);
    }
    manifest.set("wall_time_s", format!("{wall:.3}"));
    prep.record(&mut manifest);
    out.model.save(&a.out, &manifest)?;
    if let Some(log) = &out.log {
        log.write_csv(&a.out.join("iterations.csv"))?;
    }
    println!(
        "trained {method} on {} labeled + {} unlabeled rows ({} pseudo-labeled) in {wall:.2}s -> {}",
        labeled.len(),
        unlabeled.rows(),
        out.pseudo_labeled.len(),
        a.out.display()
    );
    Ok(())
}

fn load_model(dir: &Path) -> Result<(TrainedModel, RunManifest, Preprocess)> {
    let (model, manifest) = TrainedModel::load(dir)?;
    let prep = Preprocess::from_manifest(&manifest)?;
    Ok((model, manifest, prep))
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    let (model, _, prep) = load_model(&a.model)?;
    let text = fs::read_to_string(&a.features)
        .map_err(|e| Error::Io { path: a.features.clone(), source: e })?;
    let (x, names) = parse_features(&text, &a.features)?;
    let x = prep.apply(&x)?;
    let p = if a.raw { model.predict_raw(&x)? } else { model.predict(&x)? };
    let mut out = String::from("row");
    for n in model.hierarchy.names() {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for i in 0..p.rows() {
        match &names {
            Some(n) => out.push_str(&n[i]),
            None => out.push_str(&i.to_string()),
        }
        for v in p.row(i) {
            let _ = write!(out, ",{v:?}");
        }
        out.push('\n');
    }
    match &a.out {
        Some(path) => write_file(path, &out),
        None => {
            std::io::stdout().write_all(out.as_bytes())?;
            Ok(())
        }
    }
}

pub const EVALUATE_HEADER: &str = "method,dataset,part";

pub fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let (model, manifest, prep) = load_model(&a.model)?;
    let mut dir = DataDir::with_hierarchy(&a.data, model.hierarchy.clone());
    let (test, _) = dir.load(&a.part)?;
    let x = prep.apply(&test.features)?;
    let pred = model.predict(&x)?;
    let summary = EvalSummary::compute(&model.hierarchy, &pred, &test.labels)?;
    let dataset = manifest.get("dataset").unwrap_or("unknown");
    let out = format!(
        "{EVALUATE_HEADER},{}\n{},{dataset},{},{}\n",
        EvalSummary::CSV_HEADER,
        model.method,
        a.part,
        summary.csv_row()
    );
    print!("{out}");
    if let Some(path) = &a.out {
        write_file(path, &out)?;
    }
    Ok(())
}

fn with_features(ds: &Dataset, prep: &Preprocess) -> sshmc::Result<Dataset> {
    ds.with_features(prep.apply(&ds.features)?)
}

/// Loads one benchmark dataset: fixed `labeled` + `unlabeled` parts when both
/// exist, a `train` part to split otherwise, plus `valid` and `test`.
fn load_benchmark_data(path: &Path, min_node_count: Option<usize>, standardize: bool) -> Result<BenchmarkData> {
    let mut dir = DataDir::open(path)?;
    let given = dir.has_part("labeled") && dir.has_part("unlabeled");
    let mut train = Vec::new();
    if given {
        train.push(dir.load("labeled")?.0);
        train.push(dir.load("unlabeled")?.0);
    } else {
        train.push(dir.load("train")?.0);
    }
    let mut validation = dir.load_any(&["valid", "validation"])?.0;
    let mut test = dir.load("test")?.0;
    if let Some(min) = min_node_count {
        // Counts come from the labeled rows only when the parts are fixed.
        let mut others: Vec<Dataset> = train[1..].to_vec();
        others.push(validation);
        others.push(test);
        let pruned = prune_rare_nodes(&train[0], &others, min)?;
        eprintln!(
            "{}: kept {} of {} nodes with at least {min} positives",
            dir.name(),
            pruned.kept.len(),
            train[0].n_labels()
        );
        let mut rest = pruned.others;
        test = rest.pop().expect("test part");
        validation = rest.pop().expect("validation part");
        train = std::iter::once(pruned.train).chain(rest).collect();
    }
    let train_x: Vec<&Matrix> = train.iter().map(|d| &d.features).collect();
    let prep = Preprocess::fit(&train_x, standardize)?;
    let train: Vec<Dataset> = train.iter().map(|d| with_features(d, &prep)).collect::<sshmc::Result<_>>()?;
    let validation = with_features(&validation, &prep)?;
    let test = with_features(&test, &prep)?;
    let mut train = train.into_iter();
    let first = train.next().expect("at least one training part");
    let train = match train.next() {
        Some(unlabeled) => TrainPart::Given { labeled: first, unlabeled },
        None => TrainPart::Stratify(first),
    };
    Ok(BenchmarkData {
        name: dir.name(),
        train,
        validation,
        test,
    })
}

pub fn benchmark(a: &BenchmarkArgs) -> Result<()> {
    let (spec, _) = a.model.resolve(0)?;
    let cfg = BenchmarkConfig {
        fractions: a.fractions.clone(),
        repetitions: a.repetitions,
        seed: spec.seed,
        thr_grid: a.thr_grid.clone(),
        k_grid: a.k_grid.clone(),
        methods: if a.methods.is_empty() { Method::ALL.to_vec() } else { a.methods.clone() },
        spec,
        alpha: a.alpha,
    };
    let datasets = a
        .data
        .iter()
        .map(|d| load_benchmark_data(d, a.min_node_count, a.standardize))
        .collect::<Result<Vec<_>>>()?;
    let report = run_benchmark(&datasets, &cfg)?;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_file(&a.out.join("results.csv"), &report.results_csv())?;
    write_file(&a.out.join("summary.csv"), &report.summary_csv())?;
    let text = report.summary_text();
    write_file(&a.out.join("report.txt"), &text)?;
    if let Some(c) = &report.comparison {
        write_file(&a.out.join("ranks.csv"), &c.ranks_csv())?;
        write_file(&a.out.join("nemenyi.csv"), &c.nemenyi_csv())?;
    }
    let manifests = a.out.join("manifests");
    for r in &report.records {
        let path = manifests.join(format!("{}.txt", r.run_id()));
        write_file(&path, &r.manifest.to_text())?;
    }
    let mut run = RunManifest::new();
    run.set("datasets", a.data.iter().map(|d| d.display().to_string()).collect::<Vec<_>>().join(";"))
        .set("fractions", join(&cfg.fractions))
        .set("repetitions", cfg.repetitions)
        .set("thr_grid", join(&cfg.thr_grid))
        .set("k_grid", cfg.k_grid.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";"))
        .set("methods", cfg.methods.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(";"))
        .set("alpha", cfg.alpha)
        .set("min_node_count", a.min_node_count.map_or("none".into(), |m| m.to_string()))
        .set("standardize", a.standardize);
    run.extend(cfg.spec.describe(Method::Sshmc(cfg.spec.sshmc.variant)));
    write_file(&a.out.join("benchmark.txt"), &run.to_text())?;
    print!("{text}");
    Ok(())
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// Algorithm names, block names and the value rows.
type Table = (Vec<String>, Vec<String>, Vec<Vec<f64>>);

/// Parses `block,<alg>...` rows of numbers.
fn parse_table(text: &str, path: &Path) -> sshmc::Result<Table> {
    let bad = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: msg,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty table".into()))?;
    let algorithms: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_string()).collect();
    let mut blocks = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        let mut cells = line.split(',');
        blocks.push(cells.next().unwrap_or_default().trim().to_string());
        let row = cells
            .map(|c| c.trim().parse::<f64>().map_err(|_| bad(i + 1, format!("not a number: `{}`", c.trim()))))
            .collect::<sshmc::Result<Vec<f64>>>()?;
        if row.len() != algorithms.len() {
            return Err(bad(i + 1, format!("{} values for {} algorithms", row.len(), algorithms.len())));
        }
        values.push(row);
    }
    Ok((algorithms, blocks, values))
}

pub fn stats(a: &StatsArgs) -> Result<()> {
    let text = fs::read_to_string(&a.input).map_err(|e| Error::Io { path: a.input.clone(), source: e })?;
    let (algorithms, blocks, values) = parse_table(&text, &a.input)?;
    let c = ComparisonReport::new(algorithms, blocks, &values, !a.lower_is_better, a.alpha)?;
    let summary = c.summary();
    print!("{summary}");
    if let Some(dir) = &a.out {
        write_file(&dir.join("ranks.csv"), &c.ranks_csv())?;
        write_file(&dir.join("nemenyi.csv"), &c.nemenyi_csv())?;
        write_file(&dir.join("report.txt"), &summary)?;
    }
    Ok(())
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let d = generate_artificial(a.seed);
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for (part, ds) in [
        ("labeled", &d.labeled),
        ("unlabeled", &d.unlabeled),
        ("test", &d.test),
        ("valid", &d.validation),
    ] {
        write_part(&a.out, part, ds)?;
    }
    let (nl, nu, nt) = ARTIFICIAL_SIZES;
    println!(
        "wrote artificial dataset (seed {}): {nl} labeled, {nu} unlabeled, {nt} test, {} validation rows -> {}",
        a.seed,
        d.validation.len(),
        a.out.display()
    );
    Ok(())
}

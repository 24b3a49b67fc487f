//! Method dispatch and the benchmark protocol: labeled-fraction splits,
//! validation-set grid search for SSHMC-BLI, test evaluation and the
//! rank-based comparison across blocks.

use std::fmt::Write as _;
use std::time::Instant;

use crate::base_learner::{BaseLearner, RandomForestConfig};
use crate::baselines::{fit_stml, fit_sthc, SelfTrainConfig, SELF_TRAIN_POLICY};
use crate::bundle::{Method, RunManifest, TrainedModel};
use crate::dataset::{stratified_labeled_split, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::evaluation::{average_precision, rank_matrix, ComparisonReport, EvalSummary, RankTable};
use crate::lcn::{fit_lcn, Policy};
use crate::matrix::Matrix;
use crate::seed;
use crate::ssl::{run_sshmc_bli, IterationLog, SshmcConfig};

/// Everything needed to train any method.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSpec {
    pub forest: RandomForestConfig,
    pub sshmc: SshmcConfig,
    pub self_train: SelfTrainConfig,
    /// Policy of the LCN and SSHMC-BLI per-node fits.
    pub policy: Policy,
    pub seed: u64,
}

impl TrainSpec {
    /// Defaults with every random component seeded from `root`. The forest
    /// and the policy sampling get separate sub-streams; all methods share them.
    pub fn from_seed(root: u64) -> Self {
        let mut spec = TrainSpec {
            forest: RandomForestConfig::default(),
            sshmc: SshmcConfig::default(),
            self_train: SelfTrainConfig::default(),
            policy: Policy::BalancedBottomUp,
            seed: root,
        };
        spec.reseed(root);
        spec
    }

    pub fn reseed(&mut self, root: u64) {
        self.seed = root;
        self.forest.seed = seed::derive(root, seed::FOREST, 0);
        let policy_seed = seed::derive(root, seed::POLICY, 0);
        self.sshmc.seed = policy_seed;
        self.self_train.seed = policy_seed;
    }

    pub fn validate(&self) -> Result<()> {
        self.forest.validate()?;
        self.sshmc.validate()?;
        self.self_train.validate()
    }

    /// Manifest entries for `method`.
    pub fn describe(&self, method: Method) -> Vec<(String, String)> {
        let mut out = vec![
            ("method".to_string(), method.to_string()),
            ("seed".to_string(), self.seed.to_string()),
        ];
        let policy = match method {
            Method::Stml | Method::Sthc => SELF_TRAIN_POLICY,
            _ => self.policy,
        };
        out.push(("policy".into(), policy.to_string()));
        out.extend(self.forest.describe());
        match method {
            Method::Sshmc(v) => {
                let c = &self.sshmc;
                out.extend([
                    ("sshmc.variant".to_string(), v.to_string()),
                    ("sshmc.k".into(), c.k.to_string()),
                    ("sshmc.thr".into(), format!("{:?}", c.thr)),
                    ("sshmc.t2label".into(), format!("{:?}", c.t2label)),
                    ("sshmc.max_iterations".into(), c.max_iterations.to_string()),
                    ("sshmc.k_step_iters".into(), c.k_step_iters.to_string()),
                    ("sshmc.sisi_n".into(), format!("{:?}", c.sisi_n)),
                ]);
            }
            Method::Stml | Method::Sthc => {
                out.extend([
                    ("self_train.confidence".to_string(), format!("{:?}", self.self_train.confidence)),
                    ("self_train.max_rounds".into(), self.self_train.max_rounds.to_string()),
                ]);
            }
            Method::Lcn => {}
        }
        out
    }
}

/// A trained model plus what the training run reported.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: TrainedModel,
    pub log: Option<IterationLog>,
    /// Unlabeled rows that entered the final training pool.
    pub pseudo_labeled: Vec<usize>,
}

/// Trains `method` on `labeled` (and `unlabeled` where the method uses it).
pub fn train_method(method: Method, spec: &TrainSpec, labeled: &Dataset, unlabeled: &Matrix) -> Result<TrainOutput> {
    spec.validate()?;
    let out = match method {
        Method::Lcn => {
            let m = fit_lcn(
                &labeled.hierarchy,
                &labeled.features,
                &labeled.labels,
                spec.policy,
                &spec.forest,
                spec.sshmc.seed,
            )?;
            TrainOutput {
                model: TrainedModel::from_lcn(method, m),
                log: None,
                pseudo_labeled: Vec::new(),
            }
        }
        Method::Sshmc(v) => {
            let cfg = SshmcConfig { variant: v, ..spec.sshmc.clone() };
            let run = run_sshmc_bli(labeled, unlabeled, &cfg, spec.policy, &spec.forest)?;
            TrainOutput {
                model: TrainedModel::from_lcn(method, run.model),
                log: Some(run.log),
                pseudo_labeled: run.pool.members,
            }
        }
        Method::Stml => TrainOutput {
            model: TrainedModel::from_self_trained(fit_stml(labeled, unlabeled, &spec.self_train, &spec.forest)?),
            log: None,
            pseudo_labeled: Vec::new(),
        },
        Method::Sthc => TrainOutput {
            model: TrainedModel::from_self_trained(fit_sthc(labeled, unlabeled, &spec.self_train, &spec.forest)?),
            log: None,
            pseudo_labeled: Vec::new(),
        },
    };
    Ok(out)
}

/// How the training part is divided into labeled and unlabeled rows.
#[derive(Debug, Clone)]
pub enum TrainPart {
    /// Split by stratification at each configured fraction.
    Stratify(Dataset),
    /// Fixed parts shipped with the data; fractions are ignored.
    Given { labeled: Dataset, unlabeled: Dataset },
}

#[derive(Debug, Clone)]
pub struct BenchmarkData {
    pub name: String,
    pub train: TrainPart,
    pub validation: Dataset,
    pub test: Dataset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub fractions: Vec<f64>,
    pub repetitions: usize,
    pub seed: u64,
    pub thr_grid: Vec<f64>,
    pub k_grid: Vec<usize>,
    pub methods: Vec<Method>,
    /// Template for every run; its seeds are replaced per repetition.
    pub spec: TrainSpec,
    pub alpha: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            fractions: crate::dataset::PROTOCOL_FRACTIONS.to_vec(),
            repetitions: 3,
            seed: 0,
            thr_grid: vec![0.3, 0.5, 0.7],
            k_grid: vec![3, 4, 5],
            methods: Method::ALL.to_vec(),
            spec: TrainSpec::from_seed(0),
            alpha: 0.05,
        }
    }
}

/// One (dataset, fraction, repetition, method) cell.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub dataset: String,
    pub fraction: f64,
    pub repetition: usize,
    pub method: Method,
    /// `None` on success, the error text otherwise.
    pub failure: Option<String>,
    pub k: Option<usize>,
    pub thr: Option<f64>,
    pub validation_ap: Option<f64>,
    pub eval: Option<EvalSummary>,
    pub n_labeled: usize,
    pub n_unlabeled: usize,
    pub n_pseudo_labeled: usize,
    pub wall_time_s: f64,
    pub manifest: RunManifest,
}

impl RunRecord {
    pub const CSV_HEADER: &'static str = "run_id,dataset,fraction,repetition,method,status,k,thr,validation_ap,\
average_precision,micro_precision@0.5,micro_recall@0.5,violations,rows,n_labeled,n_unlabeled,n_pseudo_labeled,wall_time_s";

    pub fn run_id(&self) -> String {
        format!("{}-f{}-r{}-{}", self.dataset, self.fraction, self.repetition, self.method)
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let status = match &self.failure {
            None => "ok".to_string(),
            Some(e) => format!("failed: {}", e.replace([',', '\n'], ";")),
        };
        let metrics = self
            .eval
            .map_or_else(|| ",,,,".to_string(), |e| e.csv_row());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3}",
            self.run_id(),
            self.dataset,
            self.fraction,
            self.repetition,
            self.method,
            status,
            opt(self.k.map(|k| k.to_string())),
            opt(self.thr.map(|t| format!("{t:?}"))),
            opt(self.validation_ap.map(|v| format!("{v:?}"))),
            metrics,
            self.n_labeled,
            self.n_unlabeled,
            self.n_pseudo_labeled,
            self.wall_time_s
        )
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub records: Vec<RunRecord>,
    /// Block names (`dataset@fraction`) in table order.
    pub blocks: Vec<String>,
    pub methods: Vec<Method>,
    /// Mean test AP per block and method over successful repetitions.
    pub mean_ap: Vec<Vec<f64>>,
    pub ranks: Option<RankTable>,
    pub comparison: Option<ComparisonReport>,
    /// Number of training-pool rows checked against held-out ids.
    pub audited_rows: usize,
}

impl BenchmarkReport {
    pub fn results_csv(&self) -> String {
        let mut out = String::from(RunRecord::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("block,method,mean_average_precision,average_rank\n");
        // Complete blocks come first, so rank rows line up with block indices.
        for (i, (b, row)) in self.blocks.iter().zip(&self.mean_ap).enumerate() {
            let rank_row = self.ranks.as_ref().and_then(|r| r.ranks.get(i));
            for (j, m) in self.methods.iter().enumerate() {
                let rank = rank_row.map_or(String::new(), |r| format!("{:?}", r[j]));
                let _ = writeln!(out, "{b},{m},{:?},{rank}", row[j]);
            }
        }
        out
    }

    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let failures = self.records.iter().filter(|r| r.failure.is_some()).count();
        let _ = writeln!(
            out,
            "{} runs ({} failed), {} blocks, {} training rows audited against held-out data",
            self.records.len(),
            failures,
            self.blocks.len(),
            self.audited_rows
        );
        match (&self.comparison, &self.ranks) {
            (Some(c), _) => out.push_str(&c.summary()),
            (None, Some(r)) => {
                let _ = writeln!(out, "average ranks (1 = best); one block, no Friedman test:");
                for (m, v) in self.methods.iter().zip(&r.avg_ranks) {
                    let _ = writeln!(out, "  {m:<12} {v:.3}");
                }
            }
            (None, None) => out.push_str("no complete block to rank\n"),
        }
        out
    }
}

struct Cell<'a> {
    name: &'a str,
    fraction: f64,
    repetition: usize,
    labeled: Dataset,
    unlabeled: Dataset,
    validation: &'a Dataset,
    test: &'a Dataset,
}

/// Runs every configured method on every split of every dataset.
///
/// Failures of single cells are recorded and the run continues. Returns an
/// error only for invalid configuration or if a training pool ever contains
/// a held-out row.
pub fn run_benchmark(datasets: &[BenchmarkData], cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    cfg.spec.validate()?;
    if cfg.methods.is_empty() {
        return Err(Error::Config("no methods selected".into()));
    }
    if cfg.thr_grid.is_empty() || cfg.k_grid.is_empty() {
        return Err(Error::Config("empty tuning grid".into()));
    }
    let mut records = Vec::new();
    let mut blocks: Vec<String> = Vec::new();
    let mut audited = 0;
    for data in datasets {
        for (fraction, reps) in cells_of(data, cfg)? {
            let block = format!("{}@{}", data.name, fraction);
            if !blocks.contains(&block) {
                blocks.push(block);
            }
            for (repetition, (labeled, unlabeled, pool_ids)) in reps.into_iter().enumerate() {
                // Held-out parts live in separate datasets; the ids below index
                // the training part only, so anything outside it is a leak.
                audited += audit_pool(&pool_ids, train_len(data))?;
                let cell = Cell {
                    name: &data.name,
                    fraction,
                    repetition,
                    labeled,
                    unlabeled,
                    validation: &data.validation,
                    test: &data.test,
                };
                let root = seed::derive(cfg.seed, seed::SPLIT, repetition as u64);
                for &method in &cfg.methods {
                    records.push(run_cell(&cell, method, cfg, root));
                }
            }
        }
    }

    let mut mean_ap = Vec::with_capacity(blocks.len());
    let mut complete = Vec::new();
    for b in &blocks {
        let mut row = Vec::with_capacity(cfg.methods.len());
        for &m in &cfg.methods {
            let aps: Vec<f64> = records
                .iter()
                .filter(|r| r.method == m && format!("{}@{}", r.dataset, r.fraction) == *b)
                .filter_map(|r| r.eval.map(|e| e.average_precision))
                .collect();
            row.push(if aps.is_empty() {
                f64::NAN
            } else {
                aps.iter().sum::<f64>() / aps.len() as f64
            });
        }
        if row.iter().all(|v| v.is_finite()) {
            complete.push(row.clone());
        }
        mean_ap.push(row);
    }
    let complete_blocks: Vec<String> = blocks
        .iter()
        .zip(&mean_ap)
        .filter(|(_, r)| r.iter().all(|v| v.is_finite()))
        .map(|(b, _)| b.clone())
        .collect();
    let ranks = if complete.is_empty() {
        None
    } else {
        Some(rank_matrix(&complete, true)?)
    };
    let comparison = if complete.len() >= 2 && cfg.methods.len() >= 2 {
        let names = cfg.methods.iter().map(|m| m.to_string()).collect();
        Some(ComparisonReport::new(names, complete_blocks.clone(), &complete, true, cfg.alpha)?)
    } else {
        None
    };
    // Rank rows follow the complete blocks only.
    let (blocks, mean_ap) = if complete_blocks.len() == blocks.len() {
        (blocks, mean_ap)
    } else {
        let mut all: Vec<(String, Vec<f64>)> = blocks.into_iter().zip(mean_ap).collect();
        all.sort_by_key(|(b, _)| !complete_blocks.contains(b));
        all.into_iter().unzip()
    };
    Ok(BenchmarkReport {
        records,
        blocks,
        methods: cfg.methods.clone(),
        mean_ap,
        ranks,
        comparison,
        audited_rows: audited,
    })
}

type Split = (Dataset, Dataset, Vec<usize>);

fn train_len(data: &BenchmarkData) -> usize {
    match &data.train {
        TrainPart::Stratify(d) => d.len(),
        TrainPart::Given { labeled, unlabeled } => labeled.len() + unlabeled.len(),
    }
}

fn cells_of(data: &BenchmarkData, cfg: &BenchmarkConfig) -> Result<Vec<(f64, Vec<Split>)>> {
    match &data.train {
        TrainPart::Given { labeled, unlabeled } => {
            let n = labeled.len() + unlabeled.len();
            let fraction = labeled.len() as f64 / n as f64;
            let fraction = (fraction * 1000.0).round() / 1000.0;
            let reps = (0..cfg.repetitions)
                .map(|_| (labeled.clone(), unlabeled.clone(), (0..n).collect()))
                .collect();
            Ok(vec![(fraction, reps)])
        }
        TrainPart::Stratify(train) => {
            let mut out = Vec::new();
            for &fraction in &cfg.fractions {
                let spec = SplitSpec {
                    labeled_fraction: fraction,
                    repetitions: cfg.repetitions,
                    seed: cfg.seed,
                };
                let reps = stratified_labeled_split(train, &spec)?
                    .into_iter()
                    .map(|m| {
                        let l = m.labeled_rows();
                        let u = m.unlabeled_rows();
                        let mut ids = l.clone();
                        ids.extend(&u);
                        (train.subset(&l), train.subset(&u), ids)
                    })
                    .collect();
                out.push((fraction, reps));
            }
            Ok(out)
        }
    }
}

fn audit_pool(ids: &[usize], train_rows: usize) -> Result<usize> {
    if let Some(&bad) = ids.iter().find(|&&i| i >= train_rows) {
        return Err(Error::ShapeMismatch(format!(
            "training pool row {bad} lies outside the training part"
        )));
    }
    Ok(ids.len())
}

fn run_cell(cell: &Cell<'_>, method: Method, cfg: &BenchmarkConfig, root: u64) -> RunRecord {
    let start = Instant::now();
    let mut spec = cfg.spec.clone();
    spec.reseed(root);
    let mut rec = RunRecord {
        dataset: cell.name.to_string(),
        fraction: cell.fraction,
        repetition: cell.repetition,
        method,
        failure: None,
        k: None,
        thr: None,
        validation_ap: None,
        eval: None,
        n_labeled: cell.labeled.len(),
        n_unlabeled: cell.unlabeled.len(),
        n_pseudo_labeled: 0,
        wall_time_s: 0.0,
        manifest: RunManifest::new(),
    };
    let result = tune_and_train(cell, method, cfg, &mut spec).and_then(|(out, val_ap)| {
        let pred = out.model.predict(&cell.test.features)?;
        let eval = EvalSummary::compute(&cell.test.hierarchy, &pred, &cell.test.labels)?;
        Ok((out, val_ap, eval))
    });
    match result {
        Ok((out, val_ap, eval)) => {
            if let Method::Sshmc(_) = method {
                rec.k = Some(spec.sshmc.k);
                rec.thr = Some(spec.sshmc.thr);
            }
            rec.validation_ap = val_ap;
            rec.eval = Some(eval);
            rec.n_pseudo_labeled = out.pseudo_labeled.len();
        }
        Err(e) => rec.failure = Some(e.to_string()),
    }
    rec.wall_time_s = start.elapsed().as_secs_f64();
    let m = &mut rec.manifest;
    m.set("run_id", rec_id(cell, method))
        .set("dataset", cell.name)
        .set("labeled_fraction", cell.fraction)
        .set("repetition", cell.repetition)
        .set("split_seed", cfg.seed)
        .extend(spec.describe(method));
    if let Some(e) = &rec.eval {
        m.set("test.average_precision", format!("{:?}", e.average_precision))
            .set("test.violations", e.violations);
    }
    if let Some(v) = rec.validation_ap {
        m.set("validation.average_precision", format!("{v:?}"));
    }
    m.set("status", if rec.failure.is_none() { "ok" } else { "failed" })
        .set("wall_time_s", format!("{:.3}", rec.wall_time_s));
    rec
}

fn rec_id(cell: &Cell<'_>, method: Method) -> String {
    format!("{}-f{}-r{}-{}", cell.name, cell.fraction, cell.repetition, method)
}

fn validation_ap(model: &TrainedModel, validation: &Dataset) -> Result<f64> {
    average_precision(&model.predict(&validation.features)?, &validation.labels)
}

/// Grid search over (k, THR) for SSHMC-BLI; other methods train once.
/// Leaves the chosen configuration in `spec`.
fn tune_and_train(
    cell: &Cell<'_>,
    method: Method,
    cfg: &BenchmarkConfig,
    spec: &mut TrainSpec,
) -> Result<(TrainOutput, Option<f64>)> {
    let unlabeled = &cell.unlabeled.features;
    if !matches!(method, Method::Sshmc(_)) {
        let out = train_method(method, spec, &cell.labeled, unlabeled)?;
        let v = validation_ap(&out.model, cell.validation).ok();
        return Ok((out, v));
    }
    let mut ks = cfg.k_grid.clone();
    ks.sort_unstable();
    let mut thrs = cfg.thr_grid.clone();
    thrs.sort_by(f64::total_cmp);
    let mut best: Option<(f64, usize, f64, TrainOutput)> = None;
    let mut last_err = None;
    for &k in &ks {
        for &thr in &thrs {
            let mut s = spec.clone();
            s.sshmc.k = k;
            s.sshmc.thr = thr;
            let out = match train_method(method, &s, &cell.labeled, unlabeled) {
                Ok(o) => o,
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            let ap = validation_ap(&out.model, cell.validation)?;
            // Strict improvement keeps the earlier (smaller k, then smaller THR) on ties.
            if best.as_ref().is_none_or(|b| ap > b.0) {
                best = Some((ap, k, thr, out));
            }
        }
    }
    match best {
        Some((ap, k, thr, out)) => {
            spec.sshmc.k = k;
            spec.sshmc.thr = thr;
            Ok((out, Some(ap)))
        }
        None => Err(last_err.unwrap_or_else(|| Error::Config("empty tuning grid".into()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_artificial;

    fn small_config() -> BenchmarkConfig {
        let mut spec = TrainSpec::from_seed(0);
        spec.forest.n_trees = 10;
        BenchmarkConfig {
            fractions: vec![1.0],
            repetitions: 1,
            seed: 3,
            thr_grid: vec![0.5],
            k_grid: vec![3],
            spec,
            ..Default::default()
        }
    }

    #[test]
    fn full_fraction_degenerates_to_supervised() {
        let d = generate_artificial(1);
        let train = d.labeled.subset(&(0..12).collect::<Vec<_>>());
        let data = BenchmarkData {
            name: "art".into(),
            train: TrainPart::Stratify(train),
            validation: d.validation.clone(),
            test: d.test.clone(),
        };
        let mut cfg = small_config();
        cfg.thr_grid = vec![0.3, 0.5];
        cfg.k_grid = vec![3, 4];
        let rep = run_benchmark(&[data], &cfg).unwrap();
        let ap = |m: Method| rep.records.iter().find(|r| r.method == m).unwrap().eval.unwrap().average_precision;
        assert_eq!(ap(Method::Sshmc(crate::ssl::Variant::V1)), ap(Method::Lcn));
        // All grid points tie; the smallest k and THR win.
        let v1 = rep.records.iter().find(|r| r.method == Method::Sshmc(crate::ssl::Variant::V1)).unwrap();
        assert_eq!((v1.k, v1.thr), (Some(3), Some(0.3)));
        assert_eq!(v1.n_unlabeled, 0);
    }

    #[test]
    fn given_parts_end_to_end() {
        let d = generate_artificial(2);
        let data = BenchmarkData {
            name: "art".into(),
            train: TrainPart::Given { labeled: d.labeled, unlabeled: d.unlabeled },
            validation: d.validation,
            test: d.test,
        };
        let rep = run_benchmark(&[data], &small_config()).unwrap();
        assert_eq!(rep.records.len(), 6);
        assert!(rep.records.iter().all(|r| r.failure.is_none()));
        let ranks = rep.ranks.as_ref().unwrap();
        assert_eq!(ranks.ranks.len(), 1);
        assert_eq!(ranks.ranks[0].iter().sum::<f64>(), 21.0);
        assert!(rep.comparison.is_none());
        assert_eq!(rep.audited_rows, 342);
        let csv = rep.results_csv();
        assert_eq!(csv.lines().count(), 7);
        let cols = RunRecord::CSV_HEADER.split(',').count();
        assert!(csv.lines().all(|l| l.split(',').count() == cols));
        assert!(rep.summary_text().contains("one block"));
        for r in &rep.records {
            assert_eq!(r.manifest.get("run_id"), Some(r.run_id().as_str()));
        }
    }

    #[test]
    fn failures_are_recorded_and_run_continues() {
        let d = generate_artificial(3);
        let tiny = d.labeled.subset(&[0, 1]);
        let data = BenchmarkData {
            name: "tiny".into(),
            train: TrainPart::Given { labeled: tiny, unlabeled: d.unlabeled },
            validation: d.validation,
            test: d.test,
        };
        let rep = run_benchmark(&[data], &small_config()).unwrap();
        let failed: Vec<Method> = rep.records.iter().filter(|r| r.failure.is_some()).map(|r| r.method).collect();
        assert_eq!(failed.len(), 3);
        assert!(failed.iter().all(|m| matches!(m, Method::Sshmc(_))));
        assert!(rep.results_csv().contains("failed: neighbor pool"));
    }

    #[test]
    fn audit_rejects_foreign_rows() {
        assert!(audit_pool(&[0, 5], 5).is_err());
        assert_eq!(audit_pool(&[0, 4], 5).unwrap(), 2);
    }

    #[test]
    fn spec_seeds_are_shared_across_methods() {
        let s = TrainSpec::from_seed(9);
        assert_eq!(s.sshmc.seed, s.self_train.seed);
        assert_ne!(s.forest.seed, s.sshmc.seed);
        let d = s.describe(Method::Sshmc(crate::ssl::Variant::V3));
        assert!(d.iter().any(|(k, v)| k == "sshmc.k_step_iters" && v == "10"));
        assert!(s.describe(Method::Stml).iter().any(|(k, v)| k == "policy" && v == "less_inclusive"));
    }
}

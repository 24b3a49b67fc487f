//! Throughput of the data-parallel hot paths.
//!
//! Run once with default features and once with `--no-default-features` to
//! compare the rayon and sequential builds; group names carry the mode. With
//! the `parallel` feature each case also runs inside a one-thread pool.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sshmc::base_learner::{BaseLearner, RandomForestConfig};
use sshmc::dataset::{generate_artificial, Dataset};
use sshmc::lcn::{fit_lcn, Policy};
use sshmc::ssl::{pseudo_label_pass, run_sshmc_bli, Pool, PseudoLabelState, SshmcConfig};
use sshmc::{par, Matrix};

fn mode() -> &'static str {
    if par::is_parallel() {
        "parallel"
    } else {
        "sequential"
    }
}

/// Runs `f` as built and, in the parallel build, again on a single thread.
fn both(mut register: impl FnMut(&str, &dyn Fn()), work: impl Fn() + Sync) {
    register(mode(), &work);
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        register("parallel-1-thread", &|| pool.install(&work));
    }
}

/// Labeled pool and unlabeled rows drawn from several artificial seeds.
fn stacked(seeds: std::ops::Range<u64>) -> (Dataset, Matrix) {
    let parts: Vec<_> = seeds.map(generate_artificial).collect();
    let mut features = parts[0].test.features.clone();
    let mut labels = parts[0].test.labels.clone();
    let mut unlabeled = parts[0].unlabeled.features.clone();
    for p in &parts[1..] {
        features = features.vstack(&p.test.features).unwrap();
        labels.extend(p.test.labels.iter().cloned());
        unlabeled = unlabeled.vstack(&p.unlabeled.features).unwrap();
    }
    let h = Arc::clone(&parts[0].test.hierarchy);
    (Dataset::new(features, labels, h, None).unwrap(), unlabeled)
}

fn random_problem(rows: usize, cols: usize) -> (Matrix, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = Matrix::new(rows, cols, data).unwrap();
    let y = (0..rows)
        .map(|i| x.row(i)[0] + 0.5 * x.row(i)[1] > 0.1 * rng.random_range(-1.0..1.0))
        .collect();
    (x, y)
}

fn forest_fit(c: &mut Criterion) {
    let (x, y) = random_problem(1000, 20);
    let rows: Vec<usize> = (0..x.rows()).collect();
    let cfg = RandomForestConfig { n_trees: 50, ..Default::default() };
    let mut g = c.benchmark_group("forest_fit_1000x20_50_trees");
    g.sample_size(10);
    both(
        |name, work| {
            g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(work));
        },
        || {
            black_box(cfg.fit(&x, &rows, &y, 1).unwrap());
        },
    );
    g.finish();
}

fn pseudo_labeling(c: &mut Criterion) {
    let (labeled, unlabeled) = stacked(0..6);
    let config = SshmcConfig::default();
    let pool = Pool::new(&labeled, &unlabeled, &PseudoLabelState::empty(unlabeled.rows(), labeled.n_labels())).unwrap();
    let mut g = c.benchmark_group(format!("pseudo_label_pass_{}x{}", pool.len(), unlabeled.rows()));
    both(
        |name, work| {
            g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(work));
        },
        || {
            black_box(pseudo_label_pass(&pool, &unlabeled, &config, config.k, labeled.n_labels()).unwrap());
        },
    );
    g.finish();
}

fn lcn_and_sshmc(c: &mut Criterion) {
    let d = generate_artificial(0);
    let forest = RandomForestConfig { n_trees: 30, ..Default::default() };
    let mut g = c.benchmark_group("artificial");
    g.sample_size(10);
    both(
        |name, work| {
            g.bench_function(BenchmarkId::new("lcn_fit_predict", name), |b| b.iter(work));
        },
        || {
            let m = fit_lcn(
                &d.labeled.hierarchy,
                &d.labeled.features,
                &d.labeled.labels,
                Policy::BalancedBottomUp,
                &forest,
                0,
            )
            .unwrap();
            black_box(m.predict(&d.test.features).unwrap());
        },
    );
    let config = SshmcConfig::default();
    both(
        |name, work| {
            g.bench_function(BenchmarkId::new("sshmc_v1_train", name), |b| b.iter(work));
        },
        || {
            black_box(run_sshmc_bli(&d.labeled, &d.unlabeled.features, &config, Policy::BalancedBottomUp, &forest).unwrap());
        },
    );
    g.finish();
}

criterion_group!(benches, forest_fit, pseudo_labeling, lcn_and_sshmc);
criterion_main!(benches);

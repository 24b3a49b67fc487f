//! SSHMC-BLI: iterative pseudo-labeling from nearest labeled neighbors,
//! filtered by SISI, followed by a local-classifier-per-node fit on the
//! enlarged pool.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::base_learner::BaseLearner;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, LabelVector};
use crate::lcn::{fit_lcn, LcnModel, Policy};
use crate::matrix::{euclidean, Matrix};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Plain neighbor search over the current pool.
    V1,
    /// An instance already in the pool is never its own neighbor.
    V2,
    /// `k` grows by one every `k_step_iters` iterations.
    V3,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::V1 => "v1",
            Variant::V2 => "v2",
            Variant::V3 => "v3",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "v1" | "1" => Ok(Variant::V1),
            "v2" | "2" => Ok(Variant::V2),
            "v3" | "3" => Ok(Variant::V3),
            _ => Err(Error::Config(format!("unknown variant `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SshmcConfig {
    /// Nearest labeled neighbors per unlabeled instance.
    pub k: usize,
    /// Minimum SISI for a pseudo-label to stay valid.
    pub thr: f64,
    /// Minimum neighbor frequency for a pseudo-label bit.
    pub t2label: f64,
    pub max_iterations: usize,
    pub variant: Variant,
    pub k_step_iters: usize,
    /// The `n` of the SISI interpolation band.
    pub sisi_n: f64,
    /// Seed for the final per-node fit (balanced sampling).
    pub seed: u64,
}

impl Default for SshmcConfig {
    fn default() -> Self {
        SshmcConfig {
            k: 3,
            thr: 0.5,
            t2label: 0.5,
            max_iterations: 50,
            variant: Variant::V1,
            k_step_iters: 10,
            sisi_n: 2.0,
            seed: 0,
        }
    }
}

impl SshmcConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.k)));
        }
        if !unit(self.thr) {
            return Err(Error::Config(format!("thr must lie in [0,1], got {}", self.thr)));
        }
        if !unit(self.t2label) {
            return Err(Error::Config(format!("t2label must lie in [0,1], got {}", self.t2label)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if self.k_step_iters == 0 {
            return Err(Error::Config("k_step_iters must be at least 1".into()));
        }
        if !self.sisi_n.is_finite() || self.sisi_n <= 1.0 {
            return Err(Error::Config(format!("sisi_n must be finite and > 1, got {}", self.sisi_n)));
        }
        Ok(())
    }

    /// Neighborhood size in iteration `t` (1-based) for a pool of `pool` rows.
    pub fn k_at(&self, t: usize, pool: usize) -> usize {
        match self.variant {
            Variant::V3 => {
                let grown = self.k + (t - 1) / self.k_step_iters;
                grown.min(pool.saturating_sub(1)).max(self.k)
            }
            _ => self.k,
        }
    }
}

/// Ids of the `k` pool rows closest to `query`, nearest first; ties go to
/// the lower id. `exclude` is skipped if given.
pub fn get_nln(k: usize, query: &[f64], pool: &Matrix, exclude: Option<usize>) -> Result<Vec<usize>> {
    let available = pool.rows() - usize::from(exclude.is_some_and(|e| e < pool.rows()));
    if available < k {
        return Err(Error::PoolTooSmall {
            required: k,
            available,
        });
    }
    let mut d: Vec<(f64, usize)> = (0..pool.rows())
        .filter(|&i| Some(i) != exclude)
        .map(|i| (euclidean(query, pool.row(i)), i))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k, cmp);
        d.truncate(k);
    }
    d.sort_unstable_by(cmp);
    Ok(d.into_iter().map(|(_, i)| i).collect())
}

/// Mean pairwise distance among `points`.
pub fn lavg(points: &[&[f64]]) -> Result<f64> {
    let k = points.len();
    if k < 2 {
        return Err(Error::TooFewPoints(k));
    }
    let mut sum = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            sum += euclidean(points[i], points[j]);
        }
    }
    Ok(sum / (k * (k - 1) / 2) as f64)
}

/// Mean distance from `p` to each of `points`.
pub fn uavg(p: &[f64], points: &[&[f64]]) -> f64 {
    points.iter().map(|a| euclidean(p, a)).sum::<f64>() / points.len() as f64
}

/// Similarity of `p` to the set `points`, in [0,1].
pub fn sisi(p: &[f64], points: &[&[f64]], n: f64) -> Result<f64> {
    let l = lavg(points)?;
    let u = uavg(p, points);
    Ok(sisi_from_averages(u, l, n))
}

pub(crate) fn sisi_from_averages(u: f64, l: f64, n: f64) -> f64 {
    if l == 0.0 {
        return if u == 0.0 { 1.0 } else { 0.0 };
    }
    if u <= l {
        1.0
    } else if u >= n * l {
        0.0
    } else {
        ((l - u) / ((n - 1.0) * l) + 1.0).clamp(0.0, 1.0)
    }
}

/// Per-label neighbor frequency, its thresholding and the validity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabel {
    pub ppsl: Vec<f64>,
    pub psl: LabelVector,
    pub valid: bool,
}

/// Builds a pseudo-label from neighbor label rows. Empty `neighbors` gives an
/// invalid, all-zero result.
pub fn build_pseudo_label(neighbors: &[&LabelVector], n_labels: usize, t2label: f64) -> PseudoLabel {
    let k = neighbors.len();
    let mut ppsl = vec![0.0; n_labels];
    if k > 0 {
        let mut counts = vec![0usize; n_labels];
        for y in neighbors {
            for l in y.ones() {
                counts[l] += 1;
            }
        }
        for (p, c) in ppsl.iter_mut().zip(counts) {
            *p = c as f64 / k as f64;
        }
    }
    let psl = LabelVector(ppsl.iter().map(|&p| k > 0 && p >= t2label).collect());
    let valid = psl.any();
    PseudoLabel { ppsl, psl, valid }
}

/// Outcome of the latest pseudo-labeling pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabelState {
    /// Pool ids of each unlabeled instance's neighbors.
    pub neighbors: Vec<Vec<usize>>,
    pub psl: Vec<LabelVector>,
    pub valid: Vec<bool>,
    pub sisi: Vec<f64>,
}

impl PseudoLabelState {
    /// Every instance invalid, the state before the first pass.
    pub fn empty(n_unlabeled: usize, n_labels: usize) -> Self {
        PseudoLabelState {
            neighbors: vec![Vec::new(); n_unlabeled],
            psl: vec![LabelVector::zeros(n_labels); n_unlabeled],
            valid: vec![false; n_unlabeled],
            sisi: vec![0.0; n_unlabeled],
        }
    }

    pub fn n_valid(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    pub fn valid_ids(&self) -> Vec<usize> {
        (0..self.valid.len()).filter(|&j| self.valid[j]).collect()
    }

    /// Termination comparison: bits and validity only.
    pub fn same_labels(&self, other: &PseudoLabelState) -> bool {
        self.valid == other.valid && self.psl == other.psl
    }

    pub fn n_changed(&self, other: &PseudoLabelState) -> usize {
        (0..self.valid.len())
            .filter(|&j| self.valid[j] != other.valid[j] || self.psl[j] != other.psl[j])
            .count()
    }
}

/// Training pool: labeled rows followed by the valid pseudo-labeled rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Pool {
    pub features: Matrix,
    pub labels: Vec<LabelVector>,
    /// For each pool row past the labeled block, its unlabeled index.
    pub members: Vec<usize>,
    pub n_labeled: usize,
}

impl Pool {
    pub fn new(labeled: &Dataset, unlabeled: &Matrix, state: &PseudoLabelState) -> Result<Self> {
        let members = state.valid_ids();
        let extra = unlabeled.select_rows(&members);
        let features = labeled.features.vstack(&extra)?;
        let mut labels = labeled.labels.clone();
        labels.extend(members.iter().map(|&j| state.psl[j].clone()));
        Ok(Pool {
            features,
            labels,
            members,
            n_labeled: labeled.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Pool id of unlabeled instance `j`, if it is in the pool.
    pub fn position(&self, j: usize) -> Option<usize> {
        self.members.binary_search(&j).ok().map(|p| self.n_labeled + p)
    }
}

/// One pseudo-labeling pass (neighbor search, pseudo-label, SISI filter)
/// over every unlabeled instance against a fixed pool.
pub fn pseudo_label_pass(
    pool: &Pool,
    unlabeled: &Matrix,
    config: &SshmcConfig,
    k: usize,
    n_labels: usize,
) -> Result<PseudoLabelState> {
    let per_row = par::try_map_range(unlabeled.rows(), |j| {
        let u = unlabeled.row(j);
        let exclude = match config.variant {
            Variant::V2 => pool.position(j),
            _ => None,
        };
        let ind = get_nln(k, u, &pool.features, exclude)?;
        let ys: Vec<&LabelVector> = ind.iter().map(|&i| &pool.labels[i]).collect();
        let mut pl = build_pseudo_label(&ys, n_labels, config.t2label);
        let pts: Vec<&[f64]> = ind.iter().map(|&i| pool.features.row(i)).collect();
        let s = sisi(u, &pts, config.sisi_n)?;
        if pl.valid && s < config.thr {
            pl.valid = false;
        }
        if !pl.valid {
            pl.psl = LabelVector::zeros(n_labels);
        }
        Ok::<_, Error>((ind, pl.psl, pl.valid, s))
    })?;
    let mut state = PseudoLabelState::empty(0, n_labels);
    for (ind, psl, valid, s) in per_row {
        state.neighbors.push(ind);
        state.psl.push(psl);
        state.valid.push(valid);
        state.sisi.push(s);
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub pool_size: usize,
    pub n_valid: usize,
    pub n_changed: usize,
    pub current_k: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IterationLog {
    pub records: Vec<IterationRecord>,
    /// Whether the loop stopped on a fixed point rather than the iteration cap.
    pub converged: bool,
}

impl IterationLog {
    pub const CSV_HEADER: &'static str = "iteration,pool_size,n_valid,n_changed,current_k";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.iteration, r.pool_size, r.n_valid, r.n_changed, r.current_k
            ));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv().as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Result of [`run_sshmc_bli`].
#[derive(Debug, Clone)]
pub struct SshmcRun<M> {
    pub model: LcnModel<M>,
    pub state: PseudoLabelState,
    pub log: IterationLog,
    /// Pool the final model was trained on.
    pub pool: Pool,
}

/// Runs the pseudo-labeling loop to a fixed point (or the iteration cap),
/// then fits per-node classifiers on labeled plus valid pseudo-labeled rows.
pub fn run_sshmc_bli<L: BaseLearner>(
    labeled: &Dataset,
    unlabeled: &Matrix,
    config: &SshmcConfig,
    policy: Policy,
    learner: &L,
) -> Result<SshmcRun<L::Model>> {
    config.validate()?;
    if labeled.is_empty() {
        return Err(Error::PoolTooSmall {
            required: config.k,
            available: 0,
        });
    }
    if unlabeled.rows() > 0 && unlabeled.cols() != labeled.n_features() {
        return Err(Error::WidthMismatch {
            expected: labeled.n_features(),
            actual: unlabeled.cols(),
        });
    }
    let h: &Arc<Hierarchy> = &labeled.hierarchy;
    let n_labels = h.len();
    let (state, pool, log) = pseudo_label_loop(labeled, unlabeled, config, n_labels)?;
    let model = fit_lcn(h, &pool.features, &pool.labels, policy, learner, config.seed)?;
    Ok(SshmcRun {
        model,
        state,
        log,
        pool,
    })
}

/// The iteration part of [`run_sshmc_bli`]; returns the last state, the
/// pool for the final fit and the log.
pub fn pseudo_label_loop(
    labeled: &Dataset,
    unlabeled: &Matrix,
    config: &SshmcConfig,
    n_labels: usize,
) -> Result<(PseudoLabelState, Pool, IterationLog)> {
    let mut prev = PseudoLabelState::empty(unlabeled.rows(), n_labels);
    let mut pool = Pool::new(labeled, unlabeled, &prev)?;
    let mut log = IterationLog::default();
    let mut t = 1;
    loop {
        let k = config.k_at(t, pool.len());
        let state = pseudo_label_pass(&pool, unlabeled, config, k, n_labels)?;
        log.records.push(IterationRecord {
            iteration: t,
            pool_size: pool.len(),
            n_valid: state.n_valid(),
            n_changed: state.n_changed(&prev),
            current_k: k,
        });
        let fixed = state.same_labels(&prev);
        if t > config.max_iterations || fixed {
            log.converged = fixed;
            return Ok((state, pool, log));
        }
        pool = Pool::new(labeled, unlabeled, &state)?;
        prev = state;
        t += 1;
    }
}

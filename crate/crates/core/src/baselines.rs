//! Per-label self-training baselines. Both train every label as a flat
//! binary problem (less-inclusive selection); STML keeps the raw
//! probabilities and STHC caps them top-down.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::base_learner::{BaseLearner, BinaryClassifier};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hierarchy::NodeId;
use crate::lcn::{fit_node, post_process, predict_columns, select_examples, LcnModel, NodeNotice, Policy, Selection};
use crate::matrix::Matrix;
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTrainConfig {
    /// Adopt a pseudo-positive at p ≥ confidence, a pseudo-negative at p ≤ 1 − confidence.
    pub confidence: f64,
    pub max_rounds: usize,
    /// Seed for policy sampling.
    pub seed: u64,
}

impl Default for SelfTrainConfig {
    fn default() -> Self {
        SelfTrainConfig {
            confidence: 0.75,
            max_rounds: 5,
            seed: 0,
        }
    }
}

impl SelfTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.confidence > 0.5 && self.confidence <= 1.0) {
            return Err(Error::Config(format!(
                "confidence must lie in (0.5, 1], got {}",
                self.confidence
            )));
        }
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelfTrainMethod {
    Stml,
    Sthc,
}

/// Per-node selection shared by both methods.
pub const SELF_TRAIN_POLICY: Policy = Policy::LessInclusive;

impl SelfTrainMethod {
    pub fn post_processes(self) -> bool {
        self == SelfTrainMethod::Sthc
    }
}

/// Per-node self-training statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTrace {
    /// Refits after the initial supervised fit.
    pub rounds: usize,
    pub adopted_positive: usize,
    pub adopted_negative: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTrainedModel<M> {
    pub method: SelfTrainMethod,
    pub lcn: LcnModel<M>,
    pub traces: Vec<NodeTrace>,
}

impl<M: BinaryClassifier> SelfTrainedModel<M> {
    pub fn predict_raw(&self, x: &Matrix) -> Result<Matrix> {
        predict_columns(&self.lcn.node_models, x)
    }

    /// STML returns raw probabilities, STHC post-processed ones.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        let raw = self.predict_raw(x)?;
        if self.method.post_processes() {
            post_process(&self.lcn.hierarchy, &raw)
        } else {
            Ok(raw)
        }
    }
}

/// Unlabeled ids whose probability clears the confidence bar, split by side.
pub fn adoptions(probs: &[f64], confidence: f64) -> (Vec<usize>, Vec<usize>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (j, &p) in probs.iter().enumerate() {
        if p >= confidence {
            pos.push(j);
        } else if p <= 1.0 - confidence {
            neg.push(j);
        }
    }
    (pos, neg)
}

fn self_train_node<L: BaseLearner>(
    learner: &L,
    x_all: &Matrix,
    n_labeled: usize,
    unlabeled: &Matrix,
    l: NodeId,
    base: &Selection,
    cfg: &SelfTrainConfig,
) -> Result<(L::Model, Option<NodeNotice>, NodeTrace)> {
    let (mut model, mut notice) = fit_node(learner, x_all, l, base)?;
    let mut trace = NodeTrace::default();
    // A constant node would only adopt its own class and stay constant.
    if unlabeled.rows() == 0 || notice.is_some() {
        return Ok((model, notice, trace));
    }
    let mut last: Option<(Vec<usize>, Vec<usize>)> = None;
    while trace.rounds < cfg.max_rounds {
        let probs = model.predict_proba(unlabeled)?;
        let adopted = adoptions(&probs, cfg.confidence);
        if adopted.0.is_empty() && adopted.1.is_empty() {
            break;
        }
        if last.as_ref() == Some(&adopted) {
            break;
        }
        let mut sel = base.clone();
        sel.positives.extend(adopted.0.iter().map(|j| n_labeled + j));
        sel.negatives.extend(adopted.1.iter().map(|j| n_labeled + j));
        (model, notice) = fit_node(learner, x_all, l, &sel)?;
        trace.rounds += 1;
        trace.adopted_positive = adopted.0.len();
        trace.adopted_negative = adopted.1.len();
        last = Some(adopted);
    }
    Ok((model, notice, trace))
}

/// Self-trains one classifier per node; labels are handled independently.
pub fn fit_self_training<L: BaseLearner>(
    method: SelfTrainMethod,
    labeled: &Dataset,
    unlabeled: &Matrix,
    cfg: &SelfTrainConfig,
    learner: &L,
) -> Result<SelfTrainedModel<L::Model>> {
    cfg.validate()?;
    if labeled.is_empty() {
        return Err(Error::ShapeMismatch("no labeled rows".into()));
    }
    if unlabeled.rows() > 0 && unlabeled.cols() != labeled.n_features() {
        return Err(Error::WidthMismatch {
            expected: labeled.n_features(),
            actual: unlabeled.cols(),
        });
    }
    let h = Arc::clone(&labeled.hierarchy);
    let x_all = labeled.features.vstack(unlabeled)?;
    let policy = SELF_TRAIN_POLICY;
    let fitted = par::try_map_range(h.len(), |l| {
        let base = select_examples(policy, &h, &labeled.labels, l, cfg.seed)?;
        self_train_node(learner, &x_all, labeled.len(), unlabeled, l, &base, cfg)
    })?;
    let mut node_models = Vec::with_capacity(h.len());
    let mut notices = Vec::new();
    let mut traces = Vec::with_capacity(h.len());
    for (l, (m, notice, trace)) in fitted.into_iter().enumerate() {
        node_models.push(m);
        traces.push(trace);
        if let Some(n) = notice {
            notices.push((l, n));
        }
    }
    Ok(SelfTrainedModel {
        method,
        lcn: LcnModel {
            hierarchy: h,
            policy,
            node_models,
            notices,
        },
        traces,
    })
}

pub fn fit_stml<L: BaseLearner>(
    labeled: &Dataset,
    unlabeled: &Matrix,
    cfg: &SelfTrainConfig,
    learner: &L,
) -> Result<SelfTrainedModel<L::Model>> {
    fit_self_training(SelfTrainMethod::Stml, labeled, unlabeled, cfg, learner)
}

pub fn fit_sthc<L: BaseLearner>(
    labeled: &Dataset,
    unlabeled: &Matrix,
    cfg: &SelfTrainConfig,
    learner: &L,
) -> Result<SelfTrainedModel<L::Model>> {
    fit_self_training(SelfTrainMethod::Sthc, labeled, unlabeled, cfg, learner)
}

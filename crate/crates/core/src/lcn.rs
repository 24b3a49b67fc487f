//! Local classifier per node: one binary classifier per non-root label,
//! trained on policy-selected rows, with top-down probability capping.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::base_learner::{BaseLearner, BinaryClassifier};
use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, LabelVector, NodeId, VIRTUAL_ROOT};
use crate::matrix::Matrix;
use crate::{par, seed};

/// Rule choosing positive and negative training rows for a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    LessInclusive,
    Inclusive,
    Siblings,
    Exclusive,
    BalancedBottomUp,
}

impl Policy {
    pub const ALL: [Policy; 5] = [
        Policy::LessInclusive,
        Policy::Inclusive,
        Policy::Siblings,
        Policy::Exclusive,
        Policy::BalancedBottomUp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::LessInclusive => "less_inclusive",
            Policy::Inclusive => "inclusive",
            Policy::Siblings => "siblings",
            Policy::Exclusive => "exclusive",
            Policy::BalancedBottomUp => "balanced_bottom_up",
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.as_str() == s || p.as_str().replace('_', "-") == s)
            .ok_or_else(|| Error::Config(format!("unknown policy `{s}`")))
    }
}

/// Row ids chosen for one node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Selection {
    pub positives: Vec<usize>,
    pub negatives: Vec<usize>,
}

/// Selects training rows for node `l` under `policy`.
///
/// `sample_seed` only matters for [`Policy::BalancedBottomUp`], which shuffles
/// each ring of candidate negatives before drawing from it.
pub fn select_examples(
    policy: Policy,
    h: &Hierarchy,
    labels: &[LabelVector],
    l: NodeId,
    sample_seed: u64,
) -> Result<Selection> {
    if l >= h.len() {
        return Err(Error::Index(l));
    }
    let n = labels.len();
    let has = |i: usize, node: NodeId| labels[i].get(node);
    let any_of = |i: usize, set: &[NodeId]| set.iter().any(|&s| labels[i].get(s));

    let sel = match policy {
        Policy::LessInclusive => {
            let (positives, negatives) = (0..n).partition(|&i| has(i, l));
            Selection {
                positives,
                negatives,
            }
        }
        Policy::Inclusive => {
            let anc = h.ancestors(l);
            Selection {
                positives: (0..n).filter(|&i| has(i, l)).collect(),
                negatives: (0..n).filter(|&i| !has(i, l) && !any_of(i, anc)).collect(),
            }
        }
        Policy::Siblings => {
            let sib = h.siblings(l)?;
            Selection {
                positives: (0..n).filter(|&i| has(i, l)).collect(),
                negatives: (0..n).filter(|&i| !has(i, l) && any_of(i, &sib)).collect(),
            }
        }
        Policy::Exclusive => {
            let sib = h.siblings(l)?;
            let mut positives = Vec::new();
            let mut negatives = Vec::new();
            for (i, y) in labels.iter().enumerate() {
                let spec = h.most_specific(y);
                if spec.contains(&l) {
                    positives.push(i);
                } else if !y.get(l) && spec.iter().any(|s| sib.contains(s)) {
                    negatives.push(i);
                }
            }
            Selection {
                positives,
                negatives,
            }
        }
        Policy::BalancedBottomUp => {
            let positives: Vec<usize> = (0..n).filter(|&i| has(i, l)).collect();
            let mut negatives = Vec::new();
            let mut taken = vec![false; n];
            let mut rng = seed::stream(sample_seed, seed::POLICY, l as u64);
            for ring in negative_rings(h, l)? {
                if negatives.len() >= positives.len() {
                    break;
                }
                let mut cand: Vec<usize> = (0..n)
                    .filter(|&i| !taken[i] && !has(i, l) && any_of(i, &ring))
                    .collect();
                cand.shuffle(&mut rng);
                for i in cand {
                    if negatives.len() >= positives.len() {
                        break;
                    }
                    taken[i] = true;
                    negatives.push(i);
                }
            }
            negatives.sort_unstable();
            Selection {
                positives,
                negatives,
            }
        }
    };
    Ok(sel)
}

/// Node sets from which balanced bottom-up draws negatives, nearest first:
/// siblings of `l`, then siblings of its parents, then of its grandparents...
/// Nodes already seen in an earlier ring, `l` itself and ancestors of `l` are skipped.
pub fn negative_rings(h: &Hierarchy, l: NodeId) -> Result<Vec<Vec<NodeId>>> {
    let mut seen: BTreeSet<NodeId> = h.ancestors(l).iter().copied().collect();
    seen.insert(l);
    let mut rings = Vec::new();
    let mut levels = vec![vec![l]];
    levels.extend(h.ancestor_levels(l));
    for level in levels {
        let mut ring = BTreeSet::new();
        for a in level {
            for s in h.siblings(a)? {
                if !seen.contains(&s) {
                    ring.insert(s);
                }
            }
        }
        seen.extend(ring.iter().copied());
        rings.push(ring.into_iter().collect());
    }
    Ok(rings)
}

/// Why a node got a constant classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeNotice {
    NoPositives,
    NoNegatives,
}

/// Trained per-node classifiers over a hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct LcnModel<M> {
    pub hierarchy: Arc<Hierarchy>,
    pub policy: Policy,
    pub node_models: Vec<M>,
    pub notices: Vec<(NodeId, NodeNotice)>,
}

/// Per-node fit on an explicit selection; constant models for empty sides.
pub(crate) fn fit_node<L: BaseLearner>(
    learner: &L,
    x: &Matrix,
    l: NodeId,
    sel: &Selection,
) -> Result<(L::Model, Option<NodeNotice>)> {
    if sel.positives.is_empty() {
        return Ok((learner.constant(x.cols(), 0.0), Some(NodeNotice::NoPositives)));
    }
    if sel.negatives.is_empty() {
        return Ok((learner.constant(x.cols(), 1.0), Some(NodeNotice::NoNegatives)));
    }
    let mut rows = sel.positives.clone();
    rows.extend_from_slice(&sel.negatives);
    let mut targets = vec![true; sel.positives.len()];
    targets.resize(rows.len(), false);
    let (model, _) = learner.fit(x, &rows, &targets, l as u64)?;
    Ok((model, None))
}

/// Trains one classifier per node on rows chosen by `policy`. Nodes are
/// fitted independently; `policy_seed` drives balanced sampling.
pub fn fit_lcn<L: BaseLearner>(
    h: &Arc<Hierarchy>,
    x: &Matrix,
    labels: &[LabelVector],
    policy: Policy,
    learner: &L,
    policy_seed: u64,
) -> Result<LcnModel<L::Model>> {
    if x.rows() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} feature rows vs {} label rows",
            x.rows(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::ShapeMismatch("no training rows".into()));
    }
    let fitted = par::try_map_range(h.len(), |l| {
        let sel = select_examples(policy, h, labels, l, policy_seed)?;
        fit_node(learner, x, l, &sel)
    })?;
    let mut node_models = Vec::with_capacity(h.len());
    let mut notices = Vec::new();
    for (l, (m, notice)) in fitted.into_iter().enumerate() {
        node_models.push(m);
        if let Some(n) = notice {
            notices.push((l, n));
        }
    }
    Ok(LcnModel {
        hierarchy: Arc::clone(h),
        policy,
        node_models,
        notices,
    })
}

/// Column `l` holds `models[l]`'s probabilities; no hierarchy correction.
pub fn predict_columns<M: BinaryClassifier>(models: &[M], x: &Matrix) -> Result<Matrix> {
    if let Some(m) = models.first() {
        if m.n_features() != x.cols() {
            return Err(Error::WidthMismatch {
                expected: m.n_features(),
                actual: x.cols(),
            });
        }
    }
    let cols = models.len();
    let rows = par::map_range(x.rows(), |i| {
        let r = x.row(i);
        models.iter().map(|m| m.proba_one(r)).collect::<Vec<f64>>()
    });
    Matrix::from_rows_with_width(&rows, cols)
}

impl<M: BinaryClassifier> LcnModel<M> {
    pub fn predict_raw(&self, x: &Matrix) -> Result<Matrix> {
        predict_columns(&self.node_models, x)
    }

    /// Raw probabilities capped by parents; rows satisfy the hierarchical
    /// probability constraint.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        post_process(&self.hierarchy, &self.predict_raw(x)?)
    }
}

/// Caps every node at the minimum of its own and its (capped) parents'
/// probabilities, in topological order. The virtual root counts as 1.
pub fn post_process(h: &Hierarchy, raw: &Matrix) -> Result<Matrix> {
    post_process_in_order(h, raw, h.topo_order())
}

/// [`post_process`] with a caller-supplied topological order.
pub fn post_process_in_order(h: &Hierarchy, raw: &Matrix, order: &[NodeId]) -> Result<Matrix> {
    if raw.cols() != h.len() {
        return Err(Error::WidthMismatch {
            expected: h.len(),
            actual: raw.cols(),
        });
    }
    if !h.is_valid_topo_order(order) {
        return Err(Error::Config("order is not a topological order".into()));
    }
    let mut out = raw.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        for (j, &v) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Range { row: i, col: j, value: v });
            }
        }
        for &l in order {
            let mut v = row[l];
            for &p in h.parents(l) {
                if p != VIRTUAL_ROOT && row[p] < v {
                    v = row[p];
                }
            }
            row[l] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_learner::{RandomForest, RandomForestConfig};
    use crate::hierarchy::{build_hierarchy, HierarchyBuilder};
    use proptest::prelude::*;

    fn diamond() -> Arc<Hierarchy> {
        Arc::new(build_hierarchy(&[("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")], &["A"]).unwrap())
    }

    fn rows(h: &Hierarchy, sets: &[&[&str]]) -> Vec<LabelVector> {
        sets.iter()
            .map(|s| LabelVector::from_ids(h.len(), s.iter().map(|n| h.id(n).unwrap())))
            .collect()
    }

    // rows r1..r4 = {A}, {A,B}, {A,B,C,D}, {A,C}
    fn example() -> (Arc<Hierarchy>, Vec<LabelVector>) {
        let h = diamond();
        let y = rows(&h, &[&["A"], &["A", "B"], &["A", "B", "C", "D"], &["A", "C"]]);
        (h, y)
    }

    #[test]
    fn less_inclusive_enumeration() {
        let (h, y) = example();
        let s = select_examples(Policy::LessInclusive, &h, &y, 1, 0).unwrap();
        assert_eq!(s.positives, vec![1, 2]);
        assert_eq!(s.negatives, vec![0, 3]);
    }

    #[test]
    fn siblings_enumeration() {
        let (h, y) = example();
        let s = select_examples(Policy::Siblings, &h, &y, 1, 0).unwrap();
        assert_eq!(s.negatives, vec![3]);
    }

    #[test]
    fn inclusive_and_exclusive_enumeration() {
        let (h, y) = example();
        // Every row carries A, an ancestor of B, so inclusive has no negatives for B.
        let s = select_examples(Policy::Inclusive, &h, &y, 1, 0).unwrap();
        assert_eq!(s.positives, vec![1, 2]);
        assert!(s.negatives.is_empty());
        // Most specific sets: {A}, {B}, {D}, {C}.
        let s = select_examples(Policy::Exclusive, &h, &y, 1, 0).unwrap();
        assert_eq!(s.positives, vec![1]);
        assert_eq!(s.negatives, vec![3]);
        let s = select_examples(Policy::Exclusive, &h, &y, 0, 0).unwrap();
        assert_eq!(s.positives, vec![0]);
        assert!(s.negatives.is_empty());
    }

    #[test]
    fn balanced_caps_at_positive_count() {
        let h = Arc::new(build_hierarchy(&[("R", "P"), ("R", "S")], &["R"]).unwrap());
        let mut y = rows(&h, &[&["P"] as &[&str]; 5]);
        y.extend(rows(&h, &vec![&["S"] as &[&str]; 20]));
        let p = h.id("P").unwrap();
        let s = select_examples(Policy::BalancedBottomUp, &h, &y, p, 3).unwrap();
        assert_eq!(s.positives.len(), 5);
        assert_eq!(s.negatives.len(), 5);
        assert!(s.negatives.iter().all(|&i| i >= 5));
        let again = select_examples(Policy::BalancedBottomUp, &h, &y, p, 3).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn balanced_walks_outward_to_uncles() {
        // R → {P, U}, P → {X, S}; X has 3 positives, S only 1, U 5.
        let h = Arc::new(build_hierarchy(&[("R", "P"), ("R", "U"), ("P", "X"), ("P", "S")], &["R"]).unwrap());
        let mut sets: Vec<&[&str]> = vec![&["X"]; 3];
        sets.push(&["S"]);
        sets.extend(vec![&["U"] as &[&str]; 5]);
        let y = rows(&h, &sets);
        let x_id = h.id("X").unwrap();
        let rings = negative_rings(&h, x_id).unwrap();
        assert_eq!(rings[0], vec![h.id("S").unwrap()]);
        assert_eq!(rings[1], vec![h.id("U").unwrap()]);
        let s = select_examples(Policy::BalancedBottomUp, &h, &y, x_id, 0).unwrap();
        assert_eq!(s.negatives.len(), 3);
        assert!(s.negatives.contains(&3));
    }

    #[test]
    fn post_process_examples() {
        let chain = build_hierarchy(&[("A", "B")], &["A"]).unwrap();
        let raw = Matrix::from_rows(&[[0.3, 0.7]]).unwrap();
        assert_eq!(post_process(&chain, &raw).unwrap().row(0), &[0.3, 0.3]);

        let h = diamond();
        let raw = Matrix::from_rows(&[[0.9, 0.4, 0.8, 0.7]]).unwrap();
        let out = post_process(&h, &raw).unwrap();
        assert_eq!(out.row(0), &[0.9, 0.4, 0.8, 0.4]);
        assert_eq!(post_process(&h, &out).unwrap(), out);

        let bad = Matrix::from_rows(&[[1.2, 0.4, 0.8, 0.7]]).unwrap();
        assert!(matches!(post_process(&h, &bad), Err(Error::Range { .. })));
    }

    fn blob_data() -> (Arc<Hierarchy>, Matrix, Vec<LabelVector>) {
        let (h, _) = example();
        let sets: Vec<&[&str]> = vec![&["A"], &["A", "B"], &["A", "B", "C", "D"], &["A", "C"]];
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (c, s) in sets.iter().enumerate() {
            for k in 0..6 {
                x.push([c as f64 * 3.0 + k as f64 * 0.1, (k % 2) as f64]);
                y.extend(rows(&h, &[s]));
            }
        }
        (h, Matrix::from_rows(&x).unwrap(), y)
    }

    #[test]
    fn fit_handles_degenerate_nodes_and_is_deterministic() {
        let (h, x, y) = blob_data();
        let cfg = RandomForestConfig {
            n_trees: 10,
            ..Default::default()
        };
        let m = fit_lcn(&h, &x, &y, Policy::BalancedBottomUp, &cfg, 1).unwrap();
        // Every row carries A.
        assert_eq!(m.node_models[0].constant_value(), Some(1.0));
        assert!(m.notices.contains(&(0, NodeNotice::NoNegatives)));
        let m2 = fit_lcn(&h, &x, &y, Policy::BalancedBottomUp, &cfg, 1).unwrap();
        assert_eq!(m.predict(&x).unwrap(), m2.predict(&x).unwrap());

        // No positives at D.
        let y2: Vec<LabelVector> = y
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.set(3, false);
                r
            })
            .collect();
        let m3 = fit_lcn(&h, &x, &y2, Policy::LessInclusive, &cfg, 1).unwrap();
        assert_eq!(m3.node_models[3].constant_value(), Some(0.0));
        let raw = m3.predict_raw(&x).unwrap();
        assert!(raw.column(3).iter().all(|v| *v == 0.0));
        assert_eq!(raw.column(0), vec![1.0; x.rows()]);
        assert_eq!(m3.predict_raw(&Matrix::zeros(0, 2)).unwrap().rows(), 0);
        assert!(m3.predict_raw(&Matrix::zeros(1, 3)).is_err());
    }

    fn random_hierarchy(n: usize, edges: &[(usize, usize)]) -> Hierarchy {
        let mut b = HierarchyBuilder::new();
        for i in 0..n {
            b.node(&format!("n{i}"));
        }
        for &(a, c) in edges {
            let (a, c) = (a % n, c % n);
            let (lo, hi) = (a.min(c), a.max(c));
            if lo != hi {
                b.edge(&format!("n{lo}"), &format!("n{hi}"));
            }
        }
        b.build().unwrap()
    }

    proptest! {
        #[test]
        fn post_process_satisfies_constraint(
            n in 1usize..30,
            edges in prop::collection::vec((0usize..30, 0usize..30), 0..60),
            vals in prop::collection::vec(0.0f64..=1.0, 90),
            t in 0.01f64..=1.0,
        ) {
            let h = random_hierarchy(n, &edges);
            let raw = Matrix::new(3, n, vals[..3 * n].to_vec()).unwrap();
            let out = post_process(&h, &raw).unwrap();
            for i in 0..3 {
                for l in 0..n {
                    for p in h.real_parents(l) {
                        prop_assert!(out.get(i, l) <= out.get(i, p));
                    }
                }
                // Thresholding gives a consistent label vector.
                let y = LabelVector(out.row(i).iter().map(|v| *v >= t).collect());
                prop_assert!(h.is_consistent(&y).unwrap());
            }
            prop_assert_eq!(post_process(&h, &out).unwrap(), out.clone());
            // Reverse-id Kahn order is another valid topological order.
            let mut alt = Vec::new();
            let mut indeg: Vec<usize> = (0..n).map(|l| h.real_parents(l).count()).collect();
            let mut ready: Vec<usize> = (0..n).filter(|&l| indeg[l] == 0).collect();
            while let Some(v) = ready.pop() {
                alt.push(v);
                for &c in h.children(v) {
                    indeg[c] -= 1;
                    if indeg[c] == 0 { ready.push(c); }
                }
            }
            prop_assert_eq!(post_process_in_order(&h, &raw, &alt).unwrap(), out);
        }

        #[test]
        fn balanced_never_exceeds_positives(
            bits in prop::collection::vec(prop::collection::vec(any::<bool>(), 6), 1..40),
            seed_value in any::<u64>(),
        ) {
            let h = crate::dataset::artificial_hierarchy();
            let y: Vec<LabelVector> = bits.into_iter()
                .map(|b| h.ancestor_closure(&LabelVector(b)).unwrap())
                .collect();
            for l in 0..h.len() {
                let s = select_examples(Policy::BalancedBottomUp, &h, &y, l, seed_value).unwrap();
                prop_assert!(s.negatives.len() <= s.positives.len());
                prop_assert!(s.negatives.iter().all(|&i| !y[i].get(l)));
            }
        }
    }

    #[test]
    fn forest_model_type_is_usable() {
        let _: Option<LcnModel<RandomForest>> = None;
    }
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{GrowParams, Tree};
use super::{BaseLearner, BinaryClassifier, DegenerateTarget};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::{par, seed};

pub const FOREST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    Sqrt,
    Log2,
    All,
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        let m = match self {
            MaxFeatures::Sqrt => (d as f64).sqrt() as usize,
            MaxFeatures::Log2 => (d as f64).log2() as usize,
            MaxFeatures::All => d,
        };
        m.clamp(1, d.max(1))
    }
}

impl std::str::FromStr for MaxFeatures {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(MaxFeatures::Sqrt),
            "log2" => Ok(MaxFeatures::Log2),
            "all" => Ok(MaxFeatures::All),
            _ => Err(Error::Config(format!("unknown max_features rule `{s}`"))),
        }
    }
}

impl std::fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MaxFeatures::Sqrt => "sqrt",
            MaxFeatures::Log2 => "log2",
            MaxFeatures::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestConfig {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for RandomForestConfig {
    fn default() -> Self {
        RandomForestConfig {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            min_samples_split: 2,
            max_depth: None,
            seed: 0,
        }
    }
}

impl RandomForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        Ok(())
    }
}

/// Bagged ensemble of Gini trees; probability is the mean of leaf positive fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    format_version: u32,
    n_features: usize,
    trees: Vec<Tree>,
}

impl RandomForest {
    pub fn from_trees(n_features: usize, trees: Vec<Tree>) -> Self {
        RandomForest {
            format_version: FOREST_FORMAT_VERSION,
            n_features,
            trees,
        }
    }

    pub fn constant(n_features: usize, p: f64) -> Self {
        Self::from_trees(n_features, vec![Tree::leaf(p)])
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// `Some(p)` when every tree is a single leaf with the same value.
    pub fn constant_value(&self) -> Option<f64> {
        let mut v = None;
        for t in &self.trees {
            match (t.nodes(), v) {
                ([super::TreeNode::Leaf { value }], None) => v = Some(*value),
                ([super::TreeNode::Leaf { value }], Some(p)) if *value == p => {}
                _ => return None,
            }
        }
        v
    }

    /// Fits with `config.seed` on all rows of `x`.
    pub fn fit(
        config: &RandomForestConfig,
        x: &Matrix,
        targets: &[bool],
    ) -> Result<(Self, Option<DegenerateTarget>)> {
        let rows: Vec<usize> = (0..x.rows()).collect();
        config.fit(x, &rows, targets, 0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: RandomForest = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        if f.format_version != FOREST_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "forest format version {} not supported",
                f.format_version
            )));
        }
        Ok(f)
    }
}

impl BinaryClassifier for RandomForest {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn proba_one(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        (sum / self.trees.len() as f64).clamp(0.0, 1.0)
    }
}

impl BaseLearner for RandomForestConfig {
    type Model = RandomForest;

    fn fit(
        &self,
        x: &Matrix,
        rows: &[usize],
        targets: &[bool],
        stream: u64,
    ) -> Result<(RandomForest, Option<DegenerateTarget>)> {
        self.validate()?;
        if rows.len() != targets.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                actual: targets.len(),
            });
        }
        if rows.is_empty() {
            return Err(Error::Config("cannot fit a forest on zero rows".into()));
        }
        let sub = x.select_rows(rows);
        if let Some((r, c)) = sub.first_missing() {
            return Err(Error::MissingValue { row: rows[r], col: c });
        }
        let pos = targets.iter().filter(|t| **t).count();
        if pos == 0 || pos == targets.len() {
            let positive = pos > 0;
            let p = if positive { 1.0 } else { 0.0 };
            return Ok((
                RandomForest::constant(x.cols(), p),
                Some(DegenerateTarget { positive }),
            ));
        }
        let params = GrowParams {
            mtry: self.max_features.resolve(x.cols()),
            min_samples_split: self.min_samples_split.max(2),
            max_depth: self.max_depth,
        };
        let forest_seed = seed::derive(self.seed, seed::FOREST, stream);
        let n = rows.len();
        let target = |i: usize| targets[i];
        let trees = par::map_range(self.n_trees, |t| {
            let mut rng = seed::stream(forest_seed, seed::TREE, t as u64);
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            Tree::grow(&sub, bootstrap, &target, &params, &mut rng)
        });
        Ok((RandomForest::from_trees(x.cols(), trees), None))
    }

    fn constant(&self, n_features: usize, p: f64) -> RandomForest {
        RandomForest::constant(n_features, p)
    }

    fn describe(&self) -> Vec<(String, String)> {
        vec![
            ("forest.n_trees".into(), self.n_trees.to_string()),
            ("forest.max_features".into(), self.max_features.to_string()),
            ("forest.min_samples_split".into(), self.min_samples_split.to_string()),
            (
                "forest.max_depth".into(),
                self.max_depth.map_or("none".into(), |d| d.to_string()),
            ),
            ("forest.seed".into(), self.seed.to_string()),
        ]
    }
}

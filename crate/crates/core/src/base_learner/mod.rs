//! Per-node binary probabilistic classifiers.
//!
//! [`BaseLearner`] is the fitting capability the hierarchical models are
//! generic over; [`RandomForestConfig`] is the default implementation.

use std::fmt::Debug;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

mod forest;
mod tree;

pub use forest::{MaxFeatures, RandomForest, RandomForestConfig, FOREST_FORMAT_VERSION};
pub use tree::{Tree, TreeNode};

/// A fitted model mapping a feature vector to P(positive).
pub trait BinaryClassifier: Send + Sync {
    fn n_features(&self) -> usize;

    /// Probability for one row; the caller guarantees the width.
    fn proba_one(&self, x: &[f64]) -> f64;

    fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features() {
            return Err(Error::WidthMismatch {
                expected: self.n_features(),
                actual: x.cols(),
            });
        }
        Ok(x.iter_rows().map(|r| self.proba_one(r)).collect())
    }
}

/// Raised (not as an error) when the targets contain only one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegenerateTarget {
    pub positive: bool,
}

/// Something that can fit a [`BinaryClassifier`].
pub trait BaseLearner: Send + Sync {
    type Model: BinaryClassifier + Clone + Debug + PartialEq + Serialize + DeserializeOwned;

    /// Fits on `x[rows[i]]` with target `targets[i]`. `stream` selects an
    /// independent random stream so that separate fits (e.g. one per node)
    /// do not share randomness.
    fn fit(
        &self,
        x: &Matrix,
        rows: &[usize],
        targets: &[bool],
        stream: u64,
    ) -> Result<(Self::Model, Option<DegenerateTarget>)>;

    /// Model that always answers `p`.
    fn constant(&self, n_features: usize, p: f64) -> Self::Model;

    /// Key/value description for run manifests.
    fn describe(&self) -> Vec<(String, String)>;
}

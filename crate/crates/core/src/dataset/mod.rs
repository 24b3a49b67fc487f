//! Hierarchical multi-label datasets: loading, preprocessing, splitting and
//! the synthetic two-dimensional benchmark.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, LabelVector};
use crate::matrix::Matrix;

mod arff;
mod impute;
mod native;
mod prune;
mod split;
mod synth;

pub use arff::{load_clus_arff, parse_clus_arff};
pub use impute::{impute_missing, Imputation, Standardizer};
pub use native::{
    format_features, format_labels, load_features, load_native, load_part, parse_features, parse_labels, write_native,
    write_part, LoadReport, PartPaths,
};
pub use prune::{prune_rare_nodes, remove_nodes, Pruned};
pub use split::{stratified_labeled_split, SplitMasks, SplitSpec, PROTOCOL_FRACTIONS};
pub use synth::{artificial_hierarchy, generate_artificial, ArtificialData, ARTIFICIAL_SIZES};

/// Feature matrix plus ancestor-closed label rows over a shared hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<LabelVector>,
    pub hierarchy: Arc<Hierarchy>,
    pub row_names: Option<Vec<String>>,
}

impl Dataset {
    /// Validates shapes and the hierarchical constraint on every row.
    pub fn new(
        features: Matrix,
        labels: Vec<LabelVector>,
        hierarchy: Arc<Hierarchy>,
        row_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature rows but {} label rows",
                features.rows(),
                labels.len()
            )));
        }
        if let Some(names) = &row_names {
            if names.len() != labels.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} row names for {} rows",
                    names.len(),
                    labels.len()
                )));
            }
        }
        for (i, y) in labels.iter().enumerate() {
            if !hierarchy.is_consistent(y)? {
                return Err(Error::ShapeMismatch(format!(
                    "label row {i} violates the hierarchical constraint"
                )));
            }
        }
        Ok(Dataset {
            features,
            labels,
            hierarchy,
            row_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn n_labels(&self) -> usize {
        self.hierarchy.len()
    }

    /// Rows `idx` as a new dataset sharing the hierarchy.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            hierarchy: Arc::clone(&self.hierarchy),
            row_names: self
                .row_names
                .as_ref()
                .map(|n| idx.iter().map(|&i| n[i].clone()).collect()),
        }
    }

    /// Positive count per label.
    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_labels()];
        for y in &self.labels {
            for l in y.ones() {
                counts[l] += 1;
            }
        }
        counts
    }

    pub fn with_features(&self, features: Matrix) -> Result<Dataset> {
        Dataset::new(
            features,
            self.labels.clone(),
            Arc::clone(&self.hierarchy),
            self.row_names.clone(),
        )
    }

    /// Problem class along the taxonomy axes (structure, paths, depth).
    pub fn problem_class(&self) -> ProblemClass {
        let h = &self.hierarchy;
        let multi_path = self.labels.iter().any(|y| h.most_specific(y).len() > 1);
        let partial_depth = self
            .labels
            .iter()
            .any(|y| h.most_specific(y).iter().any(|&l| !h.children(l).is_empty()));
        ProblemClass {
            dag: h.is_dag(),
            multi_path,
            partial_depth,
        }
    }
}

/// Taxonomy of a hierarchical problem: tree/DAG, single/multiple paths,
/// full/partial depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemClass {
    pub dag: bool,
    pub multi_path: bool,
    pub partial_depth: bool,
}

impl std::fmt::Display for ProblemClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "<{}, {}, {}>",
            if self.dag { "DAG" } else { "T" },
            if self.multi_path { "MPL" } else { "SPL" },
            if self.partial_depth { "PD" } else { "FD" }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::build_hierarchy;

    #[test]
    fn rejects_inconsistent_rows() {
        let h = Arc::new(build_hierarchy(&[("A", "B")], &["A"]).unwrap());
        let x = Matrix::from_rows(&[[0.0]]).unwrap();
        let bad = vec![LabelVector(vec![false, true])];
        assert!(Dataset::new(x.clone(), bad, Arc::clone(&h), None).is_err());
        let ok = vec![LabelVector(vec![true, true])];
        let ds = Dataset::new(x, ok, h, None).unwrap();
        assert_eq!(ds.label_counts(), vec![1, 1]);
        assert_eq!(ds.problem_class().to_string(), "<T, SPL, FD>");
    }
}

//! Two-dimensional synthetic benchmark over a six-node DAG.
//!
//! Hierarchy (under the implicit root): `0→1, 0→2, 1→3, 1→4, 2→4, 2→5`;
//! node 4 has two parents. Each label configuration below is an isotropic
//! Gaussian cluster centred on a grid with spacing 3.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use super::Dataset;
use crate::hierarchy::{build_hierarchy, Hierarchy, LabelVector};
use crate::matrix::Matrix;
use crate::seed;

/// Instances in the labeled, unlabeled and test sets.
pub const ARTIFICIAL_SIZES: (usize, usize, usize) = (12, 330, 300);
const VALIDATION_SIZE: usize = 96;
const GRID_SPACING: f64 = 3.0;
const SIGMA: f64 = 0.8;

/// (label set, grid cell) per cluster. Configurations 2 and 5 span several paths.
const CLUSTERS: [(&[usize], (f64, f64)); 6] = [
    (&[0, 1, 3], (0.0, 0.0)),
    (&[0, 1], (1.0, 0.0)),
    (&[0, 1, 2, 4], (1.0, 1.0)),
    (&[0, 2], (2.0, 1.0)),
    (&[0, 2, 5], (2.0, 0.0)),
    (&[0, 1, 2, 3, 5], (0.0, 1.0)),
];

pub fn artificial_hierarchy() -> Hierarchy {
    build_hierarchy(
        &[("0", "1"), ("0", "2"), ("1", "3"), ("1", "4"), ("2", "4"), ("2", "5")],
        &["0"],
    )
    .expect("static hierarchy is acyclic")
}

/// Generated splits. `unlabeled` keeps its ground truth for diagnostics only.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtificialData {
    pub labeled: Dataset,
    pub unlabeled: Dataset,
    pub test: Dataset,
    /// Extra held-out set for hyperparameter selection.
    pub validation: Dataset,
}

fn draw(h: &Arc<Hierarchy>, n: usize, seed_value: u64, part: u64) -> Dataset {
    let mut rng = seed::stream(seed_value, seed::GENERATOR, part);
    let noise = Normal::new(0.0, SIGMA).expect("positive sigma");
    let per_cluster = n / CLUSTERS.len();
    let mut rows = Vec::with_capacity(n);
    for (c, (labels, (gx, gy))) in CLUSTERS.iter().enumerate() {
        let count = per_cluster + usize::from(c < n % CLUSTERS.len());
        for _ in 0..count {
            let x = gx * GRID_SPACING + noise.sample(&mut rng);
            let y = gy * GRID_SPACING + noise.sample(&mut rng);
            rows.push(([x, y], LabelVector::from_ids(h.len(), labels.iter().copied())));
        }
    }
    rows.shuffle(&mut rng);
    let features = Matrix::from_rows(&rows.iter().map(|(x, _)| *x).collect::<Vec<_>>())
        .expect("fixed width");
    let labels = rows.into_iter().map(|(_, y)| y).collect();
    Dataset::new(features, labels, Arc::clone(h), None).expect("cluster label sets are closed")
}

pub fn generate_artificial(seed_value: u64) -> ArtificialData {
    let h = Arc::new(artificial_hierarchy());
    let (nl, nu, nt) = ARTIFICIAL_SIZES;
    ArtificialData {
        labeled: draw(&h, nl, seed_value, 0),
        unlabeled: draw(&h, nu, seed_value, 1),
        test: draw(&h, nt, seed_value, 2),
        validation: draw(&h, VALIDATION_SIZE, seed_value, 3),
    }
}

use rand::seq::SliceRandom;
use rand::Rng;

use super::Dataset;
use crate::error::{Error, Result};
use crate::seed;

/// Labeled fractions of the experimental protocol.
pub const PROTOCOL_FRACTIONS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub labeled_fraction: f64,
    pub repetitions: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.labeled_fraction > 0.0 && self.labeled_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "labeled fraction {} not in (0, 1]",
                self.labeled_fraction
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Complementary row masks of one labeled/unlabeled split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMasks {
    pub labeled: Vec<bool>,
    pub unlabeled: Vec<bool>,
}

impl SplitMasks {
    pub fn labeled_rows(&self) -> Vec<usize> {
        (0..self.labeled.len()).filter(|&i| self.labeled[i]).collect()
    }

    pub fn unlabeled_rows(&self) -> Vec<usize> {
        (0..self.unlabeled.len()).filter(|&i| self.unlabeled[i]).collect()
    }
}

/// Splits `ds` into labeled and unlabeled parts `spec.repetitions` times with
/// iterative stratification: labels are served rarest first, each row going to
/// the part that still most wants that label.
pub fn stratified_labeled_split(ds: &Dataset, spec: &SplitSpec) -> Result<Vec<SplitMasks>> {
    spec.validate()?;
    Ok((0..spec.repetitions)
        .map(|r| split_once(ds, spec.labeled_fraction, seed::derive(spec.seed, seed::SPLIT, r as u64)))
        .collect())
}

fn split_once(ds: &Dataset, fraction: f64, seed_value: u64) -> SplitMasks {
    let n = ds.len();
    if fraction >= 1.0 {
        return SplitMasks {
            labeled: vec![true; n],
            unlabeled: vec![false; n],
        };
    }
    let mut rng = seed::stream(seed_value, seed::SPLIT, 0);
    let ratios = [fraction, 1.0 - fraction];
    let n_labels = ds.n_labels();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let counts = ds.label_counts();
    let mut desired: Vec<[f64; 2]> = counts
        .iter()
        .map(|&c| [ratios[0] * c as f64, ratios[1] * c as f64])
        .collect();
    let mut desired_total = [ratios[0] * n as f64, ratios[1] * n as f64];
    let mut remaining_per_label = counts.clone();
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    let mut left = n;

    let assign = |row: usize,
                      fold: usize,
                      desired: &mut Vec<[f64; 2]>,
                      desired_total: &mut [f64; 2],
                      remaining: &mut Vec<usize>,
                      assigned: &mut Vec<Option<usize>>| {
        assigned[row] = Some(fold);
        desired_total[fold] -= 1.0;
        for l in ds.labels[row].ones() {
            desired[l][fold] -= 1.0;
            remaining[l] -= 1;
        }
    };

    while left > 0 {
        let target = (0..n_labels)
            .filter(|&l| remaining_per_label[l] > 0)
            .min_by_key(|&l| (remaining_per_label[l], l));
        match target {
            Some(l) => {
                let rows: Vec<usize> = order
                    .iter()
                    .copied()
                    .filter(|&i| assigned[i].is_none() && ds.labels[i].get(l))
                    .collect();
                for row in rows {
                    let d = desired[l];
                    let fold = if d[0] != d[1] {
                        usize::from(d[1] > d[0])
                    } else if desired_total[0] != desired_total[1] {
                        usize::from(desired_total[1] > desired_total[0])
                    } else {
                        usize::from(rng.random_bool(0.5))
                    };
                    assign(
                        row,
                        fold,
                        &mut desired,
                        &mut desired_total,
                        &mut remaining_per_label,
                        &mut assigned,
                    );
                    left -= 1;
                }
            }
            None => {
                // Rows without labels.
                let rows: Vec<usize> = order.iter().copied().filter(|&i| assigned[i].is_none()).collect();
                for row in rows {
                    let fold = usize::from(desired_total[1] > desired_total[0]);
                    assign(
                        row,
                        fold,
                        &mut desired,
                        &mut desired_total,
                        &mut remaining_per_label,
                        &mut assigned,
                    );
                    left -= 1;
                }
            }
        }
    }
    let labeled: Vec<bool> = assigned.iter().map(|a| *a == Some(0)).collect();
    let unlabeled = labeled.iter().map(|b| !b).collect();
    SplitMasks { labeled, unlabeled }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::hierarchy::{build_hierarchy, LabelVector};
    use crate::matrix::Matrix;

    fn single_label(n: usize, positives: usize) -> Dataset {
        let h = Arc::new(build_hierarchy(&[("A", "B")], &["A"]).unwrap());
        let labels = (0..n)
            .map(|i| LabelVector(vec![true, i < positives]))
            .collect();
        Dataset::new(Matrix::zeros(n, 1), labels, h, None).unwrap()
    }

    #[test]
    fn half_split_balances_rare_label() {
        let ds = single_label(10, 4);
        for s in 0..20 {
            let spec = SplitSpec {
                labeled_fraction: 0.5,
                repetitions: 1,
                seed: s,
            };
            let m = &stratified_labeled_split(&ds, &spec).unwrap()[0];
            let pos = m.labeled_rows().iter().filter(|&&i| ds.labels[i].get(1)).count();
            assert!((1..=3).contains(&pos), "seed {s}: {pos}");
            assert!(m.labeled.iter().zip(&m.unlabeled).all(|(a, b)| a ^ b));
            assert_eq!(m.labeled_rows().len(), 5);
        }
    }

    #[test]
    fn full_fraction_leaves_nothing_unlabeled() {
        let ds = single_label(7, 3);
        let spec = SplitSpec {
            labeled_fraction: 1.0,
            repetitions: 2,
            seed: 1,
        };
        for m in stratified_labeled_split(&ds, &spec).unwrap() {
            assert!(m.unlabeled_rows().is_empty());
        }
    }

    #[test]
    fn repetitions_differ_and_are_reproducible() {
        let ds = single_label(60, 20);
        let spec = SplitSpec {
            labeled_fraction: 0.3,
            repetitions: 3,
            seed: 9,
        };
        let a = stratified_labeled_split(&ds, &spec).unwrap();
        let b = stratified_labeled_split(&ds, &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert_ne!(a[0], a[1]);
        assert_ne!(a[1], a[2]);
    }

    #[test]
    fn invalid_fraction() {
        let ds = single_label(4, 2);
        let spec = SplitSpec {
            labeled_fraction: 0.0,
            repetitions: 1,
            seed: 0,
        };
        assert!(stratified_labeled_split(&ds, &spec).is_err());
    }
}

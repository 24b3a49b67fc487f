use crate::matrix::Matrix;

/// Per-column fill values learned from a training matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Imputation {
    pub means: Vec<f64>,
    /// Columns with no observed value in the training matrix; filled with 0.
    pub fully_missing: Vec<bool>,
}

impl Imputation {
    pub fn fit(train: &Matrix) -> Self {
        let mut sums = vec![0.0; train.cols()];
        let mut counts = vec![0usize; train.cols()];
        for row in train.iter_rows() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_nan() {
                    sums[j] += v;
                    counts[j] += 1;
                }
            }
        }
        let fully_missing: Vec<bool> = counts.iter().map(|&c| c == 0).collect();
        let means = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
            .collect();
        Imputation {
            means,
            fully_missing,
        }
    }

    pub fn apply(&self, m: &Matrix) -> Matrix {
        let mut out = m.clone();
        for i in 0..out.rows() {
            for (v, &fill) in out.row_mut(i).iter_mut().zip(&self.means) {
                if v.is_nan() {
                    *v = fill;
                }
            }
        }
        out
    }
}

/// Mean imputation with statistics taken from `train` only, applied to every set.
pub fn impute_missing(train: &Matrix, others: &[&Matrix]) -> (Matrix, Vec<Matrix>, Imputation) {
    let imp = Imputation::fit(train);
    let t = imp.apply(train);
    let o = others.iter().map(|m| imp.apply(m)).collect();
    (t, o, imp)
}

/// Optional z-score scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Fits on the rows of all given matrices (e.g. labeled and unlabeled features).
    pub fn fit(parts: &[&Matrix]) -> Self {
        let cols = parts.first().map_or(0, |m| m.cols());
        let mut n = 0usize;
        let mut sum = vec![0.0; cols];
        let mut sq = vec![0.0; cols];
        for m in parts {
            for row in m.iter_rows() {
                n += 1;
                for (j, &v) in row.iter().enumerate() {
                    sum[j] += v;
                    sq[j] += v * v;
                }
            }
        }
        let nf = n.max(1) as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
        let scale = sq
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let var = (s / nf - m * m).max(0.0);
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, m: &Matrix) -> Matrix {
        let mut out = m.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.scale[j];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::MISSING;

    #[test]
    fn mean_fills_gap() {
        let train = Matrix::from_rows(&[[1.0], [MISSING], [3.0]]).unwrap();
        let (t, _, imp) = impute_missing(&train, &[]);
        assert_eq!(t.column(0), vec![1.0, 2.0, 3.0]);
        assert_eq!(imp.means, vec![2.0]);
    }

    #[test]
    fn no_missing_is_identity() {
        let train = Matrix::from_rows(&[[1.0, 5.0], [2.0, 6.0]]).unwrap();
        let (t, _, _) = impute_missing(&train, &[]);
        assert_eq!(t, train);
    }

    #[test]
    fn test_rows_use_train_statistics() {
        let train = Matrix::from_rows(&[[1.0], [3.0]]).unwrap();
        let test = Matrix::from_rows(&[[MISSING], [100.0]]).unwrap();
        let (_, others, _) = impute_missing(&train, &[&test]);
        assert_eq!(others[0].column(0), vec![2.0, 100.0]);
    }

    #[test]
    fn fully_missing_column_is_zero_and_flagged() {
        let train = Matrix::from_rows(&[[MISSING, 1.0], [MISSING, 2.0]]).unwrap();
        let (t, _, imp) = impute_missing(&train, &[]);
        assert_eq!(t.column(0), vec![0.0, 0.0]);
        assert_eq!(imp.fully_missing, vec![true, false]);
    }

    #[test]
    fn standardize_zero_mean_unit_scale() {
        let a = Matrix::from_rows(&[[1.0, 4.0], [3.0, 4.0]]).unwrap();
        let s = Standardizer::fit(&[&a]);
        let z = s.apply(&a);
        assert_eq!(z.column(0), vec![-1.0, 1.0]);
        assert_eq!(z.column(1), vec![0.0, 0.0]);
    }
}

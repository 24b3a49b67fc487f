//! Average ranks, the Friedman test with the Iman-Davenport correction, and
//! the Nemenyi critical difference.

use std::fmt::Write as _;

use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};

/// Per-block ranks (1 = best, ties share the average rank) and their column means.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub values: Vec<Vec<f64>>,
    pub ranks: Vec<Vec<f64>>,
    pub avg_ranks: Vec<f64>,
}

impl RankTable {
    pub fn n_blocks(&self) -> usize {
        self.values.len()
    }

    pub fn n_algorithms(&self) -> usize {
        self.avg_ranks.len()
    }
}

/// Ranks every row of `values` (blocks × algorithms).
pub fn rank_matrix(values: &[Vec<f64>], higher_is_better: bool) -> Result<RankTable> {
    let l = values.first().map_or(0, Vec::len);
    if values.iter().any(|r| r.len() != l) {
        return Err(Error::ShapeMismatch("ragged value table".into()));
    }
    let mut ranks = Vec::with_capacity(values.len());
    for row in values {
        let mut order: Vec<usize> = (0..l).collect();
        order.sort_by(|&a, &b| {
            if higher_is_better {
                row[b].total_cmp(&row[a])
            } else {
                row[a].total_cmp(&row[b])
            }
        });
        let mut r = vec![0.0; l];
        let mut i = 0;
        while i < l {
            let mut j = i;
            while j + 1 < l && row[order[j + 1]] == row[order[i]] {
                j += 1;
            }
            // positions i..=j share ranks i+1..=j+1
            let avg = (i + j + 2) as f64 / 2.0;
            for &k in &order[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        ranks.push(r);
    }
    let m = values.len().max(1) as f64;
    let avg_ranks = (0..l)
        .map(|j| ranks.iter().map(|r: &Vec<f64>| r[j]).sum::<f64>() / m)
        .collect();
    Ok(RankTable {
        values: values.to_vec(),
        ranks,
        avg_ranks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FriedmanResult {
    pub chi2: f64,
    /// Iman-Davenport statistic; infinite when every block orders the algorithms identically.
    pub f_stat: f64,
    pub df1: f64,
    pub df2: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    /// Every block ties every algorithm.
    pub degenerate: bool,
}

/// Friedman test on the ranks of `table`; rejection uses the F-distributed
/// Iman-Davenport statistic at level `alpha`.
pub fn friedman_test(table: &RankTable, alpha: f64) -> Result<FriedmanResult> {
    let m = table.n_blocks();
    let l = table.n_algorithms();
    if m < 2 || l < 2 {
        return Err(Error::ShapeMismatch(format!(
            "Friedman test needs at least 2 blocks and 2 algorithms, got {m}×{l}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha {alpha} not in (0, 1)")));
    }
    let (mf, lf) = (m as f64, l as f64);
    let sum_sq: f64 = table.avg_ranks.iter().map(|r| r * r).sum();
    let chi2 = (12.0 * mf / (lf * (lf + 1.0)) * (sum_sq - lf * (lf + 1.0).powi(2) / 4.0)).max(0.0);
    let denom = mf * (lf - 1.0) - chi2;
    let f_stat = if denom <= 0.0 {
        f64::INFINITY
    } else {
        (mf - 1.0) * chi2 / denom
    };
    let df1 = lf - 1.0;
    let df2 = (lf - 1.0) * (mf - 1.0);
    let dist = FisherSnedecor::new(df1, df2).map_err(|e| Error::Config(e.to_string()))?;
    let critical_value = dist.inverse_cdf(1.0 - alpha);
    let p_value = if f_stat.is_infinite() {
        0.0
    } else {
        1.0 - dist.cdf(f_stat)
    };
    let degenerate = table
        .values
        .iter()
        .all(|row| row.iter().all(|v| *v == row[0]));
    Ok(FriedmanResult {
        chi2,
        f_stat,
        df1,
        df2,
        critical_value,
        p_value,
        reject: f_stat > critical_value,
        degenerate,
    })
}

// Two-tailed Nemenyi critical values q_α (studentized range / √2) for 2..=10 algorithms.
const Q_05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
const Q_10: [f64; 9] = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];

pub fn nemenyi_q(l: usize, alpha: f64) -> Result<f64> {
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &Q_05
    } else if (alpha - 0.10).abs() < 1e-12 {
        &Q_10
    } else {
        return Err(Error::UnsupportedAlpha(alpha));
    };
    if !(2..=10).contains(&l) {
        return Err(Error::UnsupportedAlgorithmCount(l));
    }
    Ok(table[l - 2])
}

/// Critical difference of average ranks for `l` algorithms over `m` blocks.
pub fn nemenyi_cd(l: usize, m: usize, alpha: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::ShapeMismatch("no blocks".into()));
    }
    let q = nemenyi_q(l, alpha)?;
    let lf = l as f64;
    Ok(q * (lf * (lf + 1.0) / (6.0 * m as f64)).sqrt())
}

/// Ranks, Friedman outcome and Nemenyi CD for a named set of algorithms.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub algorithms: Vec<String>,
    pub blocks: Vec<String>,
    pub ranks: RankTable,
    pub friedman: FriedmanResult,
    pub cd: Option<f64>,
    pub alpha: f64,
}

impl ComparisonReport {
    pub fn new(
        algorithms: Vec<String>,
        blocks: Vec<String>,
        values: &[Vec<f64>],
        higher_is_better: bool,
        alpha: f64,
    ) -> Result<Self> {
        let ranks = rank_matrix(values, higher_is_better)?;
        if ranks.n_algorithms() != algorithms.len() || ranks.n_blocks() != blocks.len() {
            return Err(Error::ShapeMismatch("names do not match the value table".into()));
        }
        let friedman = friedman_test(&ranks, alpha)?;
        let cd = nemenyi_cd(algorithms.len(), blocks.len(), alpha).ok();
        Ok(ComparisonReport {
            algorithms,
            blocks,
            ranks,
            friedman,
            cd,
            alpha,
        })
    }

    /// `algorithm,average_rank,cd` rows for plotting a critical-difference diagram.
    pub fn nemenyi_csv(&self) -> String {
        let mut out = String::from("algorithm,average_rank,cd\n");
        let cd = self.cd.map_or(String::from("NA"), |c| format!("{c:?}"));
        for (a, r) in self.algorithms.iter().zip(&self.ranks.avg_ranks) {
            let _ = writeln!(out, "{a},{r:?},{cd}");
        }
        out
    }

    pub fn ranks_csv(&self) -> String {
        let mut out = format!("block,{}\n", self.algorithms.join(","));
        for (b, r) in self.blocks.iter().zip(&self.ranks.ranks) {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{b},{}", cells.join(","));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} algorithms over {} blocks (alpha = {})",
            self.algorithms.len(),
            self.blocks.len(),
            self.alpha
        );
        let mut order: Vec<usize> = (0..self.algorithms.len()).collect();
        order.sort_by(|&a, &b| self.ranks.avg_ranks[a].total_cmp(&self.ranks.avg_ranks[b]));
        let _ = writeln!(out, "average ranks (1 = best):");
        for i in order {
            let _ = writeln!(out, "  {:<12} {:.3}", self.algorithms[i], self.ranks.avg_ranks[i]);
        }
        let f = &self.friedman;
        let _ = writeln!(
            out,
            "Friedman chi2_F = {:.4}, Iman-Davenport F_F = {:.4} (df {}, {}), critical {:.4}, p = {:.4e}: {}",
            f.chi2,
            f.f_stat,
            f.df1,
            f.df2,
            f.critical_value,
            f.p_value,
            if f.reject { "reject equal ranks" } else { "no significant difference" }
        );
        match self.cd {
            Some(cd) => {
                let _ = writeln!(out, "Nemenyi critical difference = {cd:.4}");
            }
            None => {
                let _ = writeln!(out, "Nemenyi critical difference unavailable for this configuration");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        let t = rank_matrix(&[vec![0.9, 0.5, 0.7]], true).unwrap();
        assert_eq!(t.ranks[0], vec![1.0, 3.0, 2.0]);
        let t = rank_matrix(&[vec![0.5, 0.5, 0.1]], true).unwrap();
        assert_eq!(t.ranks[0], vec![1.5, 1.5, 3.0]);
        let t = rank_matrix(&[vec![0.5, 0.5, 0.1]], false).unwrap();
        assert_eq!(t.ranks[0], vec![2.5, 2.5, 1.0]);
    }

    #[test]
    fn all_ties_give_zero_statistic() {
        let t = rank_matrix(&vec![vec![0.3; 4]; 5], true).unwrap();
        let f = friedman_test(&t, 0.05).unwrap();
        assert_eq!(f.chi2, 0.0);
        assert!(!f.reject);
        assert!(f.degenerate);
    }

    #[test]
    fn toy_table_matches_formula() {
        // l = 3, M = 4; ranks per block written out by hand.
        let values = vec![
            vec![0.9, 0.8, 0.7],
            vec![0.8, 0.9, 0.7],
            vec![0.9, 0.7, 0.8],
            vec![0.9, 0.8, 0.7],
        ];
        let t = rank_matrix(&values, true).unwrap();
        assert_eq!(t.avg_ranks, vec![1.25, 2.0, 2.75]);
        let f = friedman_test(&t, 0.05).unwrap();
        // 12·4/(3·4) · (1.5625 + 4 + 7.5625 − 12) = 4 · 1.125 = 4.5
        assert!((f.chi2 - 4.5).abs() < 1e-9);
        // (M−1)χ²/(M(l−1)−χ²) = 3·4.5/3.5
        assert!((f.f_stat - 13.5 / 3.5).abs() < 1e-9);
    }

    #[test]
    fn perfectly_ordered_table_rejects() {
        let values = vec![vec![0.9, 0.5, 0.1]; 10];
        let f = friedman_test(&rank_matrix(&values, true).unwrap(), 0.05).unwrap();
        assert!((f.chi2 - 20.0).abs() < 1e-9);
        assert!(f.f_stat.is_infinite());
        assert!(f.reject);
        // Tabulated F(2, 18) at 0.95 is 3.5546.
        assert!((f.critical_value - 3.5546).abs() < 1e-3);
    }

    #[test]
    fn critical_difference() {
        let cd = nemenyi_cd(6, 60, 0.05).unwrap();
        assert!((cd - 2.850 * (42.0f64 / 360.0).sqrt()).abs() < 1e-12);
        let a = nemenyi_cd(2, 10, 0.05).unwrap();
        let b = nemenyi_cd(2, 20, 0.05).unwrap();
        assert!(a > b && b > 0.0);
        assert!((a / b - 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(nemenyi_cd(3, 5, 0.01), Err(Error::UnsupportedAlpha(_))));
        assert!(nemenyi_cd(11, 5, 0.05).is_err());
    }

    #[test]
    fn report_outputs() {
        let r = ComparisonReport::new(
            vec!["a".into(), "b".into()],
            vec!["d1".into(), "d2".into(), "d3".into()],
            &[vec![0.9, 0.1], vec![0.8, 0.2], vec![0.3, 0.4]],
            true,
            0.05,
        )
        .unwrap();
        assert!(r.nemenyi_csv().starts_with("algorithm,average_rank,cd\na,"));
        assert_eq!(r.ranks_csv().lines().count(), 4);
        assert!(r.summary().contains("Friedman"));
    }
}

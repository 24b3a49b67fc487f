//! Dataset directories and feature preprocessing.
//!
//! A dataset directory holds either native parts (`hierarchy.txt`,
//! `<part>.features.csv`, `<part>.labels.txt`) or Clus-ARFF parts
//! (`<part>.arff`).

use std::path::{Path, PathBuf};
use std::sync::Arc;

use sshmc::bundle::RunManifest;
use sshmc::dataset::{load_clus_arff, load_features, load_part, Dataset, Imputation, LoadReport, PartPaths, Standardizer};
use sshmc::{Error, Hierarchy, Matrix, Result};

pub struct DataDir {
    pub dir: PathBuf,
    arff: bool,
    /// Shared by every loaded part; for ARFF data set by the first part.
    pub hierarchy: Option<Arc<Hierarchy>>,
}

impl DataDir {
    pub fn open(dir: &Path) -> Result<Self> {
        let native = dir.join("hierarchy.txt");
        let arff = !native.exists() && has_arff(dir);
        let hierarchy = if arff {
            None
        } else {
            Some(Arc::new(Hierarchy::load(&native)?))
        };
        Ok(DataDir {
            dir: dir.to_path_buf(),
            arff,
            hierarchy,
        })
    }

    /// Opens `dir` against a known hierarchy, e.g. the one stored in a model bundle.
    pub fn with_hierarchy(dir: &Path, h: Arc<Hierarchy>) -> Self {
        DataDir {
            dir: dir.to_path_buf(),
            arff: !dir.join("hierarchy.txt").exists() && has_arff(dir),
            hierarchy: Some(h),
        }
    }

    /// Dataset name for reports: the directory's last component.
    pub fn name(&self) -> String {
        self.dir
            .file_name()
            .map_or_else(|| self.dir.display().to_string(), |n| n.to_string_lossy().into_owned())
    }

    pub fn has_part(&self, part: &str) -> bool {
        if self.arff {
            self.arff_path(part).exists()
        } else {
            PartPaths::new(&self.dir, part).exists()
        }
    }

    /// Like [`DataDir::has_part`] but a native part needs only its features file.
    pub fn has_part_features(&self, part: &str) -> bool {
        if self.arff {
            self.arff_path(part).exists()
        } else {
            PartPaths::new(&self.dir, part).features.exists()
        }
    }

    fn arff_path(&self, part: &str) -> PathBuf {
        self.dir.join(format!("{part}.arff"))
    }

    /// Loads one part. ARFF parts must all declare the same hierarchy; the
    /// first one loaded becomes the shared hierarchy.
    pub fn load(&mut self, part: &str) -> Result<(Dataset, LoadReport)> {
        if !self.arff {
            let h = self.hierarchy.as_ref().expect("native directories load their hierarchy on open");
            return load_part(&self.dir, part, h);
        }
        let (ds, report) = load_clus_arff(&self.arff_path(part))?;
        let h = Arc::clone(self.hierarchy.get_or_insert_with(|| Arc::clone(&ds.hierarchy)));
        if *h != *ds.hierarchy {
            return Err(Error::Format(format!(
                "{} declares a different hierarchy than the other parts",
                self.arff_path(part).display()
            )));
        }
        let ds = Dataset::new(ds.features, ds.labels, h, ds.row_names)?;
        Ok((ds, report))
    }

    /// Feature rows of a part; native parts need no labels file.
    pub fn load_features(&mut self, part: &str) -> Result<Matrix> {
        if self.arff {
            return Ok(self.load(part)?.0.features);
        }
        load_features(&PartPaths::new(&self.dir, part).features)
    }

    /// Loads the first existing part among `names`.
    pub fn load_any(&mut self, names: &[&str]) -> Result<(Dataset, LoadReport, String)> {
        let part = names
            .iter()
            .find(|p| self.has_part(p))
            .copied()
            .unwrap_or(names[0]);
        let (ds, report) = self.load(part)?;
        Ok((ds, report, part.to_string()))
    }
}

fn has_arff(dir: &Path) -> bool {
    std::fs::read_dir(dir)
        .map(|entries| {
            entries
                .flatten()
                .any(|e| e.path().extension().is_some_and(|x| x == "arff"))
        })
        .unwrap_or(false)
}

/// Mean imputation and optional z-scoring, fitted on training features.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Preprocess {
    pub impute: Option<Imputation>,
    pub standardize: Option<Standardizer>,
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(";")
}

fn split(key: &str, s: &str) -> Result<Vec<f64>> {
    s.split(';')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad number `{t}` in manifest key {key}")))
        })
        .collect()
}

impl Preprocess {
    /// Imputes only when some training cell is missing.
    pub fn fit(parts: &[&Matrix], standardize: bool) -> Result<Self> {
        let mut all = parts[0].clone();
        for p in &parts[1..] {
            if p.rows() > 0 {
                all = all.vstack(p)?;
            }
        }
        let impute = all.has_missing().then(|| Imputation::fit(&all));
        let standardize = standardize.then(|| {
            let filled = impute.as_ref().map_or_else(|| all.clone(), |i| i.apply(&all));
            Standardizer::fit(&[&filled])
        });
        Ok(Preprocess { impute, standardize })
    }

    pub fn apply(&self, m: &Matrix) -> Result<Matrix> {
        let mut out = match &self.impute {
            Some(i) => {
                if i.means.len() != m.cols() {
                    return Err(Error::WidthMismatch {
                        expected: i.means.len(),
                        actual: m.cols(),
                    });
                }
                i.apply(m)
            }
            None => m.clone(),
        };
        if let Some((row, col)) = out.first_missing() {
            return Err(Error::MissingValue { row, col });
        }
        if let Some(s) = &self.standardize {
            if s.mean.len() != out.cols() {
                return Err(Error::WidthMismatch {
                    expected: s.mean.len(),
                    actual: out.cols(),
                });
            }
            out = s.apply(&out);
        }
        Ok(out)
    }

    pub fn record(&self, manifest: &mut RunManifest) {
        match &self.impute {
            Some(i) => {
                manifest.set("preprocess.impute_means", join(&i.means));
            }
            None => {
                manifest.set("preprocess.impute_means", "none");
            }
        }
        match &self.standardize {
            Some(s) => {
                manifest.set("preprocess.standardize_mean", join(&s.mean));
                manifest.set("preprocess.standardize_scale", join(&s.scale));
            }
            None => {
                manifest.set("preprocess.standardize_mean", "none");
            }
        }
    }

    pub fn from_manifest(manifest: &RunManifest) -> Result<Self> {
        let impute = match manifest.get("preprocess.impute_means") {
            None | Some("none") => None,
            Some(s) => {
                let means = split("preprocess.impute_means", s)?;
                let fully_missing = vec![false; means.len()];
                Some(Imputation { means, fully_missing })
            }
        };
        let standardize = match manifest.get("preprocess.standardize_mean") {
            None | Some("none") => None,
            Some(s) => {
                let mean = split("preprocess.standardize_mean", s)?;
                let scale_text = manifest
                    .get("preprocess.standardize_scale")
                    .ok_or_else(|| Error::Format("standardize_mean without standardize_scale".into()))?;
                let scale = split("preprocess.standardize_scale", scale_text)?;
                if scale.len() != mean.len() {
                    return Err(Error::Format("standardization vectors differ in length".into()));
                }
                Some(Standardizer { mean, scale })
            }
        };
        Ok(Preprocess { impute, standardize })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip() {
        let nan = f64::NAN;
        let m = Matrix::from_rows(&[[1.0, nan], [3.0, 4.0], [nan, 8.0]]).unwrap();
        let p = Preprocess::fit(&[&m], true).unwrap();
        let mut manifest = RunManifest::new();
        p.record(&mut manifest);
        let back = Preprocess::from_manifest(&manifest).unwrap();
        assert_eq!(back.apply(&m).unwrap(), p.apply(&m).unwrap());
        assert!(!back.apply(&m).unwrap().has_missing());
    }

    #[test]
    fn no_missing_means_no_imputation() {
        let m = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let p = Preprocess::fit(&[&m, &Matrix::zeros(0, 2)], false).unwrap();
        assert_eq!(p, Preprocess::default());
        let with_gap = Matrix::from_rows(&[[f64::NAN, 2.0]]).unwrap();
        assert!(matches!(p.apply(&with_gap), Err(Error::MissingValue { row: 0, col: 0 })));
    }

    #[test]
    fn imputation_uses_training_means() {
        let train = Matrix::from_rows(&[[1.0], [3.0]]).unwrap();
        let other = Matrix::from_rows(&[[f64::NAN]]).unwrap();
        let p = Preprocess::fit(&[&train, &other], false).unwrap();
        assert_eq!(p.apply(&other).unwrap().get(0, 0), 2.0);
    }
}

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::Dataset;
use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, LabelVector};
use crate::matrix::{Matrix, MISSING};

/// Non-fatal findings from a load.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Rows whose labels were not ancestor-closed on disk and were completed.
    pub repaired_rows: usize,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses `features.csv`: a header row, then comma-separated reals with `?` for
/// missing values. A leading `id` column, if present, supplies row names.
pub fn parse_features(text: &str, path: &Path) -> Result<(Matrix, Option<Vec<String>>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(Error::parse(path, 1, "missing header row"));
    };
    let header: Vec<&str> = header.split(',').map(str::trim).collect();
    let has_id = header.first() == Some(&"id");
    let width = header.len() - usize::from(has_id);
    let mut data = Vec::new();
    let mut names = Vec::new();
    let mut rows = 0;
    for (i, line) in lines {
        let mut fields = line.trim_end_matches('\r').split(',').map(str::trim);
        if has_id {
            names.push(fields.next().unwrap_or_default().to_string());
        }
        let before = data.len();
        for tok in fields {
            let v = if tok == "?" {
                MISSING
            } else {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(path, i + 1, format!("invalid number `{tok}`")))?
            };
            data.push(v);
        }
        if data.len() - before != width {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected {width} values, found {}", data.len() - before),
            ));
        }
        rows += 1;
    }
    let m = Matrix::new(rows, width, data)?;
    Ok((m, has_id.then_some(names)))
}

pub fn load_features(path: &Path) -> Result<Matrix> {
    Ok(parse_features(&read(path)?, path)?.0)
}

/// Parses `labels.txt`: one line per instance, `;`-separated node names.
/// Rows are ancestor-closed; the report counts rows that needed it.
pub fn parse_labels(
    text: &str,
    path: &Path,
    h: &Hierarchy,
    report: &mut LoadReport,
) -> Result<Vec<LabelVector>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        let mut y = LabelVector::zeros(h.len());
        for name in line.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let id = h.id(name).ok_or_else(|| Error::UnknownLabel {
                label: name.to_string(),
                path: path.to_path_buf(),
                line: i + 1,
            })?;
            y.set(id, true);
        }
        if !y.any() {
            return Err(Error::parse(path, i + 1, "instance carries no label"));
        }
        let closed = h.ancestor_closure(&y)?;
        if closed != y {
            report.repaired_rows += 1;
        }
        out.push(closed);
    }
    Ok(out)
}

/// Loads a dataset from the native three-file format.
pub fn load_native(
    features_path: &Path,
    labels_path: &Path,
    hierarchy_path: &Path,
) -> Result<(Dataset, LoadReport)> {
    let h = Arc::new(Hierarchy::load(hierarchy_path)?);
    load_with_hierarchy(features_path, labels_path, h)
}

pub(crate) fn load_with_hierarchy(
    features_path: &Path,
    labels_path: &Path,
    h: Arc<Hierarchy>,
) -> Result<(Dataset, LoadReport)> {
    let (features, names) = parse_features(&read(features_path)?, features_path)?;
    let mut report = LoadReport::default();
    let labels = parse_labels(&read(labels_path)?, labels_path, &h, &mut report)?;
    if labels.len() != features.rows() {
        return Err(Error::parse(
            labels_path,
            labels.len(),
            format!(
                "{} label lines but {} feature rows in {}",
                labels.len(),
                features.rows(),
                features_path.display()
            ),
        ));
    }
    Ok((Dataset::new(features, labels, h, names)?, report))
}

pub fn format_features(features: &Matrix, row_names: Option<&[String]>) -> String {
    let mut out = String::new();
    let mut header: Vec<String> = (0..features.cols()).map(|j| format!("f{j}")).collect();
    if row_names.is_some() {
        header.insert(0, "id".into());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, row) in features.iter_rows().enumerate() {
        let mut fields: Vec<String> = row
            .iter()
            .map(|v| if v.is_nan() { "?".into() } else { format!("{v:?}") })
            .collect();
        if let Some(names) = row_names {
            fields.insert(0, names[i].clone());
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn format_labels(h: &Hierarchy, labels: &[LabelVector]) -> String {
    let mut out = String::new();
    for y in labels {
        let names: Vec<&str> = h.most_specific(y).into_iter().map(|l| h.name(l)).collect();
        let _ = writeln!(out, "{}", names.join(";"));
    }
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes the native format (features, most-specific labels, hierarchy).
pub fn write_native(
    ds: &Dataset,
    features_path: &Path,
    labels_path: &Path,
    hierarchy_path: &Path,
) -> Result<()> {
    write(
        features_path,
        &format_features(&ds.features, ds.row_names.as_deref()),
    )?;
    write(labels_path, &format_labels(&ds.hierarchy, &ds.labels))?;
    write(hierarchy_path, &ds.hierarchy.to_text())
}

/// File locations of one named partition inside a dataset directory:
/// `hierarchy.txt`, `<part>.features.csv` and `<part>.labels.txt`.
#[derive(Debug, Clone)]
pub struct PartPaths {
    pub hierarchy: PathBuf,
    pub features: PathBuf,
    pub labels: PathBuf,
}

impl PartPaths {
    pub fn new(dir: &Path, part: &str) -> Self {
        PartPaths {
            hierarchy: dir.join("hierarchy.txt"),
            features: dir.join(format!("{part}.features.csv")),
            labels: dir.join(format!("{part}.labels.txt")),
        }
    }

    pub fn exists(&self) -> bool {
        self.features.exists() && self.labels.exists()
    }
}

/// Loads partition `part` of a dataset directory against an already-loaded hierarchy.
pub fn load_part(dir: &Path, part: &str, h: &Arc<Hierarchy>) -> Result<(Dataset, LoadReport)> {
    let p = PartPaths::new(dir, part);
    load_with_hierarchy(&p.features, &p.labels, Arc::clone(h))
}

pub fn write_part(dir: &Path, part: &str, ds: &Dataset) -> Result<()> {
    let p = PartPaths::new(dir, part);
    write_native(ds, &p.features, &p.labels, &p.hierarchy)
}

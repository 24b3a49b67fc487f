//! Reader for ARFF files with a hierarchical class attribute, as used by the
//! Clus hierarchical multi-label benchmark datasets.

use std::path::Path;
use std::sync::Arc;

use super::{Dataset, LoadReport};
use crate::error::{Error, Result};
use crate::hierarchy::{HierarchyBuilder, LabelVector};
use crate::matrix::{Matrix, MISSING};

enum Attr {
    Numeric,
    Class,
}

/// Strips optional single or double quotes around an ARFF identifier.
fn unquote(s: &str) -> &str {
    let s = s.trim();
    if s.len() >= 2
        && ((s.starts_with('\'') && s.ends_with('\'')) || (s.starts_with('"') && s.ends_with('"')))
    {
        &s[1..s.len() - 1]
    } else {
        s
    }
}

/// Splits `@ATTRIBUTE name type...` into (name, rest), honoring quoted names.
fn split_attribute(rest: &str) -> Option<(&str, &str)> {
    let rest = rest.trim_start();
    let q = rest.chars().next()?;
    if q == '\'' || q == '"' {
        let end = rest[1..].find(q)? + 1;
        Some((&rest[1..end], rest[end + 1..].trim()))
    } else {
        let end = rest.find(char::is_whitespace)?;
        Some((&rest[..end], rest[end..].trim()))
    }
}

/// Parses ARFF text. The hierarchical class attribute lists `parent/child`
/// edges (`root/X` marks a top-level node); instance class values are
/// `@`-separated node references, where a `/`-path resolves to its last node.
pub fn parse_clus_arff(text: &str, path: &Path) -> Result<(Dataset, LoadReport)> {
    let mut attrs = Vec::new();
    let mut builder = HierarchyBuilder::new();
    let mut class_seen = false;
    let mut lines = text.lines().enumerate();
    let mut in_data = false;
    for (i, raw) in lines.by_ref() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            continue;
        }
        if lower.starts_with("@data") {
            in_data = true;
            break;
        }
        if !lower.starts_with("@attribute") {
            return Err(Error::parse(path, i + 1, format!("unexpected header line `{line}`")));
        }
        let (_, ty) = split_attribute(&line["@attribute".len()..])
            .ok_or_else(|| Error::parse(path, i + 1, "malformed @ATTRIBUTE"))?;
        let ty_lower = ty.to_ascii_lowercase();
        if ty_lower.starts_with("hierarchical") {
            if class_seen {
                return Err(Error::parse(path, i + 1, "more than one hierarchical attribute"));
            }
            class_seen = true;
            let edges = ty["hierarchical".len()..].trim();
            for tok in edges.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let (p, c) = tok
                    .rsplit_once('/')
                    .ok_or_else(|| Error::parse(path, i + 1, format!("edge `{tok}` lacks `/`")))?;
                let p = p.rsplit('/').next().unwrap_or(p);
                if c.is_empty() || p.is_empty() {
                    return Err(Error::parse(path, i + 1, format!("empty node in edge `{tok}`")));
                }
                if p == "root" {
                    builder.root(c);
                } else {
                    builder.edge(p, c);
                }
            }
            attrs.push(Attr::Class);
        } else if ["numeric", "real", "integer"].iter().any(|t| ty_lower.starts_with(t)) {
            attrs.push(Attr::Numeric);
        } else {
            return Err(Error::parse(path, i + 1, format!("unsupported attribute type `{ty}`")));
        }
    }
    if !in_data {
        return Err(Error::parse(path, text.lines().count(), "missing @DATA section"));
    }
    if !class_seen {
        return Err(Error::parse(path, 0, "no hierarchical class attribute declared"));
    }
    let h = Arc::new(builder.build()?);
    let width = attrs.len() - 1;

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut report = LoadReport::default();
    for (i, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != attrs.len() {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected {} fields, found {}", attrs.len(), fields.len()),
            ));
        }
        let mut y = LabelVector::zeros(h.len());
        for (attr, tok) in attrs.iter().zip(&fields) {
            match attr {
                Attr::Numeric => {
                    let v = if *tok == "?" {
                        MISSING
                    } else {
                        tok.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                            Error::parse(path, i + 1, format!("invalid number `{tok}`"))
                        })?
                    };
                    data.push(v);
                }
                Attr::Class => {
                    for r in unquote(tok).split('@').map(str::trim).filter(|s| !s.is_empty()) {
                        let name = r.rsplit('/').next().unwrap_or(r);
                        if name == "?" {
                            continue;
                        }
                        let id = h.id(name).ok_or_else(|| Error::UnknownLabel {
                            label: name.to_string(),
                            path: path.to_path_buf(),
                            line: i + 1,
                        })?;
                        y.set(id, true);
                    }
                }
            }
        }
        if !y.any() {
            return Err(Error::parse(path, i + 1, "instance carries no label"));
        }
        let closed = h.ancestor_closure(&y)?;
        if closed != y {
            report.repaired_rows += 1;
        }
        labels.push(closed);
    }
    let features = Matrix::new(labels.len(), width, data)?;
    Ok((Dataset::new(features, labels, h, None)?, report))
}

pub fn load_clus_arff(path: &Path) -> Result<(Dataset, LoadReport)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_clus_arff(&text, path)
}

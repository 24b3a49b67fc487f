use std::collections::BTreeSet;
use std::sync::Arc;

use super::Dataset;
use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, HierarchyBuilder, LabelVector, NodeId, VIRTUAL_ROOT};

/// Result of [`prune_rare_nodes`].
#[derive(Debug, Clone)]
pub struct Pruned {
    pub hierarchy: Arc<Hierarchy>,
    pub train: Dataset,
    pub others: Vec<Dataset>,
    /// Old node id of each surviving node, in new id order.
    pub kept: Vec<NodeId>,
}

/// Removes nodes with fewer than `min_count` positives in `train` and projects
/// every dataset onto the survivors. Rows are never dropped.
///
/// On ancestor-closed data a node's count never exceeds its parents' counts,
/// so the removed set is closed under descendants.
pub fn prune_rare_nodes(train: &Dataset, others: &[Dataset], min_count: usize) -> Result<Pruned> {
    let counts = train.label_counts();
    let keep: Vec<bool> = counts.iter().map(|&c| c >= min_count.max(1)).collect();
    remove_nodes(train, others, &keep)
}

/// Keeps the nodes flagged in `keep` and projects every dataset onto them.
///
/// A surviving node whose parent is removed inherits that parent's nearest
/// surviving ancestors, so ancestor relations among survivors are preserved.
pub fn remove_nodes(train: &Dataset, others: &[Dataset], keep: &[bool]) -> Result<Pruned> {
    let h = &train.hierarchy;
    if keep.len() != h.len() {
        return Err(Error::LengthMismatch {
            expected: h.len(),
            actual: keep.len(),
        });
    }
    for o in others {
        if o.hierarchy != *h {
            return Err(Error::ShapeMismatch("datasets do not share a hierarchy".into()));
        }
    }
    let kept: Vec<NodeId> = (0..h.len()).filter(|&l| keep[l]).collect();
    if kept.is_empty() {
        return Err(Error::EmptyHierarchy);
    }
    let mut new_id = vec![usize::MAX; h.len()];
    for (i, &old) in kept.iter().enumerate() {
        new_id[old] = i;
    }

    // Nearest surviving ancestors of each removed node, in old ids.
    let mut resolved: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); h.len()];
    for &l in h.topo_order() {
        if keep[l] {
            continue;
        }
        let mut set = BTreeSet::new();
        for &p in h.parents(l) {
            if p == VIRTUAL_ROOT || keep[p] {
                set.insert(p);
            } else {
                set.extend(resolved[p].iter().copied());
            }
        }
        resolved[l] = set;
    }

    let mut b = HierarchyBuilder::new();
    for &old in &kept {
        b.node(h.name(old));
    }
    for &old in &kept {
        let mut real = BTreeSet::new();
        let mut root_direct = false;
        let mut root_via = false;
        for &p in h.parents(old) {
            if p == VIRTUAL_ROOT {
                root_direct = true;
            } else if keep[p] {
                real.insert(new_id[p]);
            } else {
                for &q in &resolved[p] {
                    if q == VIRTUAL_ROOT {
                        root_via = true;
                    } else {
                        real.insert(new_id[q]);
                    }
                }
            }
        }
        let mut parents: Vec<NodeId> = real.iter().copied().collect();
        if root_direct || (root_via && real.is_empty()) {
            parents.push(VIRTUAL_ROOT);
        }
        b.set_parents(new_id[old], parents);
    }
    let hierarchy = Arc::new(b.build()?);

    let project = |ds: &Dataset| -> Result<Dataset> {
        let labels = ds
            .labels
            .iter()
            .map(|y| LabelVector(kept.iter().map(|&old| y.get(old)).collect()))
            .collect();
        Dataset::new(
            ds.features.clone(),
            labels,
            Arc::clone(&hierarchy),
            ds.row_names.clone(),
        )
    };
    Ok(Pruned {
        train: project(train)?,
        others: others.iter().map(&project).collect::<Result<_>>()?,
        hierarchy: Arc::clone(&hierarchy),
        kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::build_hierarchy;
    use crate::matrix::Matrix;

    fn dataset(h: Hierarchy, rows: &[&[&str]]) -> Dataset {
        let h = Arc::new(h);
        let labels: Vec<LabelVector> = rows
            .iter()
            .map(|r| {
                let y = LabelVector::from_ids(h.len(), r.iter().map(|n| h.id(n).unwrap()));
                h.ancestor_closure(&y).unwrap()
            })
            .collect();
        let x = Matrix::zeros(labels.len(), 1);
        Dataset::new(x, labels, h, None).unwrap()
    }

    #[test]
    fn chain_drops_rare_child() {
        let h = build_hierarchy(&[("A", "B")], &["A"]).unwrap();
        let mut rows: Vec<&[&str]> = vec![&["B"]; 40];
        rows.extend(vec![&["A"] as &[&str]; 20]);
        let ds = dataset(h, &rows);
        let p = prune_rare_nodes(&ds, &[], 50).unwrap();
        assert_eq!(p.hierarchy.names(), ["A"]);
        assert_eq!(p.train.len(), 60);
        assert!(p.train.labels.iter().all(|y| y.0 == vec![true]));
    }

    #[test]
    fn min_count_one_is_identity() {
        let h = build_hierarchy(&[("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")], &["A"]).unwrap();
        let ds = dataset(h, &[&["D"], &["B"], &["C"]]);
        let p = prune_rare_nodes(&ds, std::slice::from_ref(&ds), 1).unwrap();
        assert_eq!(*p.hierarchy, *ds.hierarchy);
        assert_eq!(p.train.labels, ds.labels);
        assert_eq!(p.others[0].labels, ds.labels);
    }

    #[test]
    fn everything_pruned() {
        let h = build_hierarchy(&[("A", "B")], &["A"]).unwrap();
        let ds = dataset(h, &[&["B"]]);
        assert!(matches!(prune_rare_nodes(&ds, &[], 5), Err(Error::EmptyHierarchy)));
    }

    #[test]
    fn diamond_reparents_through_removed_node() {
        let h = build_hierarchy(&[("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")], &["A"]).unwrap();
        let ds = dataset(h, &[&["D"], &["B"], &["C"], &["A"]]);
        let p = remove_nodes(&ds, std::slice::from_ref(&ds), &[true, false, true, true]).unwrap();
        let nh = &p.hierarchy;
        assert_eq!(nh.names(), ["A", "C", "D"]);
        let d = nh.id("D").unwrap();
        let parents: Vec<&str> = nh.real_parents(d).map(|q| nh.name(q)).collect();
        assert_eq!(parents, ["A", "C"]);
        // Brute-force oracle: closing each original row and dropping B gives the projected row.
        for (orig, proj) in ds.labels.iter().zip(&p.train.labels) {
            let closed = ds.hierarchy.ancestor_closure(orig).unwrap();
            let expect: Vec<bool> = p.kept.iter().map(|&o| closed.get(o)).collect();
            assert_eq!(proj.0, expect);
            assert_eq!(nh.ancestor_closure(proj).unwrap(), *proj);
        }
    }

    #[test]
    fn removed_top_level_hands_children_to_root() {
        let h = build_hierarchy(&[("A", "B"), ("B", "C")], &["A"]).unwrap();
        let ds = dataset(h, &[&["C"]]);
        let p = remove_nodes(&ds, &[], &[false, true, true]).unwrap();
        assert_eq!(p.hierarchy.top_level(), &[0]);
        assert_eq!(p.hierarchy.ancestors(1), &[0]);
    }

    #[test]
    fn descendants_of_rare_nodes_are_rare() {
        let h = build_hierarchy(&[("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")], &["A"]).unwrap();
        let ds = dataset(h, &[&["D"], &["D"], &["C"], &["C"], &["A"]]);
        let p = prune_rare_nodes(&ds, &[], 3).unwrap();
        assert_eq!(p.hierarchy.names(), ["A", "C"]);
        assert_eq!(p.train.label_counts(), vec![5, 4]);
    }
}

//! Label hierarchies as rooted DAGs.
//!
//! The root is implicit: it carries no classifier and never appears in a
//! [`LabelVector`]. Nodes without a declared parent (or declared with `root`)
//! hang off [`VIRTUAL_ROOT`], so a hierarchy may be a forest of top-level nodes.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Sentinel parent id standing for the implicit root.
pub const VIRTUAL_ROOT: NodeId = usize::MAX;

/// Binary label membership vector, one bit per non-root node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelVector(pub Vec<bool>);

impl LabelVector {
    pub fn zeros(len: usize) -> Self {
        LabelVector(vec![false; len])
    }

    pub fn from_ids(len: usize, ids: impl IntoIterator<Item = NodeId>) -> Self {
        let mut v = Self::zeros(len);
        for id in ids {
            v.0[id] = true;
        }
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, l: NodeId) -> bool {
        self.0[l]
    }

    pub fn set(&mut self, l: NodeId, v: bool) {
        self.0[l] = v;
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn any(&self) -> bool {
        self.0.iter().any(|b| *b)
    }

    pub fn ones(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    /// `self ⊆ other`, bitwise.
    pub fn is_subset_of(&self, other: &LabelVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| !*a || *b)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

/// Immutable label DAG with precomputed structural relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hierarchy {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    /// Sorted; may end with `VIRTUAL_ROOT`.
    parents: Vec<Vec<NodeId>>,
    children: Vec<Vec<NodeId>>,
    top_level: Vec<NodeId>,
    ancestors: Vec<Vec<NodeId>>,
    descendants: Vec<Vec<NodeId>>,
    topo_order: Vec<NodeId>,
    depth: Vec<usize>,
}

/// Accumulates nodes and edges in declaration order; node ids follow first appearance.
#[derive(Debug, Default, Clone)]
pub struct HierarchyBuilder {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    parents: Vec<BTreeSet<NodeId>>,
}

impl HierarchyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.parents.push(BTreeSet::new());
        id
    }

    pub fn edge(&mut self, parent: &str, child: &str) -> &mut Self {
        let p = self.node(parent);
        let c = self.node(child);
        self.parents[c].insert(p);
        self
    }

    pub fn root(&mut self, name: &str) -> &mut Self {
        let id = self.node(name);
        self.parents[id].insert(VIRTUAL_ROOT);
        self
    }

    /// Parents given by id, `VIRTUAL_ROOT` allowed. Used when deriving a hierarchy.
    pub(crate) fn set_parents(&mut self, id: NodeId, parents: impl IntoIterator<Item = NodeId>) {
        self.parents[id] = parents.into_iter().collect();
    }

    pub fn build(self) -> Result<Hierarchy> {
        let HierarchyBuilder {
            names,
            index,
            parents,
        } = self;
        let n = names.len();
        let parents: Vec<Vec<NodeId>> = parents
            .into_iter()
            .map(|ps| {
                if ps.is_empty() {
                    vec![VIRTUAL_ROOT]
                } else {
                    ps.into_iter().collect()
                }
            })
            .collect();

        let mut children = vec![Vec::new(); n];
        let mut top_level = Vec::new();
        let mut indegree = vec![0usize; n];
        for (c, ps) in parents.iter().enumerate() {
            for &p in ps {
                if p == VIRTUAL_ROOT {
                    top_level.push(c);
                } else {
                    children[p].push(c);
                    indegree[c] += 1;
                }
            }
        }

        // Kahn's algorithm, lowest id first among ready nodes for a stable order.
        let mut ready: BTreeSet<NodeId> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut topo_order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            topo_order.push(v);
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if topo_order.len() < n {
            let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
            return Err(Error::Cycle(names[stuck].clone()));
        }

        let mut ancestor_sets: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
        let mut depth = vec![0usize; n];
        for &v in &topo_order {
            let mut set = BTreeSet::new();
            let mut d = 1;
            for &p in &parents[v] {
                if p != VIRTUAL_ROOT {
                    set.insert(p);
                    set.extend(ancestor_sets[p].iter().copied());
                    d = d.max(depth[p] + 1);
                }
            }
            ancestor_sets[v] = set;
            depth[v] = d;
        }
        let mut descendants = vec![Vec::new(); n];
        for (v, anc) in ancestor_sets.iter().enumerate() {
            for &a in anc {
                descendants[a].push(v);
            }
        }
        let ancestors = ancestor_sets
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect();

        Ok(Hierarchy {
            names,
            index,
            parents,
            children,
            top_level,
            ancestors,
            descendants,
            topo_order,
            depth,
        })
    }
}

/// Builds a hierarchy from `(parent, child)` name pairs and explicit top-level names.
///
/// Duplicate edges are ignored. Node ids follow first appearance, roots first.
pub fn build_hierarchy<S: AsRef<str>>(edges: &[(S, S)], roots: &[S]) -> Result<Hierarchy> {
    let mut b = HierarchyBuilder::new();
    for r in roots {
        b.root(r.as_ref());
    }
    for (p, c) in edges {
        b.edge(p.as_ref(), c.as_ref());
    }
    b.build()
}

impl Hierarchy {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, l: NodeId) -> &str {
        &self.names[l]
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    /// Parent ids, sorted; may contain [`VIRTUAL_ROOT`].
    pub fn parents(&self, l: NodeId) -> &[NodeId] {
        &self.parents[l]
    }

    /// Parents excluding the virtual root.
    pub fn real_parents(&self, l: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.parents[l].iter().copied().filter(|&p| p != VIRTUAL_ROOT)
    }

    pub fn children(&self, l: NodeId) -> &[NodeId] {
        &self.children[l]
    }

    pub fn top_level(&self) -> &[NodeId] {
        &self.top_level
    }

    pub fn ancestors(&self, l: NodeId) -> &[NodeId] {
        &self.ancestors[l]
    }

    pub fn descendants(&self, l: NodeId) -> &[NodeId] {
        &self.descendants[l]
    }

    pub fn topo_order(&self) -> &[NodeId] {
        &self.topo_order
    }

    /// Longest path length from the virtual root (top-level nodes have depth 1).
    pub fn depth(&self, l: NodeId) -> usize {
        self.depth[l]
    }

    pub fn max_depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(|p| p.len()).sum()
    }

    /// True when some node has more than one parent.
    pub fn is_dag(&self) -> bool {
        self.parents.iter().any(|p| p.len() > 1)
    }

    fn check_len(&self, y: &LabelVector) -> Result<()> {
        if y.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: y.len(),
            });
        }
        Ok(())
    }

    /// Whether every set label has all of its ancestors set.
    pub fn is_consistent(&self, y: &LabelVector) -> Result<bool> {
        self.check_len(y)?;
        Ok(y.ones().all(|l| self.ancestors[l].iter().all(|&a| y.get(a))))
    }

    /// Smallest consistent superset of `y`.
    pub fn ancestor_closure(&self, y: &LabelVector) -> Result<LabelVector> {
        self.check_len(y)?;
        let mut out = y.clone();
        for l in y.ones() {
            for &a in &self.ancestors[l] {
                out.set(a, true);
            }
        }
        Ok(out)
    }

    /// Nodes other than `l` sharing at least one parent with it (the virtual root counts).
    pub fn siblings(&self, l: NodeId) -> Result<Vec<NodeId>> {
        if l >= self.len() {
            return Err(Error::Index(l));
        }
        let mut out = BTreeSet::new();
        for &p in &self.parents[l] {
            let kids = if p == VIRTUAL_ROOT {
                &self.top_level
            } else {
                &self.children[p]
            };
            out.extend(kids.iter().copied().filter(|&c| c != l));
        }
        Ok(out.into_iter().collect())
    }

    /// Strict ancestors grouped by shortest upward distance: entry `r` holds
    /// the ancestors `r + 1` parent edges away.
    pub fn ancestor_levels(&self, l: NodeId) -> Vec<Vec<NodeId>> {
        let mut dist: HashMap<NodeId, usize> = HashMap::new();
        let mut queue = VecDeque::from([(l, 0usize)]);
        let mut levels: Vec<Vec<NodeId>> = Vec::new();
        while let Some((v, d)) = queue.pop_front() {
            for p in self.real_parents(v) {
                if p != l && !dist.contains_key(&p) {
                    dist.insert(p, d + 1);
                    if levels.len() < d + 1 {
                        levels.resize(d + 1, Vec::new());
                    }
                    levels[d].push(p);
                    queue.push_back((p, d + 1));
                }
            }
        }
        for lv in &mut levels {
            lv.sort_unstable();
        }
        levels
    }

    /// Labels set in `y` with no set descendant.
    pub fn most_specific(&self, y: &LabelVector) -> Vec<NodeId> {
        y.ones()
            .filter(|&l| !self.descendants[l].iter().any(|&d| y.get(d)))
            .collect()
    }

    /// Checks that `order` lists every node once with parents before children.
    pub fn is_valid_topo_order(&self, order: &[NodeId]) -> bool {
        if order.len() != self.len() {
            return false;
        }
        let mut pos = vec![usize::MAX; self.len()];
        for (i, &v) in order.iter().enumerate() {
            if v >= self.len() || pos[v] != usize::MAX {
                return false;
            }
            pos[v] = i;
        }
        (0..self.len()).all(|l| self.real_parents(l).all(|p| pos[p] < pos[l]))
    }

    /// Parses the tab-separated hierarchy format.
    ///
    /// Each non-comment line is `parent<TAB>child`, or `root<TAB>name` for a top-level node.
    pub fn parse(text: &str, path: &Path) -> Result<Hierarchy> {
        let mut b = HierarchyBuilder::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(p), Some(c), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(path, i + 1, "expected `parent<TAB>child`"));
            };
            let (p, c) = (p.trim(), c.trim());
            if p.is_empty() || c.is_empty() {
                return Err(Error::parse(path, i + 1, "empty node name"));
            }
            if p == "root" {
                b.root(c);
            } else {
                b.edge(p, c);
            }
        }
        if b.names.is_empty() {
            return Err(Error::parse(path, 0, "hierarchy declares no nodes"));
        }
        b.build()
    }

    pub fn load(path: &Path) -> Result<Hierarchy> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Serializes to the tab-separated format.
    ///
    /// Node ids survive a round trip whenever each node has a parent with a
    /// lower id (or is top-level); otherwise lines follow topological order and
    /// only names are stable.
    pub fn to_text(&self) -> String {
        let preserves_ids = (0..self.len()).all(|l| self.parents[l].iter().any(|&p| p == VIRTUAL_ROOT || p < l));
        if !preserves_ids {
            return self.to_text_edge_order();
        }
        let pname = |p: NodeId| if p == VIRTUAL_ROOT { "root" } else { self.names[p].as_str() };
        let mut out = String::new();
        // One introducing line per node in id order, then the remaining edges.
        let intro: Vec<NodeId> = (0..self.len())
            .map(|l| {
                self.parents[l]
                    .iter()
                    .copied()
                    .find(|&p| p == VIRTUAL_ROOT || p < l)
                    .unwrap_or(VIRTUAL_ROOT)
            })
            .collect();
        for (l, &p) in intro.iter().enumerate() {
            let _ = writeln!(out, "{}\t{}", pname(p), self.names[l]);
        }
        for (l, &first) in intro.iter().enumerate() {
            for &p in &self.parents[l] {
                if p != first {
                    let _ = writeln!(out, "{}\t{}", pname(p), self.names[l]);
                }
            }
        }
        out
    }

    // Used when some node precedes one of its parents in id order. Ids are then
    // only preserved up to relabeling, so names remain the stable key.
    fn to_text_edge_order(&self) -> String {
        let mut out = String::new();
        for &l in &self.topo_order {
            for &p in &self.parents[l] {
                let pname = if p == VIRTUAL_ROOT {
                    "root"
                } else {
                    self.names[p].as_str()
                };
                let _ = writeln!(out, "{pname}\t{}", self.names[l]);
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

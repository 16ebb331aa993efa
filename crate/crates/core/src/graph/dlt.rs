use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Graph, VertexId, VertexLabel};

/// What one vertex holds in a layered tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DltEntry {
    pub label: VertexLabel,
    pub parent: Option<VertexId>,
    pub parent_label: Option<VertexLabel>,
    pub is_root: bool,
}

impl DltEntry {
    pub fn root(label: VertexLabel) -> Self {
        Self {
            label,
            parent: None,
            parent_label: None,
            is_root: true,
        }
    }

    pub fn child(label: VertexLabel, parent: VertexId, parent_label: VertexLabel) -> Self {
        Self {
            label,
            parent: Some(parent),
            parent_label: Some(parent_label),
            is_root: false,
        }
    }
}

/// Per-vertex layered-tree assignment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DltAssignment {
    pub entries: BTreeMap<VertexId, DltEntry>,
}

impl DltAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: VertexId, entry: DltEntry) {
        self.entries.insert(v, entry);
    }

    pub fn get(&self, v: VertexId) -> Option<&DltEntry> {
        self.entries.get(&v)
    }

    pub fn root(&self) -> Option<VertexId> {
        self.entries
            .iter()
            .find(|(_, e)| e.is_root)
            .map(|(&v, _)| v)
    }

    pub fn parent_map(&self) -> BTreeMap<VertexId, Option<VertexId>> {
        self.entries.iter().map(|(&v, e)| (v, e.parent)).collect()
    }

    /// Tree edges `(child, parent)`.
    pub fn tree_edges(&self) -> Vec<(VertexId, VertexId)> {
        self.entries
            .iter()
            .filter_map(|(&v, e)| e.parent.map(|p| (v, p)))
            .collect()
    }

    /// Children lists derived from parent pointers.
    pub fn children(&self) -> BTreeMap<VertexId, Vec<VertexId>> {
        let mut out: BTreeMap<VertexId, Vec<VertexId>> =
            self.entries.keys().map(|&v| (v, Vec::new())).collect();
        for (v, p) in self.tree_edges() {
            out.entry(p).or_default().push(v);
        }
        out
    }

    /// Splits a forest assignment into one assignment per parent-linked component,
    /// keyed by the component's root (or, for broken components, its smallest vertex).
    pub fn components(&self) -> BTreeMap<VertexId, DltAssignment> {
        let mut root_of: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for &start in self.entries.keys() {
            let mut path = Vec::new();
            let mut seen = BTreeSet::new();
            let mut cur = start;
            let top = loop {
                if let Some(&r) = root_of.get(&cur) {
                    break r;
                }
                if !seen.insert(cur) {
                    // Cycle: name it after its smallest member.
                    break *seen.iter().next().unwrap();
                }
                path.push(cur);
                match self.entries.get(&cur).and_then(|e| e.parent) {
                    Some(p) if self.entries.contains_key(&p) => cur = p,
                    _ => break cur,
                }
            };
            for v in path {
                root_of.insert(v, top);
            }
        }
        let mut out: BTreeMap<VertexId, DltAssignment> = BTreeMap::new();
        for (v, r) in root_of {
            out.entry(r).or_default().insert(v, self.entries[&v]);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub vertex: Option<VertexId>,
    pub other: Option<VertexId>,
}

impl Violation {
    fn new(rule: &str, vertex: Option<VertexId>, other: Option<VertexId>) -> Self {
        Self {
            rule: rule.to_string(),
            vertex,
            other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

/// Checks that `a` is a layered spanning tree of `g`.
pub fn validate_dlt(g: &Graph, a: &DltAssignment) -> CheckReport {
    let mut violations = Vec::new();
    for &v in g.vertices() {
        if !a.entries.contains_key(&v) {
            violations.push(Violation::new("missing vertex", Some(v), None));
        }
    }
    for &v in a.entries.keys() {
        if !g.contains(v) {
            violations.push(Violation::new("unknown vertex", Some(v), None));
        }
    }
    violations.extend(check_tree(g, a));
    CheckReport::from_violations(violations)
}

/// Checks that `a` is a layered tree over exactly its own vertex set
/// (used for the components of a forest mid-construction).
pub fn validate_component(g: &Graph, a: &DltAssignment) -> CheckReport {
    let mut violations = Vec::new();
    for &v in a.entries.keys() {
        if !g.contains(v) {
            violations.push(Violation::new("unknown vertex", Some(v), None));
        }
    }
    violations.extend(check_tree(g, a));
    CheckReport::from_violations(violations)
}

fn check_tree(g: &Graph, a: &DltAssignment) -> Vec<Violation> {
    let mut out = Vec::new();
    let roots: Vec<VertexId> = a
        .entries
        .iter()
        .filter(|(_, e)| e.is_root)
        .map(|(&v, _)| v)
        .collect();
    match roots.len() {
        0 => out.push(Violation::new("no root", None, None)),
        1 => {}
        _ => {
            for &r in &roots[1..] {
                out.push(Violation::new("multiple roots", Some(r), Some(roots[0])));
            }
        }
    }
    for (&v, e) in &a.entries {
        match (e.is_root, e.parent) {
            (true, Some(p)) => out.push(Violation::new("root has parent", Some(v), Some(p))),
            (false, None) => out.push(Violation::new("missing parent", Some(v), None)),
            (false, Some(p)) => {
                if !g.has_edge(v, p) {
                    out.push(Violation::new("parent not a neighbor", Some(v), Some(p)));
                }
                match a.entries.get(&p) {
                    None => out.push(Violation::new("parent outside tree", Some(v), Some(p))),
                    Some(pe) => {
                        if e.label <= pe.label {
                            out.push(Violation::new("child label not greater", Some(v), Some(p)));
                        }
                        if e.parent_label != Some(pe.label) {
                            out.push(Violation::new("parent label mismatch", Some(v), Some(p)));
                        }
                    }
                }
            }
            (true, None) => {}
        }
    }
    // Every vertex must reach the unique root along parent links.
    if roots.len() == 1 {
        let root = roots[0];
        let children = a.children();
        let mut reached = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &c in children.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                if reached.insert(c) {
                    queue.push_back(c);
                }
            }
        }
        for &v in a.entries.keys() {
            if !reached.contains(&v) {
                out.push(Violation::new("not connected to root", Some(v), Some(root)));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RerootError {
    #[error("new root {0} is not a tree vertex")]
    RootNotInTree(VertexId),
    #[error("edge set is not a tree ({0})")]
    NotATree(&'static str),
}

/// Levels and parents of a rerooted tree.
pub type Rerooted = (BTreeMap<VertexId, u64>, BTreeMap<VertexId, VertexId>);

/// Tree distance of every vertex from `new_root`, plus the parent of every
/// non-root vertex in the tree rerooted at `new_root`.
pub fn reroot_tree(
    tree_edges: &[(VertexId, VertexId)],
    new_root: VertexId,
) -> Result<Rerooted, RerootError> {
    let mut adj: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for &(u, v) in tree_edges {
        if u == v {
            return Err(RerootError::NotATree("self-loop"));
        }
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    if adj.is_empty() {
        adj.insert(new_root, Vec::new());
    }
    if !adj.contains_key(&new_root) {
        return Err(RerootError::RootNotInTree(new_root));
    }
    if tree_edges.len() + 1 != adj.len() {
        return Err(RerootError::NotATree(
            "edge count is not vertex count minus one",
        ));
    }
    let mut levels = BTreeMap::from([(new_root, 0u64)]);
    let mut parents = BTreeMap::new();
    let mut queue = VecDeque::from([new_root]);
    while let Some(u) = queue.pop_front() {
        let lu = levels[&u];
        for &w in &adj[&u] {
            if let std::collections::btree_map::Entry::Vacant(e) = levels.entry(w) {
                e.insert(lu + 1);
                parents.insert(w, u);
                queue.push_back(w);
            }
        }
    }
    if levels.len() != adj.len() {
        return Err(RerootError::NotATree("disconnected"));
    }
    Ok((levels, parents))
}

/// Levels of all tree vertices after rerooting at `new_root`.
pub fn reroot_levels(
    tree_edges: &[(VertexId, VertexId)],
    new_root: VertexId,
) -> Result<BTreeMap<VertexId, u64>, RerootError> {
    reroot_tree(tree_edges, new_root).map(|(levels, _)| levels)
}

use std::collections::BTreeMap;

use crate::graph::{VertexId, VertexLabel};
use crate::sim::{CandidateEdge, ChoiceKind};

/// The edge a tree connects through: the minimum `(w_tree, w, u)` among
/// candidates leading to a tree with a smaller id. `None` means the tree is a
/// local minimum among its neighbors.
pub fn select_outgoing_edge(candidates: &[CandidateEdge], own_tree: u64) -> Option<CandidateEdge> {
    candidates
        .iter()
        .filter(|c| c.w_tree < own_tree)
        .min_by_key(|c| c.key())
        .copied()
}

/// Minimum cross edge at one vertex, given the labels of its neighbors.
pub fn local_candidate(
    v: VertexId,
    own: VertexLabel,
    neighbor_labels: &BTreeMap<VertexId, VertexLabel>,
) -> Option<CandidateEdge> {
    neighbor_labels
        .iter()
        .filter(|(_, l)| l.tree_id != own.tree_id)
        .map(|(&w, l)| CandidateEdge {
            u: v,
            w,
            w_tree: l.tree_id,
        })
        .min_by_key(CandidateEdge::key)
}

pub fn min_candidate(a: Option<CandidateEdge>, b: Option<CandidateEdge>) -> Option<CandidateEdge> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.key() < x.key() { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// What a tree does this phase, given the best cross edge over all its vertices.
pub fn classify(best: Option<CandidateEdge>, own_tree: u64) -> ChoiceKind {
    match best {
        Some(c) if c.w_tree < own_tree => ChoiceKind::Connect,
        Some(_) => ChoiceKind::LocalMin,
        None => ChoiceKind::Alone,
    }
}

//! Graphs, vertex labels and layered-tree assignments.

mod dlt;
mod generate;
mod io;
mod label;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

pub use dlt::{
    reroot_levels, reroot_tree, validate_component, validate_dlt, CheckReport, DltAssignment,
    DltEntry, RerootError, Violation,
};
pub use generate::{generate_graph, GenerateError, GraphKind};
pub use io::{load_graph, write_graph, LoadError, LoadErrorKind};
pub use label::{label_compare, label_to_round, label_window, LabelRangeError, VertexLabel};

pub type VertexId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {0} appears more than once")]
    DuplicateVertex(VertexId),
    #[error("vertex id {id} is outside the id space [0, {n_hat})")]
    IdOutOfRange { id: VertexId, n_hat: u64 },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge ({0}, {1}) references an undeclared vertex")]
    UnknownEndpoint(VertexId, VertexId),
    #[error("graph is disconnected: vertex {unreachable} is not reachable from {from}")]
    Disconnected {
        from: VertexId,
        unreachable: VertexId,
    },
    #[error("graph has no vertices")]
    Empty,
    #[error("id space bound {n_hat} is smaller than the vertex count {n}")]
    IdSpaceTooSmall { n: usize, n_hat: u64 },
    #[error("id space bound {0} exceeds the supported maximum {MAX_N_HAT}")]
    IdSpaceTooLarge(u64),
}

/// Largest supported id-space bound. Keeps every round number of every
/// protocol comfortably inside `u64`.
pub const MAX_N_HAT: u64 = 1 << 32;

/// Immutable simple undirected graph over distinct ids drawn from `[0, n_hat)`.
///
/// Vertices are stored in ascending id order; the position of a vertex in
/// that order is its *index*, which the simulator uses for dense storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_hat: u64,
    ids: Vec<VertexId>,
    index: BTreeMap<VertexId, usize>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a connected graph. Fails on any invariant violation.
    pub fn new(
        n_hat: u64,
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let g = Self::new_unchecked_connectivity(n_hat, vertices, edges)?;
        g.check_connected()?;
        Ok(g)
    }

    /// Builds a simple graph that may be disconnected (overlay forests, test gadgets).
    pub fn new_unchecked_connectivity(
        n_hat: u64,
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        if n_hat > MAX_N_HAT {
            return Err(GraphError::IdSpaceTooLarge(n_hat));
        }
        let mut ids: Vec<VertexId> = Vec::new();
        let mut seen = BTreeSet::new();
        for v in vertices {
            if !seen.insert(v) {
                return Err(GraphError::DuplicateVertex(v));
            }
            if v >= n_hat {
                return Err(GraphError::IdOutOfRange { id: v, n_hat });
            }
            ids.push(v);
        }
        if ids.is_empty() {
            return Err(GraphError::Empty);
        }
        if (ids.len() as u64) > n_hat {
            return Err(GraphError::IdSpaceTooSmall {
                n: ids.len(),
                n_hat,
            });
        }
        ids.sort_unstable();
        let index: BTreeMap<VertexId, usize> =
            ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut adj_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ids.len()];
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let (Some(&iu), Some(&iv)) = (index.get(&u), index.get(&v)) else {
                return Err(GraphError::UnknownEndpoint(u, v));
            };
            if !adj_sets[iu].insert(iv) {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            adj_sets[iv].insert(iu);
        }
        let adj = adj_sets
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect();
        Ok(Self {
            n_hat,
            ids,
            index,
            adj,
        })
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        let reach = self.reachable_from(0);
        match reach.iter().position(|r| !r) {
            None => Ok(()),
            Some(i) => Err(GraphError::Disconnected {
                from: self.ids[0],
                unreachable: self.ids[i],
            }),
        }
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.ids.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    pub fn is_connected(&self) -> bool {
        self.reachable_from(0).iter().all(|&r| r)
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn n_hat(&self) -> u64 {
        self.n_hat
    }

    /// Vertex ids in ascending order.
    pub fn vertices(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn id_of(&self, index: usize) -> VertexId {
        self.ids[index]
    }

    pub fn index_of(&self, id: VertexId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn contains(&self, id: VertexId) -> bool {
        self.index.contains_key(&id)
    }

    /// Neighbor indices of the vertex at `index`, ascending.
    pub fn neighbor_indices(&self, index: usize) -> &[usize] {
        &self.adj[index]
    }

    /// Neighbor ids of `id`, ascending. Empty if `id` is not a vertex.
    pub fn neighbors(&self, id: VertexId) -> Vec<VertexId> {
        match self.index_of(id) {
            Some(i) => self.adj[i].iter().map(|&j| self.ids[j]).collect(),
            None => Vec::new(),
        }
    }

    pub fn degree(&self, id: VertexId) -> usize {
        self.index_of(id).map_or(0, |i| self.adj[i].len())
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(iu), Some(iv)) => self.adj[iu].binary_search(&iv).is_ok(),
            _ => false,
        }
    }

    /// Every edge once, as `(smaller id, larger id)`, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for (i, nbrs) in self.adj.iter().enumerate() {
            for &j in nbrs {
                if i < j {
                    out.push((self.ids[i], self.ids[j]));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// `⌈log₂ x⌉` for `x ≥ 1`; `0` for `x ≤ 1`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Iterated logarithm: how many times `log₂` must be applied before the value drops to ≤ 1.
pub fn log_star(x: u64) -> u32 {
    let mut v = x as f64;
    let mut k = 0;
    while v > 1.0 {
        v = v.log2();
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            Graph::new(4, [0, 1], [(0, 0)]),
            Err(GraphError::SelfLoop(0))
        );
        assert_eq!(
            Graph::new(4, [0, 1], [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(
            Graph::new(2, [0, 5], [(0, 5)]),
            Err(GraphError::IdOutOfRange { id: 5, n_hat: 2 })
        );
        assert!(matches!(
            Graph::new(4, [0, 1, 2, 3], [(0, 1), (2, 3)]),
            Err(GraphError::Disconnected { .. })
        ));
        assert_eq!(Graph::new(4, [], []), Err(GraphError::Empty));
    }

    #[test]
    fn adjacency_is_symmetric_and_sorted() {
        let g = Graph::new(10, [7, 3, 9], [(9, 3), (3, 7)]).unwrap();
        assert_eq!(g.vertices(), &[3, 7, 9]);
        assert_eq!(g.neighbors(3), vec![7, 9]);
        assert_eq!(g.neighbors(9), vec![3]);
        assert!(g.has_edge(7, 3) && !g.has_edge(7, 9));
        assert_eq!(g.edges(), vec![(3, 7), (3, 9)]);
    }

    #[test]
    fn log_helpers() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(64), 6);
        assert_eq!(log_star(1), 0);
        assert_eq!(log_star(2), 1);
        assert_eq!(log_star(16), 3);
        assert_eq!(log_star(65536), 4);
        assert_eq!(log_star(65537), 5);
    }
}

//! Solve-anything scheme: gather the whole graph at the root, solve locally,
//! scatter the answers.

use std::collections::{BTreeMap, VecDeque};

use super::tree_ops::{checked_layout, EdgeUnion, GatherScatter};
use super::ConstructError;
use crate::graph::{DltAssignment, Graph, VertexId};
use crate::sim::{EngineConfig, LocalView, Payload, RunMetrics};

/// A centralized solver: the full graph and the id of the vertex running it.
pub type Solver = fn(&Graph, VertexId) -> BTreeMap<VertexId, u64>;

pub const UNIVERSAL_SOLVERS: [&str; 4] = [
    "leader-election",
    "edge-count",
    "two-coloring",
    "max-degree",
];

pub fn universal_solver(name: &str) -> Option<Solver> {
    Some(match name {
        "leader-election" => leader,
        "edge-count" => edge_count,
        "two-coloring" => two_coloring,
        "max-degree" => max_degree,
        _ => return None,
    })
}

fn leader(g: &Graph, root: VertexId) -> BTreeMap<VertexId, u64> {
    g.vertices().iter().map(|&v| (v, root)).collect()
}

fn edge_count(g: &Graph, _: VertexId) -> BTreeMap<VertexId, u64> {
    g.vertices()
        .iter()
        .map(|&v| (v, g.edge_count() as u64))
        .collect()
}

fn max_degree(g: &Graph, _: VertexId) -> BTreeMap<VertexId, u64> {
    g.vertices()
        .iter()
        .map(|&v| (v, g.max_degree() as u64))
        .collect()
}

/// BFS parity from the smallest id. Proper exactly when the graph is bipartite.
fn two_coloring(g: &Graph, _: VertexId) -> BTreeMap<VertexId, u64> {
    let start = g.vertices()[0];
    let mut color = BTreeMap::from([(start, 0u64)]);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let cu = color[&u];
        for w in g.neighbors(u) {
            color.entry(w).or_insert_with(|| {
                queue.push_back(w);
                1 - cu
            });
        }
    }
    color
}

#[derive(Debug, Clone)]
pub struct UniversalRun {
    pub outputs: BTreeMap<VertexId, u64>,
    pub metrics: RunMetrics,
}

pub fn solve_universal(
    g: &Graph,
    a: &DltAssignment,
    solver: Solver,
    cfg: &EngineConfig,
) -> Result<UniversalRun, ConstructError> {
    let layout = checked_layout(g, a)?;
    let leaf = |view: &LocalView| EdgeUnion::leaf(view);
    let finish = |view: &LocalView,
                  (vertices, edges): (std::collections::BTreeSet<VertexId>, _)| {
        let learned = Graph::new(view.n_hat, vertices, edges)
            .map_err(|e| format!("gathered topology is not a graph: {e}"))?;
        let outputs = solver(&learned, view.id).into_iter().collect();
        Ok(Payload::Solution {
            root: view.id,
            outputs,
        })
    };
    let extract = |view: &LocalView, p: &Payload| match p {
        Payload::Solution { outputs, .. } => {
            outputs.iter().find(|(v, _)| *v == view.id).map(|&(_, o)| o)
        }
        _ => None,
    };
    let prog = GatherScatter {
        dlt: a,
        layout,
        agg: &EdgeUnion,
        leaf: &leaf,
        finish: &finish,
        extract: &extract,
    };
    let (outputs, metrics) = prog.execute(g, cfg)?;
    Ok(UniversalRun { outputs, metrics })
}

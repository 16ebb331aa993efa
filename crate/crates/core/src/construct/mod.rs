//! Distributed layered tree construction and the tree primitives built on it.

mod connect;
mod layout;
mod select;
mod tree_ops;
mod universal;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{validate_component, DltAssignment, Graph, VertexId, Violation};
use crate::sim::{run_observed, EngineConfig, EngineError, Mode, RunMetrics};
use connect::Connection;
pub use layout::{broadcast_rounds, convergecast_rounds, PhaseLayout, Role, Slot};
pub use select::{classify, local_candidate, min_candidate, select_outgoing_edge};
pub(crate) use tree_ops::checked_layout;
pub use tree_ops::{
    tree_broadcast, tree_convergecast, BroadcastRun, ConvergecastRun, EdgeUnion, GatherScatter,
    Max, Sum, TreeAggregate,
};
pub use universal::{solve_universal, universal_solver, UniversalRun, UNIVERSAL_SOLVERS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("round frame for n = {n}, n̂ = {n_hat} does not fit in 64-bit round numbers")]
    LayoutOverflow { n: u64, n_hat: u64 },
    #[error("input is not a valid layered tree: {0:?}")]
    InvalidDlt(Vec<Violation>),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("mode mismatch: {0} needs {1} mode")]
    ModeMismatch(&'static str, &'static str),
}

/// State of the forest at the end of one connection phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PhaseRecord {
    pub phase: u64,
    pub components: usize,
    /// Every component passes the layered-tree check on its own.
    pub valid: bool,
    pub violations: Vec<Violation>,
    /// Component labels are pairwise distinct.
    pub distinct_tree_ids: bool,
    pub max_awake_increment: u64,
    pub awake_increments: BTreeMap<VertexId, u64>,
    #[serde(skip)]
    pub forest: DltAssignment,
}

#[derive(Debug, Clone)]
pub struct DltRun {
    pub assignment: DltAssignment,
    pub metrics: RunMetrics,
    pub trace: Vec<PhaseRecord>,
    pub layout: PhaseLayout,
}

/// Builds a layered spanning tree in `⌈log₂ n⌉` connection phases. In CONGEST
/// mode every message stays within the configured bit budget: rerooting is
/// done by distance counting instead of shipping tree topology.
pub fn build_dlt(g: &Graph, cfg: &EngineConfig) -> Result<DltRun, ConstructError> {
    let layout =
        PhaseLayout::new(g.n() as u64, g.n_hat()).ok_or(ConstructError::LayoutOverflow {
            n: g.n() as u64,
            n_hat: g.n_hat(),
        })?;
    let prog = Connection {
        layout,
        congest: cfg.mode == Mode::Congest,
    };
    let mut trace = Vec::new();
    let mut prev_awake = vec![0u64; g.n()];
    let result = run_observed(g, &prog, cfg, |view| {
        let (phase, slot, _) = layout.locate(view.round);
        if slot != Slot::FinalLabels {
            return;
        }
        let mut forest = DltAssignment::new();
        for (i, st) in view.states.iter().enumerate() {
            forest.insert(view.graph.id_of(i), st.entry());
        }
        let awake_increments: BTreeMap<VertexId, u64> = view
            .awake
            .iter()
            .zip(&prev_awake)
            .enumerate()
            .map(|(i, (a, p))| (view.graph.id_of(i), a - p))
            .collect();
        prev_awake.copy_from_slice(view.awake);
        trace.push(phase_record(view.graph, phase, forest, awake_increments));
    })?;
    let mut assignment = DltAssignment::new();
    for (v, e) in result.outputs {
        assignment.insert(v, e);
    }
    Ok(DltRun {
        assignment,
        metrics: result.metrics,
        trace,
        layout,
    })
}

pub(crate) fn phase_record(
    g: &Graph,
    phase: u64,
    forest: DltAssignment,
    awake_increments: BTreeMap<VertexId, u64>,
) -> PhaseRecord {
    let comps = forest.components();
    let mut violations = Vec::new();
    let mut ids = BTreeSet::new();
    let mut distinct = true;
    for (root, comp) in &comps {
        violations.extend(validate_component(g, comp).violations);
        let id = comp.get(*root).map(|e| e.label.tree_id);
        distinct &= ids.insert(id);
    }
    PhaseRecord {
        phase,
        components: comps.len(),
        valid: violations.is_empty(),
        violations,
        distinct_tree_ids: distinct,
        max_awake_increment: awake_increments.values().copied().max().unwrap_or(0),
        awake_increments,
        forest,
    }
}

//! Layered tree construction with short tree windows.
//!
//! Labels stay in level form `⟨root id, depth⟩`, so every in-tree broadcast or
//! convergecast fits in `n` rounds. Each phase:
//!
//! 1. every tree finds its minimum cross edge and points at that neighbor tree;
//! 2. the tree reroots at the pointer vertex by distance counting, to give
//!    the pointer vertex a broadcast tree for overlay traffic;
//! 3. the tree-of-trees (mutual pointer pairs rooted at the smaller id) is
//!    3-colored, one global exchange plus one broadcast per step;
//! 4. three marking steps split the overlay into pieces of depth ≤ 2;
//! 5. piece roots keep their labels; middles then leaves relabel below them.

mod layout;
mod overlay;
mod program;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::construct::{phase_record, ConstructError, PhaseRecord};
use crate::graph::{DltAssignment, Graph, VertexId};
use crate::sim::{run_observed, EngineConfig, RunMetrics};
pub use layout::{FastLayout, FastSlot};
pub use overlay::{
    apply_color_step, bounded_depth_partition, color_schedule, mark_step, three_color_overlay,
    ColorStep, DepthTag, Marks, OverlayColoring, OverlayError, OverlayTree, Partition,
};
use program::FastConnection;

/// Frozen regression bounds, measured over generated graphs with n ≤ 512
/// (largest observed ratio: 30 for awake, 24.5 for clock rounds).
/// worstAwake ≤ C₁·⌈log₂ n⌉·log* n̂.
pub const FAST_AWAKE_C: u64 = 32;
/// clockRounds ≤ C₂·n·⌈log₂ n⌉·log* n̂.
pub const FAST_CLOCK_C: u64 = 32;
/// Awake rounds of one vertex in one phase ≤ C₄·log* n̂.
pub const FAST_PHASE_AWAKE_C: u64 = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FastPhaseRecord {
    #[serde(flatten)]
    pub base: PhaseRecord,
    pub overlay_vertices: usize,
    pub overlay_components: usize,
    pub pieces: usize,
    pub max_piece_depth: u32,
    /// The distributed coloring and partition equal the centralized ones.
    pub matches_reference: bool,
}

#[derive(Debug, Clone)]
pub struct FastRun {
    pub assignment: DltAssignment,
    pub metrics: RunMetrics,
    pub trace: Vec<FastPhaseRecord>,
    pub layout: FastLayout,
}

pub fn build_dlt_fast(g: &Graph) -> Result<FastRun, ConstructError> {
    let layout =
        FastLayout::new(g.n() as u64, g.n_hat()).ok_or(ConstructError::LayoutOverflow {
            n: g.n() as u64,
            n_hat: g.n_hat(),
        })?;
    let prog = FastConnection {
        layout: layout.clone(),
    };
    let mut trace = Vec::new();
    let mut prev_awake = vec![0u64; g.n()];
    let final_slot = FastSlot::Labels(3);
    let result = run_observed(g, &prog, &EngineConfig::local(), |view| {
        let (phase, slot, _) = layout.locate(view.round);
        if slot != final_slot {
            return;
        }
        let mut forest = DltAssignment::new();
        let mut notes = BTreeMap::new();
        for (i, st) in view.states.iter().enumerate() {
            forest.insert(view.graph.id_of(i), st.entry());
            if let Some(n) = st.note {
                notes.insert(n.tree, n);
            }
        }
        let awake_increments: BTreeMap<VertexId, u64> = view
            .awake
            .iter()
            .zip(&prev_awake)
            .enumerate()
            .map(|(i, (a, p))| (view.graph.id_of(i), a - p))
            .collect();
        prev_awake.copy_from_slice(view.awake);
        let base = phase_record(view.graph, phase, forest, awake_increments);
        trace.push(overlay_record(base, &notes, view.graph.n_hat()));
    })?;
    let mut assignment = DltAssignment::new();
    for (v, e) in result.outputs {
        assignment.insert(v, e);
    }
    Ok(FastRun {
        assignment,
        metrics: result.metrics,
        trace,
        layout,
    })
}

/// Rebuilds the overlay from per-tree notes and recomputes it centrally.
fn overlay_record(
    base: PhaseRecord,
    notes: &BTreeMap<u64, program::PhaseNote>,
    n_hat: u64,
) -> FastPhaseRecord {
    let ptr: BTreeMap<u64, u64> = notes.values().map(|n| (n.tree, n.target)).collect();
    let mut rec = FastPhaseRecord {
        base,
        overlay_vertices: ptr.len(),
        overlay_components: 0,
        pieces: 0,
        max_piece_depth: 0,
        matches_reference: false,
    };
    let Ok(h) = OverlayTree::from_pointers(&ptr) else {
        return rec;
    };
    rec.overlay_components = h.components();
    let coloring = three_color_overlay(&h, n_hat);
    let Ok(part) = bounded_depth_partition(&h, &coloring.colors) else {
        return rec;
    };
    rec.pieces = part.pieces;
    rec.max_piece_depth = notes.values().map(|n| n.tag as u32).max().unwrap_or(0);
    rec.matches_reference = notes.values().all(|n| {
        n.h_root == h.parent(n.tree).is_none()
            && coloring.colors[&n.tree] == n.color
            && part.tags[&n.tree] == n.tag
            && n.marks.attaches() == part.attach[&n.tree].is_some()
    });
    rec
}

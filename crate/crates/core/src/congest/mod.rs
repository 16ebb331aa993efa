//! Layered trees and aggregate problems under a per-message bit budget.

mod problems;
mod relabel;

use std::collections::BTreeMap;

use crate::construct::{
    build_dlt, checked_layout, ConstructError, DltRun, GatherScatter, TreeAggregate,
};
use crate::graph::{DltAssignment, Graph, VertexId};
use crate::sim::{EngineConfig, LocalView, Mode, Payload, RunMetrics};
pub use problems::{
    ccongest_problem, AverageDegree, CCongestProblem, EdgeCount, LeaderElection, LeafContext,
    PartialSolution, Ratio, CCONGEST_PROBLEMS,
};
pub use relabel::{path_distance_relabel, Relabel};

/// The layered-tree construction in CONGEST mode with the default budget.
pub fn build_dlt_congest(g: &Graph) -> Result<DltRun, ConstructError> {
    build_dlt(g, &EngineConfig::congest_for(g.n_hat()))
}

struct Combiner<'a>(&'a dyn CCongestProblem);

impl TreeAggregate for Combiner<'_> {
    type Value = PartialSolution;
    fn combine(&self, a: &PartialSolution, b: &PartialSolution) -> PartialSolution {
        self.0.combine(*a, *b)
    }
    fn encode(&self, v: &PartialSolution) -> Payload {
        Payload::Partial { a: v.a, b: v.b }
    }
    fn decode(&self, p: &Payload) -> Option<PartialSolution> {
        match *p {
            Payload::Partial { a, b } => Some(PartialSolution { a, b }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CCongestRun {
    pub answers: BTreeMap<VertexId, Ratio>,
    pub metrics: RunMetrics,
}

/// Combines leaf solutions up the tree, then sends the whole solution back down.
pub fn solve_ccongest(
    g: &Graph,
    a: &DltAssignment,
    prob: &dyn CCongestProblem,
    cfg: &EngineConfig,
) -> Result<CCongestRun, ConstructError> {
    if cfg.mode != Mode::Congest {
        return Err(ConstructError::ModeMismatch("ccongest", "congest"));
    }
    let layout = checked_layout(g, a)?;
    let agg = Combiner(prob);
    let leaf = |view: &LocalView| {
        let is_root = a.get(view.id).is_some_and(|e| e.is_root);
        prob.leaf(LeafContext {
            id: view.id,
            degree: view.degree(),
            is_root,
        })
    };
    let finish = |_: &LocalView, whole: PartialSolution| Ok(agg.encode(&whole));
    let extract = |_: &LocalView, p: &Payload| agg.decode(p).map(|s| prob.extract(s));
    let prog = GatherScatter {
        dlt: a,
        layout,
        agg: &agg,
        leaf: &leaf,
        finish: &finish,
        extract: &extract,
    };
    let (answers, metrics) = prog.execute(g, cfg)?;
    Ok(CCongestRun { answers, metrics })
}

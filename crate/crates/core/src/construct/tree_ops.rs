//! Label-scheduled broadcast and convergecast over an existing layered tree.
//!
//! A broadcast wakes each non-root vertex at its parent's label round (to
//! listen) and at its own (to forward); a convergecast mirrors this from the
//! end of the window. Either costs a non-root vertex exactly two awake rounds
//! and the root one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use super::layout::{broadcast_rounds, convergecast_rounds, PhaseLayout, Role};
use super::ConstructError;
use crate::graph::{validate_dlt, DltAssignment, DltEntry, Graph, VertexId};
use crate::sim::{
    run, to_all_neighbors, Control, EngineConfig, Envelope, Init, LocalView, Payload, RunMetrics,
    VertexProgram,
};

/// An associative, commutative combiner with a wire format.
pub trait TreeAggregate {
    type Value: Clone + PartialEq + Debug;
    fn combine(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn encode(&self, v: &Self::Value) -> Payload;
    fn decode(&self, p: &Payload) -> Option<Self::Value>;
}

pub struct Sum;
pub struct Max;

impl TreeAggregate for Sum {
    type Value = u64;
    fn combine(&self, a: &u64, b: &u64) -> u64 {
        a + b
    }
    fn encode(&self, v: &u64) -> Payload {
        Payload::Words(vec![*v])
    }
    fn decode(&self, p: &Payload) -> Option<u64> {
        match p {
            Payload::Words(w) if w.len() == 1 => Some(w[0]),
            _ => None,
        }
    }
}

impl TreeAggregate for Max {
    type Value = u64;
    fn combine(&self, a: &u64, b: &u64) -> u64 {
        *a.max(b)
    }
    fn encode(&self, v: &u64) -> Payload {
        Sum.encode(v)
    }
    fn decode(&self, p: &Payload) -> Option<u64> {
        Sum.decode(p)
    }
}

/// Union of vertex and edge sets; edges are stored as `(smaller, larger)`.
pub struct EdgeUnion;

pub type Topology = (BTreeSet<VertexId>, BTreeSet<(VertexId, VertexId)>);

impl EdgeUnion {
    /// A vertex's own contribution: itself and its incident edges.
    pub fn leaf(view: &LocalView) -> Topology {
        let edges = view
            .neighbors
            .iter()
            .map(|&w| (view.id.min(w), view.id.max(w)))
            .collect();
        (BTreeSet::from([view.id]), edges)
    }
}

impl TreeAggregate for EdgeUnion {
    type Value = Topology;
    fn combine(&self, a: &Topology, b: &Topology) -> Topology {
        (
            a.0.union(&b.0).copied().collect(),
            a.1.union(&b.1).copied().collect(),
        )
    }
    fn encode(&self, v: &Topology) -> Payload {
        Payload::Adjacency {
            vertices: v.0.iter().copied().collect(),
            edges: v.1.iter().copied().collect(),
        }
    }
    fn decode(&self, p: &Payload) -> Option<Topology> {
        match p {
            Payload::Adjacency { vertices, edges } => Some((
                vertices.iter().copied().collect(),
                edges.iter().copied().collect(),
            )),
            _ => None,
        }
    }
}

pub(crate) fn checked_layout(g: &Graph, a: &DltAssignment) -> Result<PhaseLayout, ConstructError> {
    let report = validate_dlt(g, a);
    if !report.ok {
        return Err(ConstructError::InvalidDlt(report.violations));
    }
    PhaseLayout::new(g.n() as u64, g.n_hat()).ok_or(ConstructError::LayoutOverflow {
        n: g.n() as u64,
        n_hat: g.n_hat(),
    })
}

fn entry(a: &DltAssignment, v: VertexId) -> &DltEntry {
    a.get(v).expect("validated assignment covers every vertex")
}

#[derive(Debug, Clone)]
pub struct BroadcastRun {
    pub delivered: BTreeMap<VertexId, Payload>,
    pub metrics: RunMetrics,
}

struct Broadcast<'a> {
    dlt: &'a DltAssignment,
    layout: PhaseLayout,
    payload: &'a Payload,
}

impl VertexProgram for Broadcast<'_> {
    type State = Option<Payload>;
    type Output = Payload;

    fn init(&self, view: &LocalView) -> Init<Option<Payload>, Payload> {
        let e = entry(self.dlt, view.id);
        let held = e.is_root.then(|| self.payload.clone());
        Init::new(
            held,
            broadcast_rounds(&self.layout, e.label, e.parent_label)
                .into_iter()
                .map(|(r, _)| r),
        )
    }

    fn on_send(
        &self,
        view: &LocalView,
        round: u64,
        held: &Option<Payload>,
    ) -> Vec<(VertexId, Payload)> {
        let e = entry(self.dlt, view.id);
        match held {
            Some(p) if round == self.layout.round_of(e.label) => to_all_neighbors(view, p),
            _ => Vec::new(),
        }
    }

    fn on_receive(
        &self,
        view: &LocalView,
        round: u64,
        inbox: &[Envelope],
        held: &mut Option<Payload>,
        ctl: &mut Control<Payload>,
    ) {
        let e = entry(self.dlt, view.id);
        if round == self.layout.round_of(e.label) {
            match held {
                Some(p) => ctl.output(p.clone()),
                None => ctl.fail("nothing to forward"),
            }
        } else if let Some(env) = inbox.iter().find(|env| Some(env.src) == e.parent) {
            *held = env.payloads.first().cloned();
        }
    }
}

/// Delivers `payload` from the root to every vertex of a valid layered tree.
pub fn tree_broadcast(
    g: &Graph,
    a: &DltAssignment,
    payload: &Payload,
    cfg: &EngineConfig,
) -> Result<BroadcastRun, ConstructError> {
    let layout = checked_layout(g, a)?;
    let res = run(
        g,
        &Broadcast {
            dlt: a,
            layout,
            payload,
        },
        cfg,
    )?;
    Ok(BroadcastRun {
        delivered: res.outputs,
        metrics: res.metrics,
    })
}

#[derive(Debug, Clone)]
pub struct ConvergecastRun<V> {
    pub root: VertexId,
    pub value: V,
    pub metrics: RunMetrics,
}

struct Convergecast<'a, A: TreeAggregate> {
    dlt: &'a DltAssignment,
    layout: PhaseLayout,
    agg: &'a A,
    values: &'a BTreeMap<VertexId, A::Value>,
}

impl<A: TreeAggregate> VertexProgram for Convergecast<'_, A> {
    type State = A::Value;
    type Output = A::Value;

    fn init(&self, view: &LocalView) -> Init<A::Value, A::Value> {
        let e = entry(self.dlt, view.id);
        let rounds = convergecast_rounds(&self.layout, e.label, e.parent_label);
        Init::new(
            self.values[&view.id].clone(),
            rounds.into_iter().map(|(r, _)| r),
        )
    }

    fn on_send(&self, view: &LocalView, round: u64, acc: &A::Value) -> Vec<(VertexId, Payload)> {
        let e = entry(self.dlt, view.id);
        match (e.parent, e.parent_label) {
            (Some(p), Some(pl)) if round == self.layout.window - 1 - self.layout.round_of(pl) => {
                vec![(p, self.agg.encode(acc))]
            }
            _ => Vec::new(),
        }
    }

    fn on_receive(
        &self,
        view: &LocalView,
        round: u64,
        inbox: &[Envelope],
        acc: &mut A::Value,
        ctl: &mut Control<A::Value>,
    ) {
        let e = entry(self.dlt, view.id);
        if round != self.layout.window - 1 - self.layout.round_of(e.label) {
            return;
        }
        for env in inbox {
            match env.payloads.first().and_then(|p| self.agg.decode(p)) {
                Some(v) => *acc = self.agg.combine(acc, &v),
                None => ctl.fail(format!("undecodable contribution from {}", env.src)),
            }
        }
        if e.is_root {
            ctl.output(acc.clone());
        }
    }
}

/// Combines every vertex's value at the root. The result is cross-checked
/// against a sequential fold; a mismatch means the combiner is not
/// associative and commutative.
pub fn tree_convergecast<A: TreeAggregate>(
    g: &Graph,
    a: &DltAssignment,
    agg: &A,
    values: &BTreeMap<VertexId, A::Value>,
    cfg: &EngineConfig,
) -> Result<ConvergecastRun<A::Value>, ConstructError> {
    let layout = checked_layout(g, a)?;
    if let Some(&v) = g.vertices().iter().find(|v| !values.contains_key(v)) {
        return Err(ConstructError::Solver(format!("no value for vertex {v}")));
    }
    let res = run(
        g,
        &Convergecast {
            dlt: a,
            layout,
            agg,
            values,
        },
        cfg,
    )?;
    let (root, value) = res
        .outputs
        .into_iter()
        .next()
        .expect("the root always reports");
    let mut seq = values.values();
    let first = seq.next().expect("graphs are non-empty").clone();
    let folded = seq.fold(first, |acc, v| agg.combine(&acc, v));
    if folded != value {
        return Err(ConstructError::Solver(
            "aggregator is not associative and commutative".into(),
        ));
    }
    Ok(ConvergecastRun {
        root,
        value,
        metrics: res.metrics,
    })
}

type LeafFn<'a, V> = dyn Fn(&LocalView) -> V + 'a;
type FinishFn<'a, V> = dyn Fn(&LocalView, V) -> Result<Payload, String> + 'a;
type ExtractFn<'a, O> = dyn Fn(&LocalView, &Payload) -> Option<O> + 'a;

/// Convergecast followed by broadcast: the root turns the aggregate into one
/// answer payload and every vertex extracts its own output from it.
pub struct GatherScatter<'a, A: TreeAggregate, O> {
    pub dlt: &'a DltAssignment,
    pub layout: PhaseLayout,
    pub agg: &'a A,
    pub leaf: &'a LeafFn<'a, A::Value>,
    pub finish: &'a FinishFn<'a, A::Value>,
    pub extract: &'a ExtractFn<'a, O>,
}

pub struct GsState<V> {
    acc: Option<V>,
    answer: Option<Payload>,
}

impl<A: TreeAggregate, O> GatherScatter<'_, A, O> {
    fn rounds(&self, e: &DltEntry) -> Vec<(u64, Role)> {
        let w = self.layout.window;
        let mut out = convergecast_rounds(&self.layout, e.label, e.parent_label);
        out.extend(
            broadcast_rounds(&self.layout, e.label, e.parent_label)
                .into_iter()
                .map(|(r, role)| (w + r, role)),
        );
        out
    }
}

impl<A: TreeAggregate, O> VertexProgram for GatherScatter<'_, A, O> {
    type State = GsState<A::Value>;
    type Output = O;

    fn init(&self, view: &LocalView) -> Init<Self::State, O> {
        let e = entry(self.dlt, view.id);
        Init::new(
            GsState {
                acc: Some((self.leaf)(view)),
                answer: None,
            },
            self.rounds(e).into_iter().map(|(r, _)| r),
        )
    }

    fn on_send(&self, view: &LocalView, round: u64, st: &Self::State) -> Vec<(VertexId, Payload)> {
        let e = entry(self.dlt, view.id);
        let w = self.layout.window;
        let Some(&(_, role)) = self.rounds(e).iter().find(|(r, _)| *r == round) else {
            return Vec::new();
        };
        match (role, round < w) {
            (Role::Send, true) => match (e.parent, &st.acc) {
                (Some(p), Some(acc)) => vec![(p, self.agg.encode(acc))],
                _ => Vec::new(),
            },
            (Role::Send, false) => st
                .answer
                .as_ref()
                .map_or_else(Vec::new, |a| to_all_neighbors(view, a)),
            _ => Vec::new(),
        }
    }

    fn on_receive(
        &self,
        view: &LocalView,
        round: u64,
        inbox: &[Envelope],
        st: &mut Self::State,
        ctl: &mut Control<O>,
    ) {
        let e = entry(self.dlt, view.id);
        let w = self.layout.window;
        let Some(&(_, role)) = self.rounds(e).iter().find(|(r, _)| *r == round) else {
            return;
        };
        match (role, round < w) {
            (Role::Receive, true) => {
                let mut acc = st
                    .acc
                    .take()
                    .expect("leaf value present until the gather ends");
                for env in inbox {
                    match env.payloads.first().and_then(|p| self.agg.decode(p)) {
                        Some(v) => acc = self.agg.combine(&acc, &v),
                        None => ctl.fail(format!("undecodable contribution from {}", env.src)),
                    }
                }
                if e.is_root {
                    match (self.finish)(view, acc) {
                        Ok(p) => st.answer = Some(p),
                        Err(msg) => ctl.fail(msg),
                    }
                } else {
                    st.acc = Some(acc);
                }
            }
            (Role::Receive, false) => {
                st.answer = inbox
                    .iter()
                    .find(|env| Some(env.src) == e.parent)
                    .and_then(|env| env.payloads.first().cloned());
            }
            (Role::Send, false) => match st.answer.as_ref().and_then(|a| (self.extract)(view, a)) {
                Some(o) => ctl.output(o),
                None => ctl.fail("no answer for this vertex"),
            },
            (Role::Send, true) => {}
        }
    }
}

impl<A: TreeAggregate, O> GatherScatter<'_, A, O> {
    pub fn execute(
        &self,
        g: &Graph,
        cfg: &EngineConfig,
    ) -> Result<(BTreeMap<VertexId, O>, RunMetrics), ConstructError> {
        let res = run(g, self, cfg)?;
        Ok((res.outputs, res.metrics))
    }
}

//! Synchronous-round executor for the sleeping model.
//!
//! Every vertex commits to its wake rounds ahead of time: the initial set comes
//! from [`VertexProgram::init`], and further rounds can only be added while the
//! vertex is awake, strictly in the future. In each processed round all awake
//! vertices first send (against their pre-round state), then every message whose
//! destination is also awake is delivered, then all awake vertices receive.
//! Messages to sleeping vertices are lost. Rounds in which nobody is awake are
//! skipped without cost, so protocols with huge sparse schedules stay cheap.

mod bits;
mod metrics;
pub mod payload;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ceil_log2, Graph, VertexId};
pub use metrics::{MetricsRecord, RunMetrics};
pub use payload::{CandidateEdge, ChoiceKind, Codec, CodecError, Payload, PlanEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Local,
    Congest,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Local => "local",
            Mode::Congest => "congest",
        }
    }
}

pub const DEFAULT_MAX_CLOCK_ROUNDS: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub mode: Mode,
    /// Maximum bits per message; only enforced in CONGEST mode.
    pub bit_budget: u64,
    pub max_clock_rounds: u64,
}

impl EngineConfig {
    pub fn local() -> Self {
        Self {
            mode: Mode::Local,
            bit_budget: u64::MAX,
            max_clock_rounds: DEFAULT_MAX_CLOCK_ROUNDS,
        }
    }

    pub fn congest(bit_budget: u64) -> Self {
        Self {
            mode: Mode::Congest,
            bit_budget,
            max_clock_rounds: DEFAULT_MAX_CLOCK_ROUNDS,
        }
    }

    /// CONGEST mode with the default budget for this id space.
    pub fn congest_for(n_hat: u64) -> Self {
        Self::congest(default_bit_budget(n_hat))
    }

    pub fn with_max_clock_rounds(mut self, cap: u64) -> Self {
        self.max_clock_rounds = cap;
        self
    }
}

/// `4·⌈log₂ n̂⌉ + 32`: one label, one distance and a fixed header.
pub fn default_bit_budget(n_hat: u64) -> u64 {
    4 * ceil_log2(n_hat) as u64 + 32
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("run exceeded the clock-round cap of {cap} (next round {round})")]
    ClockLimit { cap: u64, round: u64 },
    #[error("vertex {vertex} tried to schedule round {requested} while awake at round {round}")]
    ScheduleBreach {
        vertex: VertexId,
        round: u64,
        requested: u64,
    },
    #[error("round {round}: {src} -> {dst} is {bits} bits (budget {budget}, kinds {kinds})")]
    BitBudgetExceeded {
        src: VertexId,
        dst: VertexId,
        round: u64,
        bits: u64,
        budget: u64,
        kinds: String,
    },
    #[error("round {round}: {src} sent to non-neighbor {dst}")]
    NotANeighbor {
        src: VertexId,
        dst: VertexId,
        round: u64,
    },
    #[error("round {round}: cannot encode message {src} -> {dst}: {error}")]
    Encode {
        src: VertexId,
        dst: VertexId,
        round: u64,
        error: CodecError,
    },
    #[error("round {round}: vertex {vertex} violated a protocol invariant: {detail}")]
    Protocol {
        vertex: VertexId,
        round: u64,
        detail: String,
    },
}

/// What a vertex knows about its surroundings before any communication.
#[derive(Debug, Clone, Copy)]
pub struct LocalView<'a> {
    pub id: VertexId,
    pub neighbors: &'a [VertexId],
    pub n: usize,
    pub n_hat: u64,
}

impl LocalView<'_> {
    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }
}

/// All payloads one neighbor sent this round, in send order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub src: VertexId,
    pub payloads: Vec<Payload>,
}

pub struct Init<S, O> {
    pub state: S,
    pub wake: Vec<u64>,
    pub output: Option<O>,
}

impl<S, O> Init<S, O> {
    pub fn new(state: S, wake: impl IntoIterator<Item = u64>) -> Self {
        Self {
            state,
            wake: wake.into_iter().collect(),
            output: None,
        }
    }

    pub fn with_output(mut self, output: O) -> Self {
        self.output = Some(output);
        self
    }
}

/// Side effects available while receiving.
pub struct Control<O> {
    round: u64,
    wake: Vec<u64>,
    output: Option<O>,
    fault: Option<String>,
}

impl<O> Control<O> {
    pub fn round(&self) -> u64 {
        self.round
    }

    /// Commits to being awake at `round`, which must lie in the future.
    pub fn wake_at(&mut self, round: u64) {
        self.wake.push(round);
    }

    pub fn output(&mut self, value: O) {
        self.output = Some(value);
    }

    /// Aborts the run with a protocol-invariant violation.
    pub fn fail(&mut self, detail: impl Into<String>) {
        self.fault.get_or_insert(detail.into());
    }
}

pub trait VertexProgram {
    type State;
    type Output;

    fn init(&self, view: &LocalView) -> Init<Self::State, Self::Output>;

    /// Outgoing payloads for this round. Several payloads to the same neighbor
    /// are concatenated into one message.
    fn on_send(
        &self,
        view: &LocalView,
        round: u64,
        state: &Self::State,
    ) -> Vec<(VertexId, Payload)>;

    fn on_receive(
        &self,
        view: &LocalView,
        round: u64,
        inbox: &[Envelope],
        state: &mut Self::State,
        ctl: &mut Control<Self::Output>,
    );
}

/// Snapshot handed to a run observer after each processed round.
pub struct RoundView<'a, S> {
    pub round: u64,
    pub graph: &'a Graph,
    /// Indexed like `graph.vertices()`.
    pub states: &'a [S],
    pub awake: &'a [u64],
}

#[derive(Debug, Clone)]
pub struct RunResult<O> {
    pub outputs: BTreeMap<VertexId, O>,
    pub metrics: RunMetrics,
}

pub fn run<P: VertexProgram>(
    g: &Graph,
    prog: &P,
    cfg: &EngineConfig,
) -> Result<RunResult<P::Output>, EngineError> {
    run_observed(g, prog, cfg, |_| {})
}

pub fn run_observed<P, F>(
    g: &Graph,
    prog: &P,
    cfg: &EngineConfig,
    mut observe: F,
) -> Result<RunResult<P::Output>, EngineError>
where
    P: VertexProgram,
    F: FnMut(&RoundView<P::State>),
{
    let n = g.n();
    let codec = Codec::new(g.n_hat());
    let nbr_ids: Vec<Vec<VertexId>> = (0..n)
        .map(|i| g.neighbor_indices(i).iter().map(|&j| g.id_of(j)).collect())
        .collect();
    let view = |i: usize| LocalView {
        id: g.id_of(i),
        neighbors: &nbr_ids[i],
        n,
        n_hat: g.n_hat(),
    };

    let mut states = Vec::with_capacity(n);
    let mut outputs: Vec<Option<P::Output>> = Vec::with_capacity(n);
    let mut agenda: BTreeMap<u64, BTreeSet<usize>> = BTreeMap::new();
    for i in 0..n {
        let init = prog.init(&view(i));
        for r in init.wake {
            agenda.entry(r).or_default().insert(i);
        }
        states.push(init.state);
        outputs.push(init.output);
    }

    let mut awake = vec![0u64; n];
    let mut total_messages = 0u64;
    let mut total_bits = 0u64;
    let mut max_bits = 0u64;
    let mut last_round: Option<u64> = None;
    let mut is_awake = vec![false; n];

    while let Some((round, set)) = agenda.pop_first() {
        if outputs.iter().all(Option::is_some) {
            break;
        }
        if round >= cfg.max_clock_rounds {
            return Err(EngineError::ClockLimit {
                cap: cfg.max_clock_rounds,
                round,
            });
        }
        let members: Vec<usize> = set.into_iter().collect();
        for &i in &members {
            is_awake[i] = true;
        }

        // Send sub-step: everything is computed from pre-round state.
        let mut inboxes: BTreeMap<usize, Vec<Envelope>> = BTreeMap::new();
        for &i in &members {
            let sends = prog.on_send(&view(i), round, &states[i]);
            let mut grouped: BTreeMap<VertexId, Vec<Payload>> = BTreeMap::new();
            for (dst, p) in sends {
                grouped.entry(dst).or_default().push(p);
            }
            let src = g.id_of(i);
            for (dst, payloads) in grouped {
                let Some(j) = g.index_of(dst).filter(|_| g.has_edge(src, dst)) else {
                    return Err(EngineError::NotANeighbor { src, dst, round });
                };
                let mut bytes = Vec::new();
                for p in &payloads {
                    let enc = codec.encode(p).map_err(|error| EngineError::Encode {
                        src,
                        dst,
                        round,
                        error,
                    })?;
                    bytes.extend(enc);
                }
                let bits = 8 * bytes.len() as u64;
                if cfg.mode == Mode::Congest && bits > cfg.bit_budget {
                    let kinds: BTreeSet<&str> = payloads.iter().map(Payload::kind_name).collect();
                    let kinds = kinds.into_iter().collect::<Vec<_>>().join("+");
                    return Err(EngineError::BitBudgetExceeded {
                        src,
                        dst,
                        round,
                        bits,
                        budget: cfg.bit_budget,
                        kinds,
                    });
                }
                total_messages += 1;
                total_bits += bits;
                max_bits = max_bits.max(bits);
                if is_awake[j] {
                    // The receiver sees exactly what the wire carries.
                    let decoded =
                        codec
                            .decode_all(&bytes)
                            .map_err(|error| EngineError::Encode {
                                src,
                                dst,
                                round,
                                error,
                            })?;
                    debug_assert_eq!(decoded, payloads);
                    inboxes.entry(j).or_default().push(Envelope {
                        src,
                        payloads: decoded,
                    });
                }
            }
        }

        // Receive sub-step.
        for &i in &members {
            let inbox = inboxes.remove(&i).unwrap_or_default();
            let mut ctl = Control {
                round,
                wake: Vec::new(),
                output: None,
                fault: None,
            };
            prog.on_receive(&view(i), round, &inbox, &mut states[i], &mut ctl);
            let vertex = g.id_of(i);
            if let Some(detail) = ctl.fault {
                return Err(EngineError::Protocol {
                    vertex,
                    round,
                    detail,
                });
            }
            for r in ctl.wake {
                if r <= round {
                    return Err(EngineError::ScheduleBreach {
                        vertex,
                        round,
                        requested: r,
                    });
                }
                agenda.entry(r).or_default().insert(i);
            }
            if let Some(o) = ctl.output {
                outputs[i] = Some(o);
            }
            awake[i] += 1;
        }
        for &i in &members {
            is_awake[i] = false;
        }
        last_round = Some(round);
        observe(&RoundView {
            round,
            graph: g,
            states: &states,
            awake: &awake,
        });
    }

    let metrics = RunMetrics::new(
        g,
        cfg.mode,
        awake,
        last_round.map_or(0, |r| r + 1),
        total_messages,
        max_bits,
        total_bits,
    );
    if !metrics.message_bound_holds(g) {
        return Err(EngineError::Protocol {
            vertex: g.id_of(0),
            round: last_round.unwrap_or(0),
            detail: "message count exceeds the sum of awake rounds times degree".into(),
        });
    }
    let outputs = outputs
        .into_iter()
        .enumerate()
        .filter_map(|(i, o)| o.map(|o| (g.id_of(i), o)))
        .collect();
    Ok(RunResult { outputs, metrics })
}

/// Sends the same payload to every neighbor: the communication pattern of a
/// round in which the whole graph is awake.
pub fn to_all_neighbors(view: &LocalView, payload: &Payload) -> Vec<(VertexId, Payload)> {
    view.neighbors
        .iter()
        .map(|&w| (w, payload.clone()))
        .collect()
}

/// The single payload from `src` in `inbox`, if it sent exactly one.
pub fn single_from(inbox: &[Envelope], src: VertexId) -> Option<&Payload> {
    inbox
        .iter()
        .find(|e| e.src == src)
        .and_then(|e| e.payloads.first())
}

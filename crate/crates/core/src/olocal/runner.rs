use std::collections::BTreeMap;

use super::linial::{plan, recolor, Step};
use super::problems::{DecisionContext, OLocalProblem};
use super::schedule_tree::{build_schedule_tree, ScheduleTree};
use crate::graph::{Graph, VertexId};
use crate::sim::{
    run, Control, EngineConfig, EngineError, Envelope, Init, LocalView, Payload, RunMetrics,
    VertexProgram,
};

/// A proper coloring with colors in `1..=q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorAssignment {
    pub colors: BTreeMap<VertexId, u64>,
    pub q: u64,
    /// Clock rounds of the coloring epoch, all vertices awake throughout.
    pub rounds_used: u64,
}

impl ColorAssignment {
    pub fn is_proper(&self, g: &Graph) -> bool {
        g.edges()
            .iter()
            .all(|(u, w)| self.colors[u] != self.colors[w])
    }
}

/// Coloring parameters every vertex derives from `n̂` and `Δ` alone.
#[derive(Debug, Clone)]
struct Epoch {
    steps: Vec<Step>,
    q: u64,
    delta: usize,
}

impl Epoch {
    fn new(g: &Graph) -> Self {
        let delta = g.max_degree();
        let (steps, m) = plan(g.n_hat(), delta as u64);
        // With Δ = 1 the graph is one edge, whose ends rank themselves while
        // announcing their colors.
        let m = if delta == 1 { 2 } else { m };
        Self {
            steps,
            q: m.next_power_of_two().max(2),
            delta,
        }
    }

    /// Recoloring rounds plus one round announcing the final colors.
    fn rounds(&self) -> u64 {
        self.steps.len() as u64 + 1
    }

    fn tree(&self) -> ScheduleTree {
        build_schedule_tree(self.q).expect("q is a power of two ≥ 2")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OLocalOutcome {
    pub color: u64,
    pub decision: Option<u64>,
}

#[derive(Debug, Clone, Default)]
struct OState {
    /// Zero-based working color during recoloring, then the final 1-based color.
    color: u64,
    nbr_colors: BTreeMap<VertexId, u64>,
    last_round: u64,
    decision: Option<u64>,
    heard: BTreeMap<VertexId, Option<u64>>,
    known: BTreeMap<VertexId, u64>,
}

struct OLocal<'a> {
    epoch: Epoch,
    tree: ScheduleTree,
    problem: Option<&'a dyn OLocalProblem>,
}

impl OLocal<'_> {
    fn wakes(&self, color: u64) -> Vec<u64> {
        let s = self.epoch.rounds() - 1;
        let w = self.tree.wake_rounds(color).expect("color within [1, q]");
        w.sorted().into_iter().map(|r| s + r).collect()
    }

    fn in_coloring_epoch(&self, round: u64) -> bool {
        round < self.epoch.rounds()
    }
}

impl VertexProgram for OLocal<'_> {
    type State = OState;
    type Output = OLocalOutcome;

    fn init(&self, view: &LocalView) -> Init<OState, OLocalOutcome> {
        let color = if self.epoch.delta == 0 { 0 } else { view.id };
        Init::new(
            OState {
                color,
                ..OState::default()
            },
            0..self.epoch.rounds(),
        )
    }

    fn on_send(&self, view: &LocalView, round: u64, st: &OState) -> Vec<(VertexId, Payload)> {
        if self.in_coloring_epoch(round) {
            return crate::sim::to_all_neighbors(view, &Payload::Color(st.color));
        }
        let s = round - (self.epoch.rounds() - 1);
        let known = if self.problem.is_some_and(|p| p.transitive()) {
            st.known.iter().map(|(&k, &v)| (k, v)).collect()
        } else {
            Vec::new()
        };
        let status = Payload::Status {
            color: st.color,
            decision: st.decision,
            known,
        };
        // Only neighbors whose path shares this round are awake to hear it.
        st.nbr_colors
            .iter()
            .filter(|(_, &c)| self.tree.wake_rounds(c).is_ok_and(|w| w.path.contains(&s)))
            .map(|(&w, _)| (w, status.clone()))
            .collect()
    }

    fn on_receive(
        &self,
        view: &LocalView,
        round: u64,
        inbox: &[Envelope],
        st: &mut OState,
        ctl: &mut Control<OLocalOutcome>,
    ) {
        let rounds = self.epoch.rounds();
        if round < rounds {
            let mut nbr = Vec::with_capacity(view.degree());
            for &w in view.neighbors {
                match crate::sim::single_from(inbox, w) {
                    Some(&Payload::Color(c)) => nbr.push((w, c)),
                    _ => return ctl.fail(format!("no color from neighbor {w}")),
                }
            }
            if round + 1 < rounds {
                let others: Vec<u64> = nbr.iter().map(|&(_, c)| c).collect();
                match recolor(st.color, &others, self.epoch.steps[round as usize]) {
                    Some(c) => st.color = c,
                    None => ctl.fail(format!("recoloring step {round} found no free point")),
                }
                return;
            }
            st.color += 1;
            st.nbr_colors = nbr.into_iter().map(|(w, c)| (w, c + 1)).collect();
            if self.epoch.delta == 1 {
                let (&w, &c) = st.nbr_colors.iter().next().expect("Δ = 1");
                let mine = if st.color < c { 1 } else { 2 };
                st.color = mine;
                st.nbr_colors.insert(w, 3 - mine);
            }
            if let Some((w, _)) = st.nbr_colors.iter().find(|(_, &c)| c == st.color) {
                return ctl.fail(format!("neighbor {w} shares color {}", st.color));
            }
            if self.problem.is_none() {
                return ctl.output(OLocalOutcome {
                    color: st.color,
                    decision: None,
                });
            }
            let wakes = self.wakes(st.color);
            st.last_round = *wakes.last().expect("paths are nonempty");
            for r in wakes {
                ctl.wake_at(r);
            }
            return;
        }

        let problem = self
            .problem
            .expect("only the coloring epoch runs without a problem");
        let s = round - (rounds - 1);
        for env in inbox {
            let Some(&c) = st.nbr_colors.get(&env.src) else {
                continue;
            };
            for p in &env.payloads {
                if let Payload::Status {
                    decision, known, ..
                } = p
                {
                    st.heard.insert(env.src, *decision);
                    if problem.transitive() && c < st.color {
                        st.known.extend(known.iter().copied());
                        if let Some(d) = decision {
                            st.known.insert(env.src, *d);
                        }
                    }
                }
            }
        }
        if s == 2 * st.color - 1 {
            let mut out = BTreeMap::new();
            for (&w, &c) in &st.nbr_colors {
                if c >= st.color {
                    continue;
                }
                match st.heard.get(&w).copied().flatten() {
                    Some(d) => {
                        out.insert(w, d);
                    }
                    None => {
                        return ctl.fail(format!("out-neighbor {w} (color {c}) undecided at decision round {s} of color {}", st.color));
                    }
                }
            }
            let ctx = DecisionContext {
                id: view.id,
                degree: view.degree(),
                max_degree: self.epoch.delta,
                out: &out,
                known: &st.known,
            };
            match problem.decide(&ctx) {
                Some(d) => st.decision = Some(d),
                None => return ctl.fail(format!("{} could not decide", problem.name())),
            }
        }
        if round == st.last_round {
            ctl.output(OLocalOutcome {
                color: st.color,
                decision: st.decision,
            });
        }
    }
}

type Outcome = (ColorAssignment, BTreeMap<VertexId, Option<u64>>, RunMetrics);

fn execute(g: &Graph, problem: Option<&dyn OLocalProblem>) -> Result<Outcome, EngineError> {
    let epoch = Epoch::new(g);
    let prog = OLocal {
        tree: epoch.tree(),
        epoch,
        problem,
    };
    let res = run(g, &prog, &EngineConfig::local())?;
    let colors = res.outputs.iter().map(|(&v, o)| (v, o.color)).collect();
    let decisions = res.outputs.iter().map(|(&v, o)| (v, o.decision)).collect();
    let assignment = ColorAssignment {
        colors,
        q: prog.epoch.q,
        rounds_used: prog.epoch.rounds(),
    };
    Ok((assignment, decisions, res.metrics))
}

pub fn linial_coloring(g: &Graph) -> Result<(ColorAssignment, RunMetrics), EngineError> {
    let (colors, _, metrics) = execute(g, None)?;
    Ok((colors, metrics))
}

#[derive(Debug, Clone)]
pub struct OLocalRun {
    pub decisions: BTreeMap<VertexId, u64>,
    pub coloring: ColorAssignment,
    /// Awake rounds spent after the coloring epoch.
    pub post_coloring_awake: BTreeMap<VertexId, u64>,
    pub metrics: RunMetrics,
}

pub fn run_olocal(g: &Graph, problem: &dyn OLocalProblem) -> Result<OLocalRun, EngineError> {
    let (coloring, decisions, metrics) = execute(g, Some(problem))?;
    let decisions = decisions
        .into_iter()
        .map(|(v, d)| (v, d.expect("every vertex decides at its leaf round")))
        .collect();
    let post_coloring_awake = metrics
        .awake_per_vertex
        .iter()
        .map(|(&v, &a)| (v, a - coloring.rounds_used))
        .collect();
    Ok(OLocalRun {
        decisions,
        coloring,
        post_coloring_awake,
        metrics,
    })
}

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use sleeping_core::graph::{generate_graph, Graph, GraphKind, VertexId, VertexLabel};
use sleeping_core::sim::{
    run, to_all_neighbors, Control, EngineConfig, EngineError, Envelope, Init, LocalView, Payload,
    VertexProgram,
};

/// Each vertex wakes at a fixed script of rounds, sends its id as a distance to
/// every neighbor, and after hearing from a neighbor `s` at round `r` also
/// commits to round `r + 1 + s % 3` (if below `horizon`).
struct Script {
    wake: BTreeMap<VertexId, Vec<u64>>,
    horizon: u64,
}

type Log = Vec<(u64, VertexId, Vec<Payload>)>;

impl VertexProgram for Script {
    type State = Log;
    type Output = ();

    fn init(&self, view: &LocalView) -> Init<Log, ()> {
        Init::new(Vec::new(), self.wake[&view.id].clone())
    }

    fn on_send(&self, view: &LocalView, _round: u64, _state: &Log) -> Vec<(VertexId, Payload)> {
        to_all_neighbors(view, &Payload::Distance(view.id))
    }

    fn on_receive(
        &self,
        _view: &LocalView,
        round: u64,
        inbox: &[Envelope],
        state: &mut Log,
        ctl: &mut Control<()>,
    ) {
        for e in inbox {
            state.push((round, e.src, e.payloads.clone()));
            let next = round + 1 + e.src % 3;
            if next < self.horizon {
                ctl.wake_at(next);
            }
        }
    }
}

/// Runs `Script` by stepping through every round one at a time.
fn reference(
    g: &Graph,
    s: &Script,
) -> (BTreeMap<VertexId, Log>, BTreeMap<VertexId, u64>, u64, u64) {
    let mut sched: BTreeMap<VertexId, BTreeSet<u64>> = g
        .vertices()
        .iter()
        .map(|&v| (v, s.wake[&v].iter().copied().collect()))
        .collect();
    let mut logs: BTreeMap<VertexId, Log> = g.vertices().iter().map(|&v| (v, Vec::new())).collect();
    let mut awake: BTreeMap<VertexId, u64> = g.vertices().iter().map(|&v| (v, 0)).collect();
    let mut messages = 0;
    let mut last = None;
    let cap = sched
        .values()
        .flat_map(|s| s.iter().copied())
        .max()
        .unwrap_or(0)
        .max(s.horizon);
    for r in 0..=cap {
        let up: BTreeSet<VertexId> = sched
            .iter()
            .filter(|(_, s)| s.contains(&r))
            .map(|(&v, _)| v)
            .collect();
        if up.is_empty() {
            continue;
        }
        last = Some(r);
        for &u in &up {
            for w in g.neighbors(u) {
                messages += 1;
                if up.contains(&w) {
                    logs.get_mut(&w)
                        .unwrap()
                        .push((r, u, vec![Payload::Distance(u)]));
                    let next = r + 1 + u % 3;
                    if next < s.horizon {
                        sched.get_mut(&w).unwrap().insert(next);
                    }
                }
            }
        }
        for &u in &up {
            *awake.get_mut(&u).unwrap() += 1;
        }
    }
    (logs, awake, messages, last.map_or(0, |r| r + 1))
}

/// Runs `Script` on the engine but keeps the final logs through an observer.
fn engine_logs(g: &Graph, s: &Script) -> (BTreeMap<VertexId, Log>, sleeping_core::sim::RunMetrics) {
    let mut last: BTreeMap<VertexId, Log> = g.vertices().iter().map(|&v| (v, Vec::new())).collect();
    let res = sleeping_core::sim::run_observed(g, s, &EngineConfig::local(), |view| {
        for (i, st) in view.states.iter().enumerate() {
            last.insert(view.graph.id_of(i), st.clone());
        }
    })
    .unwrap();
    (last, res.metrics)
}

fn script(g: &Graph, rounds: &[Vec<u64>], horizon: u64) -> Script {
    let wake = g
        .vertices()
        .iter()
        .zip(rounds)
        .map(|(&v, r)| (v, r.clone()))
        .collect();
    Script { wake, horizon }
}

#[test]
fn noop_program_costs_one_round() {
    let g = generate_graph(GraphKind::Ring, 5, None, 0).unwrap();
    struct Halt;
    impl VertexProgram for Halt {
        type State = ();
        type Output = ();
        fn init(&self, _: &LocalView) -> Init<(), ()> {
            Init::new((), [0])
        }
        fn on_send(&self, _: &LocalView, _: u64, _: &()) -> Vec<(VertexId, Payload)> {
            Vec::new()
        }
        fn on_receive(
            &self,
            _: &LocalView,
            _: u64,
            _: &[Envelope],
            _: &mut (),
            ctl: &mut Control<()>,
        ) {
            ctl.output(());
        }
    }
    let m = run(&g, &Halt, &EngineConfig::local()).unwrap().metrics;
    assert_eq!((m.clock_rounds, m.worst_awake, m.total_messages), (1, 1, 0));
}

#[test]
fn same_round_delivery_and_loss_to_sleepers() {
    let g = Graph::new(2, [0, 1], [(0, 1)]).unwrap();
    // Both awake at 3: each hears the other.
    let (logs, _) = engine_logs(&g, &script(&g, &[vec![3], vec![3]], 0));
    assert_eq!(logs[&1], vec![(3, 0, vec![Payload::Distance(0)])]);
    // 0 awake at 3, 1 only at 4: nothing arrives.
    let (logs, m) = engine_logs(&g, &script(&g, &[vec![3], vec![4]], 0));
    assert!(logs[&1].is_empty() && logs[&0].is_empty());
    assert_eq!(m.total_messages, 2);
    assert_eq!(m.clock_rounds, 5);
}

#[test]
fn global_wake_exchanges_with_every_neighbor() {
    struct Exchange;
    impl VertexProgram for Exchange {
        type State = BTreeMap<VertexId, VertexLabel>;
        type Output = BTreeMap<VertexId, VertexLabel>;
        fn init(&self, _: &LocalView) -> Init<Self::State, Self::Output> {
            Init::new(BTreeMap::new(), [7])
        }
        fn on_send(&self, view: &LocalView, _: u64, _: &Self::State) -> Vec<(VertexId, Payload)> {
            to_all_neighbors(view, &Payload::Label(VertexLabel::new(view.id, 0)))
        }
        fn on_receive(
            &self,
            _: &LocalView,
            _: u64,
            inbox: &[Envelope],
            st: &mut Self::State,
            ctl: &mut Control<Self::Output>,
        ) {
            for e in inbox {
                if let Some(Payload::Label(l)) = e.payloads.first() {
                    st.insert(e.src, *l);
                }
            }
            ctl.output(st.clone());
        }
    }
    let g = generate_graph(GraphKind::Ring, 4, None, 2).unwrap();
    let res = run(&g, &Exchange, &EngineConfig::local()).unwrap();
    for &v in g.vertices() {
        let heard: Vec<_> = res.outputs[&v].keys().copied().collect();
        assert_eq!(heard, g.neighbors(v));
        assert_eq!(res.metrics.awake(v), 1);
    }
    assert_eq!(res.metrics.total_messages, 2 * g.edge_count() as u64);

    // A label fits comfortably in a 64-bit budget when n̂ = 256.
    let big = Graph::new(256, [0, 255], [(0, 255)]).unwrap();
    let m = run(&big, &Exchange, &EngineConfig::congest(64))
        .unwrap()
        .metrics;
    assert!(m.max_message_bits <= 2 * 8 + 16);
}

struct Misbehave {
    late_wake: bool,
    fat: bool,
}

impl VertexProgram for Misbehave {
    type State = ();
    type Output = ();
    fn init(&self, _: &LocalView) -> Init<(), ()> {
        Init::new((), [2])
    }
    fn on_send(&self, view: &LocalView, _: u64, _: &()) -> Vec<(VertexId, Payload)> {
        if self.fat {
            to_all_neighbors(view, &Payload::Words(vec![u64::MAX; 4]))
        } else {
            Vec::new()
        }
    }
    fn on_receive(
        &self,
        _: &LocalView,
        round: u64,
        _: &[Envelope],
        _: &mut (),
        ctl: &mut Control<()>,
    ) {
        if self.late_wake {
            ctl.wake_at(round);
        }
    }
}

#[test]
fn contract_breaches_abort_with_witness() {
    let g = Graph::new(2, [0, 1], [(0, 1)]).unwrap();
    let e = run(
        &g,
        &Misbehave {
            late_wake: true,
            fat: false,
        },
        &EngineConfig::local(),
    )
    .unwrap_err();
    assert_eq!(
        e,
        EngineError::ScheduleBreach {
            vertex: 0,
            round: 2,
            requested: 2
        }
    );
    let e = run(
        &g,
        &Misbehave {
            late_wake: false,
            fat: true,
        },
        &EngineConfig::congest(36),
    )
    .unwrap_err();
    assert!(
        matches!(
            e,
            EngineError::BitBudgetExceeded {
                src: 0,
                dst: 1,
                round: 2,
                budget: 36,
                ..
            }
        ),
        "{e:?}"
    );
    // The same traffic is fine in LOCAL mode.
    assert!(run(
        &g,
        &Misbehave {
            late_wake: false,
            fat: true
        },
        &EngineConfig::local()
    )
    .is_ok());
    let capped = EngineConfig::local().with_max_clock_rounds(2);
    assert!(matches!(
        run(
            &g,
            &Misbehave {
                late_wake: false,
                fat: false
            },
            &capped
        ),
        Err(EngineError::ClockLimit { .. })
    ));
}

#[test]
fn payloads_to_one_neighbor_are_concatenated() {
    struct Twice;
    impl VertexProgram for Twice {
        type State = usize;
        type Output = ();
        fn init(&self, _: &LocalView) -> Init<usize, ()> {
            Init::new(0, [0])
        }
        fn on_send(&self, view: &LocalView, _: u64, _: &usize) -> Vec<(VertexId, Payload)> {
            let mut out = to_all_neighbors(view, &Payload::Distance(1));
            out.extend(to_all_neighbors(view, &Payload::Flag(true)));
            out
        }
        fn on_receive(
            &self,
            _: &LocalView,
            _: u64,
            inbox: &[Envelope],
            st: &mut usize,
            _: &mut Control<()>,
        ) {
            *st = inbox.iter().map(|e| e.payloads.len()).sum();
        }
    }
    let g = Graph::new(2, [0, 1], [(0, 1)]).unwrap();
    let m = run(&g, &Twice, &EngineConfig::local()).unwrap().metrics;
    assert_eq!(m.total_messages, 2);
    assert_eq!(m.max_message_bits, 16);
    assert_eq!(m.total_message_bits, 32);
}

fn small_graph() -> impl Strategy<Value = Graph> {
    (
        1usize..=6,
        any::<u64>(),
        prop::sample::select(vec![
            GraphKind::Path,
            GraphKind::Ring,
            GraphKind::RandomTree,
            GraphKind::Complete,
        ]),
    )
        .prop_map(|(n, seed, kind)| generate_graph(kind, n, None, seed).unwrap())
}

proptest! {
    #[test]
    fn delivery_matches_reference_executor(
        g in small_graph(),
        rounds in prop::collection::vec(prop::collection::btree_set(0u64..8, 0..4), 6),
    ) {
        let rounds: Vec<Vec<u64>> = rounds.into_iter().map(|s| s.into_iter().collect()).collect();
        let s = script(&g, &rounds, 10);
        let (logs, m) = engine_logs(&g, &s);
        let (ref_logs, ref_awake, ref_msgs, ref_clock) = reference(&g, &s);
        prop_assert_eq!(logs, ref_logs);
        prop_assert_eq!(&m.awake_per_vertex, &ref_awake);
        prop_assert_eq!(m.total_messages, ref_msgs);
        prop_assert_eq!(m.clock_rounds, ref_clock);
        prop_assert!(m.total_messages <= m.message_capacity(&g));
        prop_assert!(m.worst_awake as f64 >= m.avg_awake);
    }

    #[test]
    fn runs_are_deterministic(
        g in small_graph(),
        rounds in prop::collection::vec(prop::collection::btree_set(0u64..8, 0..4), 6),
    ) {
        let rounds: Vec<Vec<u64>> = rounds.into_iter().map(|s| s.into_iter().collect()).collect();
        let s = script(&g, &rounds, 10);
        let a = engine_logs(&g, &s);
        let b = engine_logs(&g, &s);
        prop_assert_eq!(a.0, b.0);
        prop_assert_eq!(a.1, b.1);
    }
}

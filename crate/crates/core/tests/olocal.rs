use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use sleeping_core::graph::{generate_graph, log_star, Graph, GraphKind, VertexId};
use sleeping_core::olocal::{
    build_schedule_tree, linial_coloring, olocal_problem, run_olocal, DecisionContext,
    DeltaPlusOneColoring, Mis, OLocalProblem, LINIAL_C0, LINIAL_K,
};

fn graph_for(n: usize, seed: u64) -> Graph {
    let kind = GraphKind::ALL[(seed % 5) as usize];
    let p = if kind == GraphKind::RandomGnp {
        Some((4.0 / n as f64).clamp(0.1, 1.0))
    } else {
        None
    };
    generate_graph(kind, n, p, seed).unwrap()
}

/// Greedy over increasing color: MIS membership (1/0) or smallest free color.
fn sequential(g: &Graph, colors: &BTreeMap<VertexId, u64>, mis: bool) -> BTreeMap<VertexId, u64> {
    let mut order: Vec<VertexId> = g.vertices().to_vec();
    order.sort_by_key(|v| colors[v]);
    let mut out = BTreeMap::new();
    for v in order {
        let lower: Vec<u64> = g
            .neighbors(v)
            .iter()
            .filter(|w| colors[*w] < colors[&v])
            .map(|w| out[w])
            .collect();
        let d = if mis {
            u64::from(!lower.contains(&1))
        } else {
            (1..).find(|c| !lower.contains(c)).unwrap()
        };
        out.insert(v, d);
    }
    out
}

fn check_mis(g: &Graph, d: &BTreeMap<VertexId, u64>) {
    for (u, w) in g.edges() {
        assert!(!(d[&u] == 1 && d[&w] == 1), "adjacent {u},{w} both in");
    }
    for &v in g.vertices() {
        assert!(
            d[&v] == 1 || g.neighbors(v).iter().any(|w| d[w] == 1),
            "{v} could join"
        );
    }
}

fn check_coloring(g: &Graph, d: &BTreeMap<VertexId, u64>) {
    let top = g.max_degree() as u64 + 1;
    for (u, w) in g.edges() {
        assert_ne!(d[&u], d[&w]);
    }
    assert!(d.values().all(|&c| (1..=top).contains(&c)));
}

fn all_connected(n: usize) -> Vec<Graph> {
    let pairs: Vec<(u64, u64)> = (0..n as u64)
        .flat_map(|a| (a + 1..n as u64).map(move |b| (a, b)))
        .collect();
    (0u32..1 << pairs.len())
        .filter_map(|mask| {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e);
            Graph::new(n as u64, 0..n as u64, edges).ok()
        })
        .collect()
}

#[test]
fn matches_sequential_oracle_on_every_small_graph() {
    let mut count = 0;
    for n in 1..=6 {
        for g in all_connected(n) {
            for (prob, mis) in [
                (&Mis as &dyn OLocalProblem, true),
                (&DeltaPlusOneColoring, false),
            ] {
                let run = run_olocal(&g, prob).unwrap();
                assert!(run.coloring.is_proper(&g));
                assert_eq!(
                    run.decisions,
                    sequential(&g, &run.coloring.colors, mis),
                    "{:?}",
                    g.edges()
                );
            }
            count += 1;
        }
    }
    // Connected labeled graphs on 1..=6 vertices.
    assert_eq!(count, 1 + 1 + 4 + 38 + 728 + 26704);
}

#[test]
fn seeded_graphs_give_valid_outputs_and_exact_awake() {
    for seed in 0..50u64 {
        let n = 2 + (seed as usize * 37) % 127;
        let g = graph_for(n, seed);
        let mis = run_olocal(&g, &Mis).unwrap();
        check_mis(&g, &mis.decisions);
        let col = run_olocal(&g, &DeltaPlusOneColoring).unwrap();
        check_coloring(&g, &col.decisions);
        for run in [&mis, &col] {
            let depth = run.coloring.q.trailing_zeros() as u64 + 1;
            assert!(
                run.post_coloring_awake.values().all(|&a| a == depth),
                "seed {seed}"
            );
            assert!(run.metrics.clock_rounds < run.coloring.rounds_used + 2 * run.coloring.q);
        }
    }
}

#[test]
fn ring_mis_size_and_awake() {
    let g = generate_graph(GraphKind::Ring, 32, None, 3).unwrap();
    let run = run_olocal(&g, &Mis).unwrap();
    check_mis(&g, &run.decisions);
    let ones = run.decisions.values().filter(|&&d| d == 1).count();
    assert!((11..=16).contains(&ones));
    let depth = run.coloring.q.trailing_zeros() as u64 + 1;
    assert!(run.post_coloring_awake.values().all(|&a| a == depth));
}

#[test]
fn tiny_cases() {
    let one = Graph::new(1, [0], []).unwrap();
    let run = run_olocal(&one, &Mis).unwrap();
    assert_eq!(run.decisions[&0], 1);
    assert_eq!(run.coloring.q, 2);
    assert_eq!(run.post_coloring_awake[&0], 2);
    let (c, _) = linial_coloring(&one).unwrap();
    assert_eq!((c.colors[&0], c.q), (1, 2));

    let path = generate_graph(GraphKind::Path, 2, None, 0).unwrap();
    let run = run_olocal(&path, &Mis).unwrap();
    assert_eq!(run.decisions.values().filter(|&&d| d == 1).count(), 1);
    assert_eq!(run.coloring.q, 2);
}

#[test]
fn linial_bounds() {
    let ring = generate_graph(GraphKind::Ring, 64, None, 1).unwrap();
    let (c, m) = linial_coloring(&ring).unwrap();
    assert!(c.is_proper(&ring));
    assert!(c.q <= (4 * LINIAL_K).next_power_of_two());
    assert!(m.awake_per_vertex.values().all(|&a| a == c.rounds_used));

    for seed in 0..20 {
        let g = generate_graph(
            GraphKind::RandomGnp,
            128,
            Some(0.05 + seed as f64 * 0.02),
            seed,
        )
        .unwrap();
        let (c, _) = linial_coloring(&g).unwrap();
        let d = g.max_degree() as u64;
        assert!(c.is_proper(&g), "seed {seed}");
        assert!(
            c.q.is_power_of_two() && c.q <= (LINIAL_K * d * d).next_power_of_two(),
            "seed {seed}: q {} Δ {d}",
            c.q
        );
        assert!(c.rounds_used <= log_star(g.n_hat()) as u64 + LINIAL_C0);
        assert!(c.colors.values().all(|&x| (1..=c.q).contains(&x)));
    }
}

/// Counts the vertices reachable along edges toward smaller colors.
struct Reach;

impl OLocalProblem for Reach {
    fn name(&self) -> &'static str {
        "reach"
    }

    fn transitive(&self) -> bool {
        true
    }

    fn decide(&self, ctx: &DecisionContext) -> Option<u64> {
        Some(ctx.known.len() as u64)
    }
}

fn reach_oracle(g: &Graph, colors: &BTreeMap<VertexId, u64>, v: VertexId) -> u64 {
    let mut seen = BTreeSet::new();
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        for w in g.neighbors(u) {
            if colors[&w] < colors[&u] && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() as u64
}

#[test]
fn transitive_knowledge_covers_reachable_set() {
    for seed in 0..15 {
        let g = graph_for(10 + seed as usize * 5, seed);
        let run = run_olocal(&g, &Reach).unwrap();
        for &v in g.vertices() {
            assert_eq!(
                run.decisions[&v],
                reach_oracle(&g, &run.coloring.colors, v),
                "seed {seed} vertex {v}"
            );
        }
    }
}

#[test]
fn schedule_tree_figure() {
    let t = build_schedule_tree(8).unwrap();
    let a: BTreeSet<u64> = t.wake_rounds(5).unwrap().path.into_iter().collect();
    let b: BTreeSet<u64> = t.wake_rounds(7).unwrap().path.into_iter().collect();
    assert_eq!(a.intersection(&b).copied().collect::<Vec<_>>(), vec![8, 12]);
    assert_eq!(t.lca(9, 13), 12);
    assert_eq!(
        build_schedule_tree(16).unwrap().in_order(),
        (1..=31).collect::<Vec<_>>()
    );
    assert_eq!(
        olocal_problem("delta-plus-one-coloring").unwrap().name(),
        "delta-plus-one-coloring"
    );
}

proptest! {
    #[test]
    fn adjacent_colors_meet_strictly_between_leaves(k in 1u32..10, a in 1u64..1024, b in 1u64..1024) {
        let t = build_schedule_tree(1 << k).unwrap();
        let (x, y) = (1 + a % t.q(), 1 + b % t.q());
        prop_assume!(x != y);
        let (a, b) = (x.min(y), x.max(y));
        let ra = t.wake_rounds(a).unwrap();
        let rb = t.wake_rounds(b).unwrap();
        let l = t.lca(ra.decision, rb.decision);
        prop_assert!(ra.path.contains(&l) && rb.path.contains(&l));
        prop_assert!(ra.decision < l && l < rb.decision);
        prop_assert_eq!(ra.path.len() as u32, k + 1);
        // Every shared round is an ancestor of both leaves, at or above the LCA.
        for r in ra.path.iter().filter(|r| rb.path.contains(r)) {
            prop_assert!(t.path_to(l).contains(r));
        }
    }
}

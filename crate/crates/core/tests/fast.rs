use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sleeping_core::construct::build_dlt;
use sleeping_core::fast::{
    bounded_depth_partition, build_dlt_fast, three_color_overlay, OverlayTree,
};
use sleeping_core::graph::{
    generate_graph, log_star, reroot_levels, validate_dlt, Graph, GraphKind,
};
use sleeping_core::sim::EngineConfig;

fn graph_for(n: usize, seed: u64) -> Graph {
    let kind = GraphKind::ALL[(seed % 5) as usize];
    let p = if kind == GraphKind::RandomGnp {
        Some((4.0 / n as f64).clamp(0.1, 1.0))
    } else {
        None
    };
    generate_graph(kind, n, p, seed).unwrap()
}

fn random_overlay(rng: &mut ChaCha8Rng, n: u64) -> OverlayTree {
    // Random ids so that colors are not just positions.
    let mut ids: Vec<u64> = (0..n).map(|i| i * 7 + rng.gen_range(0..7)).collect();
    ids.sort_unstable();
    let parent = (0..n as usize)
        .map(|i| (ids[i], (i > 0).then(|| ids[rng.gen_range(0..i)])))
        .collect();
    OverlayTree::from_parents(parent).unwrap()
}

#[test]
fn overlay_colorings_are_proper() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.gen_range(2..60);
        let h = random_overlay(&mut rng, n);
        let c = three_color_overlay(&h, 7 * n);
        for (v, p) in h.edges() {
            assert_ne!(c.colors[&v], c.colors[&p]);
        }
        assert!(c.colors.values().all(|&x| x < 3));
    }
}

#[test]
fn partitions_are_shallow_and_halve() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let n = rng.gen_range(2..=40);
        let h = random_overlay(&mut rng, n);
        let c = three_color_overlay(&h, 7 * n);
        let p = bounded_depth_partition(&h, &c.colors).unwrap();
        assert!(p.max_depth <= 3);
        assert!(p.pieces <= (n as usize).div_ceil(2));
        // Every piece edge is an overlay edge in one direction or the other.
        for (&v, &a) in &p.attach {
            if let Some(a) = a {
                assert!(h.parent(v) == Some(a) || h.parent(a) == Some(v));
            }
        }
    }
}

#[test]
fn directed_path_of_eight() {
    let h = OverlayTree::from_parents((0..8u64).map(|v| (v, v.checked_sub(1))).collect()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        // Any proper 3-coloring of a path.
        let mut colors = BTreeMap::new();
        let mut prev = 99;
        for v in 0..8u64 {
            let c = loop {
                let c = rng.gen_range(0..3);
                if c != prev {
                    break c;
                }
            };
            colors.insert(v, c);
            prev = c;
        }
        let p = bounded_depth_partition(&h, &colors).unwrap();
        assert!(p.max_depth <= 3 && p.pieces <= 4);
    }
}

fn check_levels(g: &Graph, a: &sleeping_core::graph::DltAssignment) {
    let root = a.root().unwrap();
    let levels = reroot_levels(&a.tree_edges(), root).unwrap();
    for &v in g.vertices() {
        let e = a.get(v).unwrap();
        assert_eq!(e.label.level, levels[&v], "vertex {v}");
        assert_eq!(e.label.tree_id, root);
    }
}

#[test]
fn fast_builds_valid_level_form_trees() {
    for seed in 0..30u64 {
        let n = 2 + (seed as usize * 53) % 127;
        let g = graph_for(n, seed);
        let run = build_dlt_fast(&g).unwrap();
        let report = validate_dlt(&g, &run.assignment);
        assert!(report.ok, "seed {seed}: {:?}", report.violations);
        check_levels(&g, &run.assignment);
        for rec in &run.trace {
            assert!(rec.base.valid, "seed {seed} phase {}", rec.base.phase);
            assert!(
                rec.matches_reference,
                "seed {seed} phase {}",
                rec.base.phase
            );
            assert!(rec.max_piece_depth <= 3);
            assert!(
                rec.base.components * 2 <= rec.overlay_vertices.max(1) || rec.overlay_vertices <= 1
            );
        }
    }
}

#[test]
fn singleton_and_pair() {
    let one = Graph::new(1, [0], []).unwrap();
    let run = build_dlt_fast(&one).unwrap();
    assert!(run.assignment.get(0).unwrap().is_root);
    assert_eq!(run.metrics.clock_rounds, 0);
    let two = generate_graph(GraphKind::Path, 2, None, 0).unwrap();
    let run = build_dlt_fast(&two).unwrap();
    assert!(validate_dlt(&two, &run.assignment).ok);
}

#[test]
fn fewer_clock_rounds_than_plain_construction() {
    for n in [64usize, 100, 128] {
        let g = generate_graph(GraphKind::Ring, n, None, 3).unwrap();
        let fast = build_dlt_fast(&g).unwrap();
        let plain = build_dlt(&g, &EngineConfig::local()).unwrap();
        assert!(validate_dlt(&g, &fast.assignment).ok);
        assert!(
            fast.metrics.clock_rounds < plain.metrics.clock_rounds,
            "n {n}"
        );
        let lg = (n as f64).log2().ceil() as u64;
        let ls = log_star(g.n_hat()) as u64;
        eprintln!(
            "n {n}: fast clock {} plain clock {} fast worst {} plain worst {} bound-ratio awake {:.2} clock {:.2}",
            fast.metrics.clock_rounds,
            plain.metrics.clock_rounds,
            fast.metrics.worst_awake,
            plain.metrics.worst_awake,
            fast.metrics.worst_awake as f64 / (lg * ls) as f64,
            fast.metrics.clock_rounds as f64 / (n as u64 * lg * ls) as f64
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn fast_matches_reference_each_phase(n in 2usize..48, seed in 0u64..1000) {
        let g = graph_for(n, seed);
        let run = build_dlt_fast(&g).unwrap();
        prop_assert!(validate_dlt(&g, &run.assignment).ok);
        for rec in &run.trace {
            prop_assert!(rec.matches_reference);
        }
    }
}

#[test]
fn frozen_constants_hold() {
    use sleeping_core::fast::{FAST_AWAKE_C, FAST_CLOCK_C, FAST_PHASE_AWAKE_C};
    for kind in GraphKind::ALL {
        for n in [2usize, 5, 16, 32, 64, 128] {
            for seed in 0..3 {
                let g =
                    generate_graph(kind, n, Some((4.0 / n as f64).clamp(0.05, 1.0)), seed).unwrap();
                let run = build_dlt_fast(&g).unwrap();
                let lg = sleeping_core::graph::ceil_log2(n as u64).max(1) as u64;
                let ls = log_star(g.n_hat()).max(1) as u64;
                assert!(
                    run.metrics.worst_awake <= FAST_AWAKE_C * lg * ls,
                    "{kind} n {n}"
                );
                assert!(
                    run.metrics.clock_rounds <= FAST_CLOCK_C * n as u64 * lg * ls,
                    "{kind} n {n}"
                );
                for rec in &run.trace {
                    assert!(rec.base.max_awake_increment <= FAST_PHASE_AWAKE_C * ls);
                    assert!(rec.max_piece_depth <= 3);
                }
            }
        }
    }
}

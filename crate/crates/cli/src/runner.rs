//! One trial: build or load the graph, run the algorithm, check its output.

use std::collections::{BTreeMap, VecDeque};
use std::fs;

use rayon::prelude::*;
use sleeping_core::congest::{ccongest_problem, solve_ccongest, Ratio};
use sleeping_core::construct::{build_dlt, solve_universal, universal_solver, ConstructError};
use sleeping_core::fast::build_dlt_fast;
use sleeping_core::graph::{
    generate_graph, load_graph, validate_dlt, DltAssignment, Graph, VertexId,
};
use sleeping_core::olocal::{olocal_problem, run_olocal};
use sleeping_core::sim::{EngineConfig, Mode, RunMetrics};

use crate::report::{ReportRow, SweepReport, SweepRow};
use crate::spec::{Algorithm, ExperimentSpec, GraphSource, SpecError, SweepSpec};

/// What a trial produced, before it becomes a report row.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub metrics: Option<RunMetrics>,
    /// Empty when the output passed its oracle.
    pub witness: Vec<String>,
    /// Algorithm-specific summary, e.g. the answer or the palette size.
    pub detail: String,
}

impl TrialOutcome {
    fn failed(err: impl ToString) -> Self {
        Self {
            metrics: None,
            witness: vec![format!("run-aborted: {}", err.to_string())],
            detail: String::new(),
        }
    }
}

pub fn engine_config(spec: &ExperimentSpec, g: &Graph) -> EngineConfig {
    match (spec.mode, spec.bit_budget) {
        (Mode::Local, _) => EngineConfig::local(),
        (Mode::Congest, Some(b)) => EngineConfig::congest(b),
        (Mode::Congest, None) => EngineConfig::congest_for(g.n_hat()),
    }
}

/// The graph of trial `trial`. Files are read once per trial; generators advance the seed.
pub fn trial_graph(source: &GraphSource, trial: u64) -> Result<(Graph, Option<u64>), SpecError> {
    match source {
        GraphSource::File(path) => {
            let text = fs::read_to_string(path).map_err(|source| SpecError::Io {
                path: path.clone(),
                source,
            })?;
            let g = load_graph(&text).map_err(|source| SpecError::Load {
                path: path.clone(),
                source,
            })?;
            Ok((g, None))
        }
        &GraphSource::Generated { kind, n, p, seed } => {
            let seed = seed.wrapping_add(trial);
            Ok((generate_graph(kind, n, p, seed)?, Some(seed)))
        }
    }
}

fn dlt_witness(g: &Graph, a: &DltAssignment) -> Vec<String> {
    let report = validate_dlt(g, a);
    report
        .violations
        .iter()
        .map(|v| {
            let mut s = format!("dlt:{}", v.rule);
            if let Some(x) = v.vertex {
                s += &format!(" vertex={x}");
            }
            if let Some(y) = v.other {
                s += &format!(" other={y}");
            }
            s
        })
        .collect()
}

fn mis_witness(g: &Graph, out: &BTreeMap<VertexId, u64>) -> Vec<String> {
    let mut w = Vec::new();
    for (u, v) in g.edges() {
        if out[&u] == 1 && out[&v] == 1 {
            w.push(format!("mis:not-independent edge={u}-{v}"));
        }
    }
    for &v in g.vertices() {
        if out[&v] == 0 && !g.neighbors(v).iter().any(|x| out[x] == 1) {
            w.push(format!("mis:not-maximal vertex={v}"));
        }
        if out[&v] > 1 {
            w.push(format!("mis:bad-value vertex={v} value={}", out[&v]));
        }
    }
    w
}

fn coloring_witness(g: &Graph, out: &BTreeMap<VertexId, u64>) -> Vec<String> {
    let palette = g.max_degree() as u64 + 1;
    let mut w: Vec<String> = g
        .edges()
        .into_iter()
        .filter(|(u, v)| out[u] == out[v])
        .map(|(u, v)| format!("coloring:monochromatic edge={u}-{v}"))
        .collect();
    for (&v, &c) in out {
        if c == 0 || c > palette {
            w.push(format!("coloring:outside-palette vertex={v} color={c}"));
        }
    }
    w
}

fn bfs_parity(g: &Graph) -> Option<BTreeMap<VertexId, u64>> {
    let start = *g.vertices().first()?;
    let mut side = BTreeMap::from([(start, 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for w in g.neighbors(u) {
            match side.get(&w) {
                Some(&s) if s == side[&u] => return None,
                Some(_) => {}
                None => {
                    side.insert(w, 1 - side[&u]);
                    queue.push_back(w);
                }
            }
        }
    }
    Some(side)
}

/// Expected per-vertex answer of a universal or aggregate problem.
fn expected_answer(problem: &str, g: &Graph, root: VertexId) -> Option<Ratio> {
    let m = g.edges().len() as u64;
    Some(match problem {
        "leader-election" => Ratio::whole(root),
        "edge-count" => Ratio::whole(m),
        "average-degree" => Ratio::new(2 * m, g.n() as u64),
        "max-degree" => Ratio::whole(g.max_degree() as u64),
        _ => return None,
    })
}

fn answer_witness(
    problem: &str,
    g: &Graph,
    root: VertexId,
    out: &BTreeMap<VertexId, Ratio>,
) -> Vec<String> {
    if problem == "two-coloring" {
        if bfs_parity(g).is_none() {
            return vec!["two-coloring:not-bipartite".into()];
        }
        let mut w: Vec<String> = out
            .iter()
            .filter(|(_, a)| a.num > 1)
            .map(|(v, a)| format!("two-coloring:bad-value vertex={v} value={a}"))
            .collect();
        w.extend(
            g.edges()
                .into_iter()
                .filter(|(u, v)| out[u] == out[v])
                .map(|(u, v)| format!("two-coloring:monochromatic edge={u}-{v}")),
        );
        return w;
    }
    let want = expected_answer(problem, g, root).expect("registered problem");
    out.iter()
        .filter(|(_, &a)| a != want)
        .map(|(v, a)| format!("{problem}:wrong vertex={v} got={a} want={want}"))
        .collect()
}

fn summarize(out: &BTreeMap<VertexId, Ratio>) -> String {
    let mut distinct: Vec<String> = out.values().map(Ratio::to_string).collect();
    distinct.sort();
    distinct.dedup();
    if distinct.len() == 1 {
        format!("answer={}", distinct[0])
    } else {
        format!("answers={}", distinct.len())
    }
}

fn prebuilt_dlt(g: &Graph, cfg: &EngineConfig) -> Result<DltAssignment, ConstructError> {
    build_dlt(g, cfg).map(|run| run.assignment)
}

/// Runs one algorithm on one graph and checks the result against its oracle.
pub fn run_algorithm(g: &Graph, algo: Algorithm, cfg: &EngineConfig) -> TrialOutcome {
    match algo {
        Algorithm::Dlt | Algorithm::DltCongest => match build_dlt(g, cfg) {
            Ok(run) => TrialOutcome {
                witness: dlt_witness(g, &run.assignment),
                detail: format!("phases={}", run.trace.len()),
                metrics: Some(run.metrics),
            },
            Err(e) => TrialOutcome::failed(e),
        },
        Algorithm::DltFast => match build_dlt_fast(g) {
            Ok(run) => {
                let depth = run
                    .trace
                    .iter()
                    .map(|r| r.max_piece_depth)
                    .max()
                    .unwrap_or(0);
                let mut witness = dlt_witness(g, &run.assignment);
                witness.extend(
                    run.trace
                        .iter()
                        .filter(|r| !r.matches_reference)
                        .map(|r| format!("fast:reference-mismatch phase={}", r.base.phase)),
                );
                TrialOutcome {
                    witness,
                    detail: format!("phases={} maxPieceDepth={depth}", run.trace.len()),
                    metrics: Some(run.metrics),
                }
            }
            Err(e) => TrialOutcome::failed(e),
        },
        Algorithm::OLocal(name) => {
            let problem = olocal_problem(name).expect("registered problem");
            match run_olocal(g, problem) {
                Ok(run) => {
                    let mut witness = if name == "mis" {
                        mis_witness(g, &run.decisions)
                    } else {
                        coloring_witness(g, &run.decisions)
                    };
                    let depth = run.coloring.q.trailing_zeros() as u64 + 1;
                    witness.extend(
                        run.post_coloring_awake
                            .iter()
                            .filter(|(_, &a)| a != depth)
                            .map(|(v, a)| {
                                format!(
                                    "olocal:post-coloring-awake vertex={v} got={a} want={depth}"
                                )
                            }),
                    );
                    let summary = if name == "mis" {
                        format!(
                            "misSize={}",
                            run.decisions.values().filter(|&&d| d == 1).count()
                        )
                    } else {
                        let mut used: Vec<u64> = run.decisions.values().copied().collect();
                        used.sort_unstable();
                        used.dedup();
                        format!("colorsUsed={}", used.len())
                    };
                    let detail =
                        format!("q={} postColoringAwake={depth} {summary}", run.coloring.q);
                    TrialOutcome {
                        witness,
                        detail,
                        metrics: Some(run.metrics),
                    }
                }
                Err(e) => TrialOutcome::failed(e),
            }
        }
        Algorithm::CCongest(name) => {
            let problem = ccongest_problem(name).expect("registered problem");
            let solved =
                prebuilt_dlt(g, cfg).and_then(|a| Ok((solve_ccongest(g, &a, problem, cfg)?, a)));
            match solved {
                Ok((run, a)) => TrialOutcome {
                    witness: answer_witness(
                        name,
                        g,
                        a.root().expect("nonempty tree"),
                        &run.answers,
                    ),
                    detail: summarize(&run.answers),
                    metrics: Some(run.metrics),
                },
                Err(e) => TrialOutcome::failed(e),
            }
        }
        Algorithm::Universal(name) => {
            let solver = universal_solver(name).expect("registered solver");
            let solved =
                prebuilt_dlt(g, cfg).and_then(|a| Ok((solve_universal(g, &a, solver, cfg)?, a)));
            match solved {
                Ok((run, a)) => {
                    let answers: BTreeMap<VertexId, Ratio> = run
                        .outputs
                        .iter()
                        .map(|(&v, &x)| (v, Ratio::whole(x)))
                        .collect();
                    TrialOutcome {
                        witness: answer_witness(
                            name,
                            g,
                            a.root().expect("nonempty tree"),
                            &answers,
                        ),
                        detail: summarize(&answers),
                        metrics: Some(run.metrics),
                    }
                }
                Err(e) => TrialOutcome::failed(e),
            }
        }
    }
}

/// Every trial of `spec`, in trial order. Trials run in parallel.
pub fn cmd_run(spec: &ExperimentSpec) -> Result<Vec<ReportRow>, SpecError> {
    (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let (g, seed) = trial_graph(&spec.source, trial)?;
            let outcome = run_algorithm(&g, spec.algo, &engine_config(spec, &g));
            Ok(ReportRow::new(spec, trial, seed, &g, outcome))
        })
        .collect()
}

/// Every trial at every size; one summary row per size, in size order.
pub fn cmd_sweep(sweep: &SweepSpec) -> Result<SweepReport, SpecError> {
    let specs: Vec<ExperimentSpec> = sweep.ns.iter().map(|&n| sweep.at(n)).collect();
    let jobs: Vec<(usize, u64)> = (0..specs.len())
        .flat_map(|i| (0..sweep.base.trials).map(move |t| (i, t)))
        .collect();
    let trials: Vec<ReportRow> = jobs
        .into_par_iter()
        .map(|(i, trial)| {
            let (g, seed) = trial_graph(&specs[i].source, trial)?;
            let outcome = run_algorithm(&g, specs[i].algo, &engine_config(&specs[i], &g));
            Ok(ReportRow::new(&specs[i], trial, seed, &g, outcome))
        })
        .collect::<Result<_, SpecError>>()?;
    let sizes = trials
        .chunks(sweep.base.trials as usize)
        .zip(&sweep.ns)
        .map(|(rows, &n)| SweepRow::aggregate(n, rows))
        .collect();
    Ok(SweepReport { sizes, trials })
}

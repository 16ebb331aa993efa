//! Report rows and their JSON, CSV and aligned-text renderings.

use std::fmt::Write as _;

use serde::Serialize;
use sleeping_core::graph::{ceil_log2, log_star, Graph};
use sleeping_core::sim::{default_bit_budget, Mode};

use crate::runner::TrialOutcome;
use crate::spec::{ExperimentSpec, GraphSource, SpecError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportRow {
    pub trial: u64,
    pub graph: String,
    pub seed: Option<u64>,
    pub n: usize,
    pub n_hat: u64,
    pub edges: usize,
    pub algo: String,
    pub mode: &'static str,
    pub bit_budget: Option<u64>,
    pub worst_awake: Option<u64>,
    pub avg_awake: Option<f64>,
    pub clock_rounds: Option<u64>,
    pub total_messages: Option<u64>,
    pub max_message_bits: Option<u64>,
    pub total_message_bits: Option<u64>,
    /// worstAwake / ⌈log₂ n⌉.
    pub awake_ratio: Option<f64>,
    /// clockRounds / (n·⌈log₂ n⌉·log* n̂).
    pub clock_ratio: Option<f64>,
    pub valid: bool,
    pub witness: String,
    pub detail: String,
}

/// `⌈log₂ n⌉` and `log* n̂`, each at least 1 so ratios stay finite.
pub fn scale(n: usize, n_hat: u64) -> (f64, f64) {
    (
        ceil_log2(n as u64).max(1) as f64,
        log_star(n_hat).max(1) as f64,
    )
}

impl ReportRow {
    pub fn new(
        spec: &ExperimentSpec,
        trial: u64,
        seed: Option<u64>,
        g: &Graph,
        outcome: TrialOutcome,
    ) -> Self {
        let graph = match &spec.source {
            GraphSource::File(p) => p.display().to_string(),
            GraphSource::Generated { kind, .. } => kind.to_string(),
        };
        let (lg, ls) = scale(g.n(), g.n_hat());
        let m = outcome.metrics.as_ref();
        let mut witness = outcome.witness;
        if m.is_some_and(|m| !m.message_bound_holds(g)) {
            witness.push("engine:message-count-above-awake-degree-sum".into());
        }
        ReportRow {
            trial,
            graph,
            seed,
            n: g.n(),
            n_hat: g.n_hat(),
            edges: g.edges().len(),
            algo: spec.algo.to_string(),
            mode: spec.mode.name(),
            bit_budget: (spec.mode == Mode::Congest).then(|| {
                spec.bit_budget
                    .unwrap_or_else(|| default_bit_budget(g.n_hat()))
            }),
            worst_awake: m.map(|m| m.worst_awake),
            avg_awake: m.map(|m| m.avg_awake),
            clock_rounds: m.map(|m| m.clock_rounds),
            total_messages: m.map(|m| m.total_messages),
            max_message_bits: m.map(|m| m.max_message_bits),
            total_message_bits: m.map(|m| m.total_message_bits),
            awake_ratio: m.map(|m| m.worst_awake as f64 / lg),
            clock_ratio: m.map(|m| m.clock_rounds as f64 / (g.n() as f64 * lg * ls)),
            valid: witness.is_empty(),
            witness: witness.join("; "),
            detail: outcome.detail,
        }
    }
}

/// Per-size summary of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub n: usize,
    pub trials: usize,
    pub valid_trials: usize,
    pub worst_awake_max: u64,
    pub worst_awake_mean: f64,
    pub clock_rounds_max: u64,
    pub clock_rounds_mean: f64,
    /// max worstAwake / ⌈log₂ n⌉.
    pub awake_ratio: f64,
    /// max clockRounds / (n·⌈log₂ n⌉·log* n̂).
    pub clock_ratio: f64,
}

impl SweepRow {
    pub fn aggregate(n: usize, rows: &[ReportRow]) -> Self {
        let awake: Vec<u64> = rows.iter().filter_map(|r| r.worst_awake).collect();
        let clock: Vec<u64> = rows.iter().filter_map(|r| r.clock_rounds).collect();
        let mean = |xs: &[u64]| {
            if xs.is_empty() {
                0.0
            } else {
                xs.iter().sum::<u64>() as f64 / xs.len() as f64
            }
        };
        let fmax = |f: fn(&ReportRow) -> Option<f64>| rows.iter().filter_map(f).fold(0.0, f64::max);
        SweepRow {
            n,
            trials: rows.len(),
            valid_trials: rows.iter().filter(|r| r.valid).count(),
            worst_awake_max: awake.iter().copied().max().unwrap_or(0),
            worst_awake_mean: mean(&awake),
            clock_rounds_max: clock.iter().copied().max().unwrap_or(0),
            clock_rounds_mean: mean(&clock),
            awake_ratio: fmax(|r| r.awake_ratio),
            clock_ratio: fmax(|r| r.clock_ratio),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub sizes: Vec<SweepRow>,
    pub trials: Vec<ReportRow>,
}

fn encode_err(e: impl ToString) -> SpecError {
    SpecError::Encode(e.to_string())
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, SpecError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(encode_err)
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, SpecError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(encode_err)?;
    }
    let bytes = w.into_inner().map_err(encode_err)?;
    String::from_utf8(bytes).map_err(encode_err)
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(|| "-".into(), |v| v.to_string())
}

/// Left-aligned columns separated by two spaces.
fn table(header: &[&str], body: Vec<Vec<String>>) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &body {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let lines =
        std::iter::once(header.iter().map(|s| s.to_string()).collect::<Vec<_>>()).chain(body);
    for row in lines {
        let cells: Vec<String> = row
            .iter()
            .zip(&width)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}

pub fn rows_text(rows: &[ReportRow]) -> String {
    let header = [
        "trial",
        "graph",
        "seed",
        "n",
        "algo",
        "mode",
        "worstAwake",
        "clockRounds",
        "messages",
        "maxBits",
        "awakeRatio",
        "clockRatio",
        "valid",
        "detail",
    ];
    let body = rows
        .iter()
        .map(|r| {
            vec![
                r.trial.to_string(),
                r.graph.clone(),
                opt(r.seed),
                r.n.to_string(),
                r.algo.clone(),
                r.mode.to_string(),
                opt(r.worst_awake),
                opt(r.clock_rounds),
                opt(r.total_messages),
                opt(r.max_message_bits),
                opt(r.awake_ratio.map(|x| format!("{x:.3}"))),
                opt(r.clock_ratio.map(|x| format!("{x:.4}"))),
                if r.valid { "ok".into() } else { "FAIL".into() },
                r.detail.clone(),
            ]
        })
        .collect();
    let mut out = table(&header, body);
    for r in rows.iter().filter(|r| !r.valid) {
        let _ = writeln!(out, "trial {}: {}", r.trial, r.witness);
    }
    out
}

pub fn sweep_text(sizes: &[SweepRow]) -> String {
    let header = [
        "n",
        "trials",
        "valid",
        "worstAwakeMax",
        "worstAwakeMean",
        "clockMax",
        "clockMean",
        "awakeRatio",
        "clockRatio",
    ];
    let body = sizes
        .iter()
        .map(|s| {
            vec![
                s.n.to_string(),
                s.trials.to_string(),
                s.valid_trials.to_string(),
                s.worst_awake_max.to_string(),
                format!("{:.2}", s.worst_awake_mean),
                s.clock_rounds_max.to_string(),
                format!("{:.1}", s.clock_rounds_mean),
                format!("{:.3}", s.awake_ratio),
                format!("{:.4}", s.clock_ratio),
            ]
        })
        .collect();
    table(&header, body)
}

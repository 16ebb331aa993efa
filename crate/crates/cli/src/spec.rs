use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sleeping_core::congest::ccongest_problem;
use sleeping_core::construct::UNIVERSAL_SOLVERS;
use sleeping_core::graph::{GenerateError, GraphKind, LoadError};
use sleeping_core::sim::Mode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("mode mismatch: {algo} cannot run in {mode} mode")]
    ModeMismatch { algo: String, mode: &'static str },
    #[error("--bit-budget only applies in congest mode")]
    BudgetWithoutCongest,
    #[error("bit budget must be at least 1")]
    ZeroBudget,
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("sweep needs a generated graph, not a file")]
    SweepNeedsGenerator,
    #[error("n range is empty")]
    EmptyRange,
    #[error("n range must be strictly increasing, got {0} after {1}")]
    NonMonotone(usize, usize),
    #[error("graph generator: {0}")]
    Generate(#[from] GenerateError),
    #[error("graph file {path}: {source}")]
    Load { path: PathBuf, source: LoadError },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("report encoding: {0}")]
    Encode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Dlt,
    DltFast,
    DltCongest,
    /// Registered O-LOCAL problem name.
    OLocal(&'static str),
    CCongest(&'static str),
    Universal(&'static str),
}

impl Algorithm {
    /// Modes the algorithm is defined for; the first is the default.
    pub fn modes(self) -> &'static [Mode] {
        match self {
            Algorithm::Dlt => &[Mode::Local, Mode::Congest],
            Algorithm::DltCongest | Algorithm::CCongest(_) => &[Mode::Congest],
            Algorithm::DltFast | Algorithm::OLocal(_) | Algorithm::Universal(_) => &[Mode::Local],
        }
    }
}

impl FromStr for Algorithm {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let unknown = || SpecError::UnknownAlgorithm(s.to_string());
        Ok(match s.split_once(':') {
            None => match s {
                "dlt" => Algorithm::Dlt,
                "dlt-fast" => Algorithm::DltFast,
                "dlt-congest" => Algorithm::DltCongest,
                _ => return Err(unknown()),
            },
            Some(("olocal", "mis")) => Algorithm::OLocal("mis"),
            Some(("olocal", "coloring" | "delta-plus-one-coloring")) => {
                Algorithm::OLocal("delta-plus-one-coloring")
            }
            Some(("ccongest", name)) => {
                Algorithm::CCongest(ccongest_problem(name).ok_or_else(unknown)?.name())
            }
            Some(("universal", name)) => Algorithm::Universal(
                UNIVERSAL_SOLVERS
                    .into_iter()
                    .find(|&x| x == name)
                    .ok_or_else(unknown)?,
            ),
            _ => return Err(unknown()),
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Dlt => f.write_str("dlt"),
            Algorithm::DltFast => f.write_str("dlt-fast"),
            Algorithm::DltCongest => f.write_str("dlt-congest"),
            Algorithm::OLocal("mis") => f.write_str("olocal:mis"),
            Algorithm::OLocal(_) => f.write_str("olocal:coloring"),
            Algorithm::CCongest(p) => write!(f, "ccongest:{p}"),
            Algorithm::Universal(p) => write!(f, "universal:{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    File(PathBuf),
    /// Trial `i` uses seed `seed + i`.
    Generated {
        kind: GraphKind,
        n: usize,
        p: Option<f64>,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: GraphSource,
    pub algo: Algorithm,
    pub mode: Mode,
    pub bit_budget: Option<u64>,
    pub trials: u64,
}

impl ExperimentSpec {
    /// Checks algorithm/mode compatibility. Without a mode the algorithm's default is used.
    pub fn new(
        source: GraphSource,
        algo: Algorithm,
        mode: Option<Mode>,
        bit_budget: Option<u64>,
        trials: u64,
    ) -> Result<Self, SpecError> {
        let mode = mode.unwrap_or(algo.modes()[0]);
        if !algo.modes().contains(&mode) {
            return Err(SpecError::ModeMismatch {
                algo: algo.to_string(),
                mode: mode.name(),
            });
        }
        match (mode, bit_budget) {
            (Mode::Local, Some(_)) => return Err(SpecError::BudgetWithoutCongest),
            (_, Some(0)) => return Err(SpecError::ZeroBudget),
            _ => {}
        }
        if trials == 0 {
            return Err(SpecError::NoTrials);
        }
        Ok(Self {
            source,
            algo,
            mode,
            bit_budget,
            trials,
        })
    }
}

/// The same experiment at each `n` of a strictly increasing list of sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Must use a generator; its `n` is replaced by each entry of `ns`.
    pub base: ExperimentSpec,
    pub ns: Vec<usize>,
}

impl SweepSpec {
    pub fn new(base: ExperimentSpec, ns: Vec<usize>) -> Result<Self, SpecError> {
        if !matches!(base.source, GraphSource::Generated { .. }) {
            return Err(SpecError::SweepNeedsGenerator);
        }
        if ns.is_empty() {
            return Err(SpecError::EmptyRange);
        }
        if let Some(w) = ns.windows(2).find(|w| w[1] <= w[0]) {
            return Err(SpecError::NonMonotone(w[1], w[0]));
        }
        Ok(Self { base, ns })
    }

    pub fn at(&self, size: usize) -> ExperimentSpec {
        let mut spec = self.base.clone();
        if let GraphSource::Generated { n, .. } = &mut spec.source {
            *n = size;
        }
        spec
    }
}

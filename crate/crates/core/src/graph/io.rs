//! Edge-list text format.
//!
//! ```text
//! n nHat        (optional header)
//! u v           (one edge per line)
//! v             (a lone vertex, for graphs with isolated declarations)
//! ```
//!
//! Tokens are whitespace-separated decimal integers; blank lines and lines
//! starting with `#` are skipped. The first line is read as a header when it
//! is followed by at least one more line, its first number equals the number
//! of distinct vertices in the remaining lines, and its second number exceeds
//! every id. [`write_graph`] always emits a header.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::{Graph, GraphError, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadErrorKind {
    #[error("cannot parse {0:?} as a vertex id")]
    BadToken(String),
    #[error("expected one or two ids per line, found {0}")]
    BadArity(usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("graph is disconnected: vertex {0} is unreachable")]
    Disconnected(VertexId),
    #[error("header declares {declared} vertices but the body has {found}")]
    HeaderMismatch { declared: usize, found: usize },
    #[error("vertex id {id} is not below nHat = {n_hat}")]
    IdOutOfRange { id: VertexId, n_hat: u64 },
    #[error("document declares no vertices")]
    Empty,
    #[error("id space {0} is larger than supported")]
    IdSpaceTooLarge(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct LoadError {
    /// 1-based line number; 0 when the problem is not tied to a line.
    pub line: usize,
    pub kind: LoadErrorKind,
}

fn err(line: usize, kind: LoadErrorKind) -> LoadError {
    LoadError { line, kind }
}

struct Row {
    line: usize,
    ids: Vec<VertexId>,
}

pub fn load_graph(text: &str) -> Result<Graph, LoadError> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let ids = trimmed
            .split_whitespace()
            .map(|t| {
                t.parse::<VertexId>()
                    .map_err(|_| err(line, LoadErrorKind::BadToken(t.to_string())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if ids.is_empty() || ids.len() > 2 {
            return Err(err(line, LoadErrorKind::BadArity(ids.len())));
        }
        rows.push(Row { line, ids });
    }

    let header = detect_header(&rows);
    let body = if header.is_some() {
        &rows[1..]
    } else {
        &rows[..]
    };

    let mut vertices = BTreeSet::new();
    let mut edges: BTreeMap<(VertexId, VertexId), usize> = BTreeMap::new();
    let mut first_line_of: BTreeMap<VertexId, usize> = BTreeMap::new();
    for row in body {
        for &v in &row.ids {
            vertices.insert(v);
            first_line_of.entry(v).or_insert(row.line);
        }
        if let [u, v] = row.ids[..] {
            if u == v {
                return Err(err(row.line, LoadErrorKind::SelfLoop(u)));
            }
            let key = (u.min(v), u.max(v));
            if edges.insert(key, row.line).is_some() {
                return Err(err(row.line, LoadErrorKind::DuplicateEdge(key.0, key.1)));
            }
        }
    }
    if vertices.is_empty() {
        return Err(err(0, LoadErrorKind::Empty));
    }
    let max_id = *vertices.iter().next_back().unwrap();
    let n_hat = match header {
        Some((declared, n_hat)) => {
            if declared != vertices.len() as u64 {
                return Err(err(
                    rows[0].line,
                    LoadErrorKind::HeaderMismatch {
                        declared: declared as usize,
                        found: vertices.len(),
                    },
                ));
            }
            n_hat
        }
        None => max_id.saturating_add(1),
    };

    Graph::new(n_hat, vertices.iter().copied(), edges.keys().copied()).map_err(|e| match e {
        GraphError::Disconnected { unreachable, .. } => err(
            first_line_of.get(&unreachable).copied().unwrap_or(0),
            LoadErrorKind::Disconnected(unreachable),
        ),
        GraphError::IdOutOfRange { id, n_hat } => err(
            first_line_of.get(&id).copied().unwrap_or(0),
            LoadErrorKind::IdOutOfRange { id, n_hat },
        ),
        GraphError::SelfLoop(v) => err(0, LoadErrorKind::SelfLoop(v)),
        GraphError::DuplicateEdge(u, v) => err(0, LoadErrorKind::DuplicateEdge(u, v)),
        GraphError::IdSpaceTooSmall { n, n_hat } => err(
            0,
            LoadErrorKind::HeaderMismatch {
                declared: n_hat as usize,
                found: n,
            },
        ),
        GraphError::DuplicateVertex(_) | GraphError::UnknownEndpoint(_, _) => {
            unreachable!("vertex set is deduplicated and contains every endpoint")
        }
        GraphError::Empty => err(0, LoadErrorKind::Empty),
        GraphError::IdSpaceTooLarge(n_hat) => err(0, LoadErrorKind::IdSpaceTooLarge(n_hat)),
    })
}

fn detect_header(rows: &[Row]) -> Option<(u64, u64)> {
    let first = rows.first()?;
    let [declared, n_hat] = first.ids[..] else {
        return None;
    };
    if rows.len() < 2 {
        return None;
    }
    let body: BTreeSet<VertexId> = rows[1..]
        .iter()
        .flat_map(|r| r.ids.iter().copied())
        .collect();
    let max_id = *body.iter().next_back()?;
    (declared == body.len() as u64 && n_hat > max_id).then_some((declared, n_hat))
}

/// Serializes with a header line, edges sorted, then any isolated vertices.
pub fn write_graph(g: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", g.n(), g.n_hat());
    let edges = g.edges();
    for (u, v) in &edges {
        let _ = writeln!(out, "{u} {v}");
    }
    for &v in g.vertices() {
        if g.degree(v) == 0 {
            let _ = writeln!(out, "{v}");
        }
    }
    out
}

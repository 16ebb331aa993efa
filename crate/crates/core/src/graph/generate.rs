use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Graph, VertexId};

const GNP_RETRIES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Ring,
    Path,
    Complete,
    RandomGnp,
    RandomTree,
}

impl GraphKind {
    pub const ALL: [GraphKind; 5] = [
        Self::Ring,
        Self::Path,
        Self::Complete,
        Self::RandomGnp,
        Self::RandomTree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ring => "ring",
            Self::Path => "path",
            Self::Complete => "complete",
            Self::RandomGnp => "random-gnp",
            Self::RandomTree => "random-tree",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphKind {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GenerateError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("unknown graph kind {0:?}")]
    UnknownKind(String),
    #[error("graph needs at least one vertex")]
    NoVertices,
    #[error("random-gnp needs an edge probability in (0, 1], got {0:?}")]
    BadProbability(Option<f64>),
    #[error("no connected G(n={n}, p={p}) sample within {retries} retries")]
    RetriesExhausted { n: usize, p: f64, retries: usize },
}

/// Deterministic generator. Vertex ids are a seed-determined permutation of
/// `[0, n)`, so `n̂ = n` and positional structure is decoupled from id order.
pub fn generate_graph(
    kind: GraphKind,
    n: usize,
    p: Option<f64>,
    seed: u64,
) -> Result<Graph, GenerateError> {
    if n == 0 {
        return Err(GenerateError::NoVertices);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<VertexId> = (0..n as u64).collect();
    ids.shuffle(&mut rng);

    let positional: Vec<(usize, usize)> = match kind {
        GraphKind::Path => (1..n).map(|i| (i - 1, i)).collect(),
        GraphKind::Ring => {
            let mut e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            if n >= 3 {
                e.push((n - 1, 0));
            }
            e
        }
        GraphKind::Complete => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect(),
        GraphKind::RandomTree => (1..n).map(|i| (rng.gen_range(0..i), i)).collect(),
        GraphKind::RandomGnp => {
            let prob = match p {
                Some(x) if x > 0.0 && x <= 1.0 => x,
                other => return Err(GenerateError::BadProbability(other)),
            };
            let mut found = None;
            for _ in 0..GNP_RETRIES {
                let e: Vec<_> = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|_| rng.gen_bool(prob))
                    .collect();
                if positional_connected(n, &e) {
                    found = Some(e);
                    break;
                }
            }
            found.ok_or(GenerateError::RetriesExhausted {
                n,
                p: prob,
                retries: GNP_RETRIES,
            })?
        }
    };
    let edges = positional.into_iter().map(|(a, b)| (ids[a], ids[b]));
    Ok(Graph::new(n as u64, ids.iter().copied(), edges)
        .expect("generated graphs are simple and connected"))
}

fn positional_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            comps -= 1;
        }
    }
    comps == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_has_degree_two() {
        let g = generate_graph(GraphKind::Ring, 5, None, 1).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.edge_count(), 5);
        assert!(g.vertices().iter().all(|&v| g.degree(v) == 2));
    }

    #[test]
    fn complete_edge_count() {
        let g = generate_graph(GraphKind::Complete, 4, None, 0).unwrap();
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn gnp_is_deterministic() {
        let a = generate_graph(GraphKind::RandomGnp, 32, Some(0.2), 7).unwrap();
        let b = generate_graph(GraphKind::RandomGnp, 32, Some(0.2), 7).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert!(a.is_connected());
    }

    #[test]
    fn ids_are_permuted() {
        let g = generate_graph(GraphKind::Path, 16, None, 3).unwrap();
        assert_eq!(g.n_hat(), 16);
        // A shuffled path should not be the identity path 0-1-2-...
        let identity: Vec<_> = (1..16u64).map(|i| (i - 1, i)).collect();
        assert_ne!(g.edges(), identity);
    }

    #[test]
    fn small_sizes_and_errors() {
        assert_eq!(generate_graph(GraphKind::Ring, 1, None, 0).unwrap().n(), 1);
        assert_eq!(
            generate_graph(GraphKind::Ring, 2, None, 0)
                .unwrap()
                .edge_count(),
            1
        );
        assert_eq!(
            generate_graph(GraphKind::RandomTree, 9, None, 4)
                .unwrap()
                .edge_count(),
            8
        );
        assert_eq!(
            generate_graph(GraphKind::Path, 0, None, 0),
            Err(GenerateError::NoVertices)
        );
        assert!(matches!(
            generate_graph(GraphKind::RandomGnp, 5, None, 0),
            Err(GenerateError::BadProbability(None))
        ));
        assert!(matches!(
            generate_graph(GraphKind::RandomGnp, 40, Some(0.001), 0),
            Err(GenerateError::RetriesExhausted { .. })
        ));
        assert_eq!(
            "random-tree".parse::<GraphKind>().unwrap(),
            GraphKind::RandomTree
        );
    }
}

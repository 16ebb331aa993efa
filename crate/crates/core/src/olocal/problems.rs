use std::collections::BTreeMap;

use crate::graph::VertexId;

/// Everything a vertex may consult when it decides.
#[derive(Debug, Clone, Copy)]
pub struct DecisionContext<'a> {
    pub id: VertexId,
    pub degree: usize,
    pub max_degree: usize,
    /// Decisions of neighbors with a smaller color.
    pub out: &'a BTreeMap<VertexId, u64>,
    /// Decisions of every vertex reachable along out-edges. Empty unless the
    /// problem is transitive.
    pub known: &'a BTreeMap<VertexId, u64>,
}

pub trait OLocalProblem: Sync {
    fn name(&self) -> &'static str;

    /// Whether decisions need the whole out-reachable set rather than just
    /// the out-neighbors.
    fn transitive(&self) -> bool {
        false
    }

    /// `None` means the inputs were insufficient, which aborts the run.
    fn decide(&self, ctx: &DecisionContext) -> Option<u64>;
}

/// Maximal independent set: 1 joins, 0 stays out.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mis;

impl OLocalProblem for Mis {
    fn name(&self) -> &'static str {
        "mis"
    }

    fn decide(&self, ctx: &DecisionContext) -> Option<u64> {
        Some(u64::from(!ctx.out.values().any(|&d| d == 1)))
    }
}

/// Greedy coloring from the palette `1..=Δ+1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DeltaPlusOneColoring;

impl OLocalProblem for DeltaPlusOneColoring {
    fn name(&self) -> &'static str {
        "delta-plus-one-coloring"
    }

    fn decide(&self, ctx: &DecisionContext) -> Option<u64> {
        (1..=ctx.max_degree as u64 + 1).find(|c| !ctx.out.values().any(|d| d == c))
    }
}

pub const OLOCAL_PROBLEMS: [&str; 2] = ["mis", "delta-plus-one-coloring"];

pub fn olocal_problem(name: &str) -> Option<&'static dyn OLocalProblem> {
    match name {
        "mis" => Some(&Mis),
        "delta-plus-one-coloring" => Some(&DeltaPlusOneColoring),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx<'a>(
        out: &'a BTreeMap<VertexId, u64>,
        empty: &'a BTreeMap<VertexId, u64>,
        max_degree: usize,
    ) -> DecisionContext<'a> {
        DecisionContext {
            id: 0,
            degree: out.len(),
            max_degree,
            out,
            known: empty,
        }
    }

    #[test]
    fn mis_joins_when_no_lower_neighbor_did() {
        let e = BTreeMap::new();
        assert_eq!(
            Mis.decide(&ctx(&BTreeMap::from([(1, 0), (2, 0)]), &e, 2)),
            Some(1)
        );
        assert_eq!(
            Mis.decide(&ctx(&BTreeMap::from([(1, 0), (2, 1)]), &e, 2)),
            Some(0)
        );
        assert_eq!(Mis.decide(&ctx(&e, &e, 0)), Some(1));
    }

    #[test]
    fn coloring_takes_smallest_free() {
        let e = BTreeMap::new();
        assert_eq!(
            DeltaPlusOneColoring.decide(&ctx(&BTreeMap::from([(1, 1), (2, 2)]), &e, 3)),
            Some(3)
        );
        assert_eq!(
            DeltaPlusOneColoring.decide(&ctx(&BTreeMap::from([(1, 2)]), &e, 3)),
            Some(1)
        );
        assert_eq!(olocal_problem("mis").unwrap().name(), "mis");
        assert!(olocal_problem("nope").is_none());
    }
}

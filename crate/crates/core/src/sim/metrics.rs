use std::collections::BTreeMap;

use serde::Serialize;

use super::Mode;
use crate::graph::{Graph, VertexId};

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub n: usize,
    pub n_hat: u64,
    pub mode: Mode,
    pub awake_per_vertex: BTreeMap<VertexId, u64>,
    pub worst_awake: u64,
    pub avg_awake: f64,
    pub clock_rounds: u64,
    pub total_messages: u64,
    pub max_message_bits: u64,
    pub total_message_bits: u64,
}

/// Flat key/value form used in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsRecord {
    pub n: usize,
    pub n_hat: u64,
    pub mode: Mode,
    pub worst_awake: u64,
    pub avg_awake: f64,
    pub clock_rounds: u64,
    pub total_messages: u64,
    pub max_message_bits: u64,
    pub total_message_bits: u64,
}

impl RunMetrics {
    pub(crate) fn new(
        g: &Graph,
        mode: Mode,
        awake: Vec<u64>,
        clock_rounds: u64,
        total_messages: u64,
        max_message_bits: u64,
        total_message_bits: u64,
    ) -> Self {
        let worst_awake = awake.iter().copied().max().unwrap_or(0);
        let avg_awake = awake.iter().sum::<u64>() as f64 / awake.len().max(1) as f64;
        let awake_per_vertex = awake
            .into_iter()
            .enumerate()
            .map(|(i, a)| (g.id_of(i), a))
            .collect();
        Self {
            n: g.n(),
            n_hat: g.n_hat(),
            mode,
            awake_per_vertex,
            worst_awake,
            avg_awake,
            clock_rounds,
            total_messages,
            max_message_bits,
            total_message_bits,
        }
    }

    pub fn awake(&self, v: VertexId) -> u64 {
        self.awake_per_vertex.get(&v).copied().unwrap_or(0)
    }

    pub fn total_awake(&self) -> u64 {
        self.awake_per_vertex.values().sum()
    }

    /// `Σ_v a(v)·deg(v)`: at most one message per edge direction per awake round.
    pub fn message_capacity(&self, g: &Graph) -> u64 {
        self.awake_per_vertex
            .iter()
            .map(|(&v, &a)| a * g.degree(v) as u64)
            .sum()
    }

    pub fn message_bound_holds(&self, g: &Graph) -> bool {
        self.total_messages <= self.message_capacity(g)
    }

    pub fn record(&self) -> MetricsRecord {
        MetricsRecord {
            n: self.n,
            n_hat: self.n_hat,
            mode: self.mode,
            worst_awake: self.worst_awake,
            avg_awake: self.avg_awake,
            clock_rounds: self.clock_rounds,
            total_messages: self.total_messages,
            max_message_bits: self.max_message_bits,
            total_message_bits: self.total_message_bits,
        }
    }
}

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `⟨tree_id, level⟩`, ordered lexicographically (tree id dominates).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexLabel {
    pub tree_id: u64,
    pub level: u64,
}

impl VertexLabel {
    pub const fn new(tree_id: u64, level: u64) -> Self {
        Self { tree_id, level }
    }
}

impl fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.tree_id, self.level)
    }
}

pub fn label_compare(a: VertexLabel, b: VertexLabel) -> Ordering {
    a.tree_id.cmp(&b.tree_id).then(a.level.cmp(&b.level))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("label {label} outside range: tree id must be < {n_hat}, level < {n}")]
pub struct LabelRangeError {
    pub label: VertexLabel,
    pub n_hat: u64,
    pub n: u64,
}

/// Maps a label to a round offset: `tree_id · (n + 1) + level`.
///
/// Strictly monotone in [`label_compare`] for all labels with
/// `tree_id < n_hat` and `level < n`.
pub fn label_to_round(label: VertexLabel, n_hat: u64, n: u64) -> Result<u64, LabelRangeError> {
    if label.tree_id >= n_hat || label.level >= n {
        return Err(LabelRangeError { label, n_hat, n });
    }
    Ok(label.tree_id * (n + 1) + label.level)
}

/// Size of the round window that contains every `label_to_round` value: `(n̂ + 1)(n + 1)`.
pub fn label_window(n_hat: u64, n: u64) -> u64 {
    (n_hat + 1) * (n + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(a: u64, b: u64) -> VertexLabel {
        VertexLabel::new(a, b)
    }

    #[test]
    fn lexicographic_examples() {
        assert_eq!(label_compare(l(2, 9), l(3, 0)), Ordering::Less);
        assert_eq!(label_compare(l(3, 1), l(3, 1)), Ordering::Equal);
        assert_eq!(label_compare(l(3, 2), l(3, 1)), Ordering::Greater);
    }

    #[test]
    fn sort_matches_enumerated_orderings() {
        let items = [l(1, 5), l(0, 9), l(1, 2)];
        // Oracle: the unique permutation in which every adjacent pair is ascending
        // under the coordinate-wise definition.
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let less = |a: VertexLabel, b: VertexLabel| {
            a.tree_id < b.tree_id || (a.tree_id == b.tree_id && a.level < b.level)
        };
        let sorted: Vec<_> = perms
            .iter()
            .filter(|p| less(items[p[0]], items[p[1]]) && less(items[p[1]], items[p[2]]))
            .map(|p| p.map(|i| items[i]))
            .collect();
        assert_eq!(sorted.len(), 1);
        let mut by_impl = items.to_vec();
        by_impl.sort_by(|a, b| label_compare(*a, *b));
        assert_eq!(by_impl, sorted[0].to_vec());
        assert_eq!(by_impl, vec![l(0, 9), l(1, 2), l(1, 5)]);
    }

    #[test]
    fn round_mapping_examples() {
        assert_eq!(label_to_round(l(0, 0), 7, 3), Ok(0));
        assert_eq!(label_to_round(l(2, 3), 8, 4), Ok(13));
        assert!(label_to_round(l(4, 0), 4, 4).is_err());
        assert!(label_to_round(l(0, 4), 4, 4).is_err());
    }

    #[test]
    fn round_mapping_is_order_isomorphic_exhaustive() {
        for n_hat in 1..=8u64 {
            for n in 1..=8u64 {
                let labels: Vec<_> = (0..n_hat)
                    .flat_map(|a| (0..n).map(move |b| l(a, b)))
                    .collect();
                for &a in &labels {
                    for &b in &labels {
                        let ra = label_to_round(a, n_hat, n).unwrap();
                        let rb = label_to_round(b, n_hat, n).unwrap();
                        assert_eq!(ra.cmp(&rb), label_compare(a, b), "{a} vs {b}");
                        assert!(ra < label_window(n_hat, n));
                    }
                }
            }
        }
    }
}

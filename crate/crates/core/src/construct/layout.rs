//! Static clock-round frame for the connection phases.
//!
//! A phase is a fixed sequence of slots. Tree-internal slots are windows of
//! `W = (n̂+1)(n+1)` rounds in which each vertex wakes at offsets derived from
//! its own and its parent's label; global slots are single rounds in which
//! every vertex is awake.

use crate::graph::{ceil_log2, label_to_round, label_window, VertexLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    /// Convergecast of candidate edges (and subtree topology in LOCAL mode).
    Gather,
    /// Broadcast of the root's choice.
    Choice,
    /// Global: a rerooted tree's new root tells its chosen neighbor.
    Notify,
    /// Convergecast of adoption flags and path distances.
    PathUp,
    /// Broadcast of adoption status and rerooted levels.
    PathDown,
    /// Global: stage-one labels.
    StageOneLabels,
    /// Broadcast of final labels within each stage-one component.
    Relabel,
    /// Global: final labels of component vertices.
    AttachLabels,
    /// Broadcast of final labels inside attaching local-minimum trees.
    AttachRelabel,
    /// Global: every final label.
    FinalLabels,
}

const SLOTS: [Slot; 10] = [
    Slot::Gather,
    Slot::Choice,
    Slot::Notify,
    Slot::PathUp,
    Slot::PathDown,
    Slot::StageOneLabels,
    Slot::Relabel,
    Slot::AttachLabels,
    Slot::AttachRelabel,
    Slot::FinalLabels,
];

impl Slot {
    pub fn is_global(self) -> bool {
        matches!(
            self,
            Slot::Notify | Slot::StageOneLabels | Slot::AttachLabels | Slot::FinalLabels
        )
    }
}

/// Role of a vertex in one round of a tree window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Receive,
    Send,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseLayout {
    pub n: u64,
    pub n_hat: u64,
    /// Tree-window width `(n̂+1)(n+1)`.
    pub window: u64,
    pub phase_len: u64,
    pub phases: u64,
}

impl PhaseLayout {
    /// `None` when the frame would not fit in 64-bit round numbers.
    pub fn new(n: u64, n_hat: u64) -> Option<Self> {
        let window = (n_hat as u128 + 1) * (n as u128 + 1);
        let phase_len = 6 * window + 4;
        let phases = ceil_log2(n) as u64;
        if phase_len * (phases as u128 + 1) > u64::MAX as u128 {
            return None;
        }
        let window = label_window(n_hat, n);
        Some(Self {
            n,
            n_hat,
            window,
            phase_len: 6 * window + 4,
            phases,
        })
    }

    pub fn total_rounds(&self) -> u64 {
        self.phases * self.phase_len
    }

    pub fn phase_start(&self, phase: u64) -> u64 {
        phase * self.phase_len
    }

    /// First round of `slot` within `phase`.
    pub fn slot_start(&self, phase: u64, slot: Slot) -> u64 {
        let mut at = self.phase_start(phase);
        for s in SLOTS {
            if s == slot {
                return at;
            }
            at += if s.is_global() { 1 } else { self.window };
        }
        unreachable!()
    }

    /// Phase, slot and offset within the slot for an absolute round.
    pub fn locate(&self, round: u64) -> (u64, Slot, u64) {
        let phase = round / self.phase_len;
        let mut off = round % self.phase_len;
        for s in SLOTS {
            let len = if s.is_global() { 1 } else { self.window };
            if off < len {
                return (phase, s, off);
            }
            off -= len;
        }
        unreachable!("offset inside phase")
    }

    pub fn round_of(&self, label: VertexLabel) -> u64 {
        label_to_round(label, self.n_hat, self.n)
            .expect("labels stay within the id and level bounds")
    }
}

/// Broadcast rounds (relative to the window start): receive at the parent's
/// label round, forward at one's own. The root only sends.
pub fn broadcast_rounds(
    layout: &PhaseLayout,
    own: VertexLabel,
    parent: Option<VertexLabel>,
) -> Vec<(u64, Role)> {
    let mut out = Vec::with_capacity(2);
    if let Some(p) = parent {
        out.push((layout.round_of(p), Role::Receive));
    }
    out.push((layout.round_of(own), Role::Send));
    out
}

/// Convergecast rounds (relative to the window start): collect from children
/// at `W − 1 − round(own)`, report to the parent at `W − 1 − round(parent)`.
/// The root only collects.
pub fn convergecast_rounds(
    layout: &PhaseLayout,
    own: VertexLabel,
    parent: Option<VertexLabel>,
) -> Vec<(u64, Role)> {
    let last = layout.window - 1;
    let mut out = vec![(last - layout.round_of(own), Role::Receive)];
    if let Some(p) = parent {
        out.push((last - layout.round_of(p), Role::Send));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_tile_the_phase() {
        let l = PhaseLayout::new(5, 9).unwrap();
        assert_eq!(l.window, 60);
        assert_eq!(l.phase_len, 364);
        let mut seen = Vec::new();
        for r in l.phase_start(1)..l.phase_start(2) {
            let (phase, slot, off) = l.locate(r);
            assert_eq!(phase, 1);
            assert_eq!(l.slot_start(1, slot) + off, r);
            if seen.last() != Some(&slot) {
                seen.push(slot);
            }
        }
        assert_eq!(seen, SLOTS.to_vec());
    }

    #[test]
    fn roles_are_ordered() {
        let l = PhaseLayout::new(4, 4).unwrap();
        let child = VertexLabel::new(2, 1);
        let parent = VertexLabel::new(2, 0);
        let bc = broadcast_rounds(&l, child, Some(parent));
        assert!(bc[0].0 < bc[1].0 && bc[0].1 == Role::Receive);
        let cc = convergecast_rounds(&l, child, Some(parent));
        assert!(cc[0].0 < cc[1].0 && cc[0].1 == Role::Receive);
        assert_eq!(broadcast_rounds(&l, parent, None).len(), 1);
    }

    #[test]
    fn singleton_has_no_phases() {
        assert_eq!(PhaseLayout::new(1, 1).unwrap().total_rounds(), 0);
        assert!(PhaseLayout::new(1 << 31, 1 << 32).is_none());
    }
}

//! Round frame of one fast phase. Tree windows are `n` rounds wide: labels are
//! in level form, so the level alone orders a broadcast or convergecast.

use super::overlay::{color_schedule, ColorStep};
use crate::graph::ceil_log2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FastSlot {
    /// Convergecast of the minimum cross edge.
    Gather,
    /// Broadcast of the pointer edge.
    Choice,
    /// Global: every vertex tells its neighbors which tree its own tree points at.
    Pointers,
    /// Convergecast along the path from the pointer vertex to the root.
    PathUp,
    /// Broadcast of distances from the pointer vertex.
    PathDown,
    /// Global: tree colors.
    ColorSwap(usize),
    /// Broadcast of the new tree color from the pointer vertex.
    ColorSpread(usize),
    /// Global: colors, marks, and who is joining whom.
    MarkSwap(u64),
    /// Convergecast of "a child joined us".
    MarkUp(u64),
    /// Broadcast of the tree's new marks.
    MarkDown(u64),
    /// Global: piece roots (stage 1) and middles (stage 2) publish labels;
    /// stage 3 publishes every final label.
    Labels(u8),
    /// Broadcast of new labels inside middle (stage 2) or leaf (stage 3) trees.
    Spread(u8),
}

impl FastSlot {
    pub fn is_global(self) -> bool {
        matches!(
            self,
            FastSlot::Pointers
                | FastSlot::ColorSwap(_)
                | FastSlot::MarkSwap(_)
                | FastSlot::Labels(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastLayout {
    pub n: u64,
    pub window: u64,
    pub phases: u64,
    pub phase_len: u64,
    pub steps: Vec<ColorStep>,
    slots: Vec<(FastSlot, u64)>,
}

impl FastLayout {
    pub fn new(n: u64, n_hat: u64) -> Option<Self> {
        let window = n.max(1);
        let steps = color_schedule(n_hat);
        let mut slots = vec![
            (FastSlot::Gather, window),
            (FastSlot::Choice, window),
            (FastSlot::Pointers, 1),
            (FastSlot::PathUp, window),
            (FastSlot::PathDown, window),
        ];
        for i in 0..steps.len() {
            slots.push((FastSlot::ColorSwap(i), 1));
            slots.push((FastSlot::ColorSpread(i), window));
        }
        for k in 0..3 {
            slots.push((FastSlot::MarkSwap(k), 1));
            slots.push((FastSlot::MarkUp(k), window));
            slots.push((FastSlot::MarkDown(k), window));
        }
        slots.extend([
            (FastSlot::Labels(1), 1),
            (FastSlot::Spread(2), window),
            (FastSlot::Labels(2), 1),
            (FastSlot::Spread(3), window),
            (FastSlot::Labels(3), 1),
        ]);
        let phase_len: u64 = slots
            .iter()
            .map(|s| s.1)
            .try_fold(0u64, |a, b| a.checked_add(b))?;
        let phases = ceil_log2(n) as u64;
        phase_len.checked_mul(phases + 1)?;
        Some(Self {
            n,
            window,
            phases,
            phase_len,
            steps,
            slots,
        })
    }

    pub fn total_rounds(&self) -> u64 {
        self.phases * self.phase_len
    }

    pub fn slot_start(&self, phase: u64, slot: FastSlot) -> u64 {
        let mut at = phase * self.phase_len;
        for &(s, len) in &self.slots {
            if s == slot {
                return at;
            }
            at += len;
        }
        unreachable!("slot {slot:?} is part of every phase")
    }

    pub fn locate(&self, round: u64) -> (u64, FastSlot, u64) {
        let phase = round / self.phase_len;
        let mut off = round % self.phase_len;
        for &(s, len) in &self.slots {
            if off < len {
                return (phase, s, off);
            }
            off -= len;
        }
        unreachable!("offset inside phase")
    }

    /// Global single-round slots of a phase, in order.
    pub fn globals(&self, phase: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut at = phase * self.phase_len;
        for &(s, len) in &self.slots {
            if s.is_global() {
                out.push(at);
            }
            at += len;
        }
        out
    }

    /// Broadcast offsets: listen at the parent's level, forward at one's own.
    pub fn down(&self, level: u64) -> Vec<u64> {
        if level == 0 {
            vec![0]
        } else {
            vec![level - 1, level]
        }
    }

    /// Convergecast offsets: collect at `W − 1 − level`, report at `W − level`.
    pub fn up(&self, level: u64) -> Vec<u64> {
        let last = self.window - 1;
        if level == 0 {
            vec![last]
        } else {
            vec![last - level, last - level + 1]
        }
    }
}

//! The connection-phase vertex program.
//!
//! Every phase follows the slots of [`PhaseLayout`]:
//!
//! 1. `Gather`: each tree convergecasts its minimum cross edge to its root
//!    (LOCAL mode also ships the tree's edges so the root can reroot it).
//! 2. `Choice`: the root broadcasts whether the tree connects to a smaller
//!    neighbor tree, is a local minimum, or already spans the graph.
//! 3. `Notify`: the new root `u` of each connecting tree tells its chosen
//!    neighbor `w`; a local-minimum tree that hears this is adopted.
//! 4. `PathUp` / `PathDown`: local-minimum trees learn whether they were
//!    adopted. In CONGEST mode every non-spanning tree also computes its
//!    rerooted levels here by counting distances along the path to the new root.
//! 5. `StageOneLabels`: everyone publishes its stage-one label.
//! 6. `Relabel`: each stage-one component (rooted at a local-minimum tree)
//!    broadcasts `⟨component id, depth⟩` labels.
//! 7. `AttachLabels` / `AttachRelabel`: an unadopted local-minimum tree hangs
//!    itself under its minimum cross edge and relabels from the attach point.
//! 8. `FinalLabels`: everyone publishes its final label.

use std::collections::BTreeMap;

use super::layout::{broadcast_rounds, convergecast_rounds, PhaseLayout, Role, Slot};
use super::select::{classify, local_candidate, min_candidate};
use crate::graph::{reroot_tree, DltEntry, VertexId, VertexLabel};
use crate::sim::{
    to_all_neighbors, CandidateEdge, ChoiceKind, Control, Envelope, Init, LocalView, Payload,
    PlanEntry, VertexProgram,
};

pub(crate) struct Connection {
    pub layout: PhaseLayout,
    pub congest: bool,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Scratch {
    best: Option<CandidateEdge>,
    edges: Vec<(VertexId, VertexId)>,
    choice: Option<(ChoiceKind, VertexId, VertexId)>,
    choice_msg: Option<Payload>,
    /// Level and parent inside the own tree rerooted at the choice vertex.
    new_level: Option<u64>,
    new_parent: Option<VertexId>,
    path_dist: Option<u64>,
    path_child: Option<VertexId>,
    subtree_adopted: bool,
    adopted: Option<bool>,
    down_msg: Option<Payload>,
    s1_label: Option<VertexLabel>,
    s1_parent: Option<VertexId>,
    s1_parent_label: Option<VertexLabel>,
    final_label: Option<VertexLabel>,
    final_parent: Option<VertexId>,
    final_parent_label: Option<VertexLabel>,
}

#[derive(Debug, Clone)]
pub(crate) struct ConnState {
    pub label: VertexLabel,
    pub parent: Option<VertexId>,
    pub parent_label: Option<VertexLabel>,
    nbr: BTreeMap<VertexId, VertexLabel>,
    s: Scratch,
}

impl ConnState {
    pub fn entry(&self) -> DltEntry {
        match (self.parent, self.parent_label) {
            (Some(p), Some(pl)) => DltEntry::child(self.label, p, pl),
            _ => DltEntry::root(self.label),
        }
    }
}

impl Connection {
    fn kind(st: &ConnState) -> Option<ChoiceKind> {
        st.s.choice.map(|c| c.0)
    }

    fn is_choice_vertex(st: &ConnState, me: VertexId) -> bool {
        st.s.choice.is_some_and(|(_, u, _)| u == me)
    }

    fn unadopted(st: &ConnState) -> bool {
        Self::kind(st) == Some(ChoiceKind::LocalMin) && st.s.adopted == Some(false)
    }

    fn temp_labels(st: &ConnState) -> (VertexLabel, Option<VertexLabel>) {
        let lvl =
            st.s.new_level
                .expect("rerooted level known before attaching");
        let own = VertexLabel::new(st.label.tree_id, lvl);
        (
            own,
            st.s.new_parent
                .map(|_| VertexLabel::new(st.label.tree_id, lvl - 1)),
        )
    }

    /// Role in a tree window, or `None` if this vertex is not scheduled in it.
    fn role(&self, st: &ConnState, slot: Slot, off: u64) -> Option<Role> {
        let rounds = match slot {
            Slot::Gather | Slot::PathUp => {
                convergecast_rounds(&self.layout, st.label, st.parent_label)
            }
            Slot::Choice | Slot::PathDown => {
                broadcast_rounds(&self.layout, st.label, st.parent_label)
            }
            Slot::Relabel => broadcast_rounds(&self.layout, st.s.s1_label?, st.s.s1_parent_label),
            Slot::AttachRelabel => {
                let (own, parent) = Self::temp_labels(st);
                broadcast_rounds(&self.layout, own, parent)
            }
            _ => return None,
        };
        rounds
            .into_iter()
            .find(|&(r, _)| r == off)
            .map(|(_, role)| role)
    }

    fn schedule_window(&self, ctl: &mut Control<DltEntry>, start: u64, rounds: Vec<(u64, Role)>) {
        for (r, _) in rounds {
            ctl.wake_at(start + r);
        }
    }

    /// Rounds fixed at the start of a phase: the first two tree windows and every global slot.
    fn phase_rounds(&self, phase: u64, st: &ConnState) -> Vec<u64> {
        let l = &self.layout;
        let mut out = Vec::new();
        let gs = l.slot_start(phase, Slot::Gather);
        out.extend(
            convergecast_rounds(l, st.label, st.parent_label)
                .into_iter()
                .map(|(r, _)| gs + r),
        );
        let cs = l.slot_start(phase, Slot::Choice);
        out.extend(
            broadcast_rounds(l, st.label, st.parent_label)
                .into_iter()
                .map(|(r, _)| cs + r),
        );
        for s in [
            Slot::Notify,
            Slot::StageOneLabels,
            Slot::AttachLabels,
            Slot::FinalLabels,
        ] {
            out.push(l.slot_start(phase, s));
        }
        out
    }

    fn start_phase(st: &mut ConnState, me: VertexId) {
        st.s = Scratch {
            best: local_candidate(me, st.label, &st.nbr),
            ..Scratch::default()
        };
    }

    /// Root of the tree decides once the whole tree has reported.
    fn decide(&self, st: &mut ConnState, me: VertexId, ctl: &mut Control<DltEntry>) {
        let kind = classify(st.s.best, st.label.tree_id);
        let (u, w) = st.s.best.map_or((me, me), |c| (c.u, c.w));
        let msg = if self.congest || kind == ChoiceKind::Alone {
            Payload::Choice { kind, u, w }
        } else {
            let mut edges = st.s.edges.clone();
            edges.sort_unstable();
            match reroot_tree(&edges, u) {
                Ok((levels, parents)) => {
                    let entries = levels
                        .iter()
                        .map(|(&vertex, &level)| PlanEntry {
                            vertex,
                            level,
                            parent: parents.get(&vertex).copied(),
                        })
                        .collect();
                    Payload::RerootPlan {
                        kind,
                        u,
                        w,
                        entries,
                    }
                }
                Err(e) => {
                    ctl.fail(format!("cannot reroot own tree: {e}"));
                    return;
                }
            }
        };
        self.learn_choice(st, me, &msg, ctl);
    }

    /// Records the tree's choice (from the root's decision or the parent's broadcast).
    fn learn_choice(
        &self,
        st: &mut ConnState,
        me: VertexId,
        msg: &Payload,
        ctl: &mut Control<DltEntry>,
    ) {
        let (kind, u, w) = match msg {
            Payload::Choice { kind, u, w } => (*kind, *u, *w),
            Payload::RerootPlan {
                kind,
                u,
                w,
                entries,
            } => {
                match entries.iter().find(|e| e.vertex == me) {
                    Some(e) => {
                        st.s.new_level = Some(e.level);
                        st.s.new_parent = e.parent;
                    }
                    None => ctl.fail("reroot plan does not cover this vertex"),
                }
                (*kind, *u, *w)
            }
            _ => {
                ctl.fail(format!(
                    "unexpected {} payload in choice window",
                    msg.kind_name()
                ));
                return;
            }
        };
        st.s.choice = Some((kind, u, w));
        st.s.choice_msg = Some(msg.clone());
        if u == me && kind != ChoiceKind::Alone {
            st.s.path_dist = Some(0);
        }
        let in_path_windows = match kind {
            ChoiceKind::Alone => false,
            ChoiceKind::LocalMin => true,
            ChoiceKind::Connect => self.congest,
        };
        if in_path_windows {
            let (phase, _, _) = self.layout.locate(ctl.round());
            let up = self.layout.slot_start(phase, Slot::PathUp);
            self.schedule_window(
                ctl,
                up,
                convergecast_rounds(&self.layout, st.label, st.parent_label),
            );
            let down = self.layout.slot_start(phase, Slot::PathDown);
            self.schedule_window(
                ctl,
                down,
                broadcast_rounds(&self.layout, st.label, st.parent_label),
            );
        }
        if kind == ChoiceKind::Connect && !self.congest {
            self.settle_stage_one(st, me);
        }
        if kind == ChoiceKind::Alone {
            st.s.adopted = Some(true);
            self.settle_stage_one(st, me);
        }
    }

    /// Fixes the stage-one label and parent once rerooting is known.
    fn settle_stage_one(&self, st: &mut ConnState, me: VertexId) {
        let (kind, u, w) = st.s.choice.expect("choice known");
        if kind == ChoiceKind::Connect {
            st.s.s1_label = Some(VertexLabel::new(
                st.label.tree_id,
                st.s.new_level.expect("level known"),
            ));
            st.s.s1_parent = if u == me { Some(w) } else { st.s.new_parent };
        } else {
            st.s.s1_label = Some(st.label);
            st.s.s1_parent = st.parent;
        }
    }

    /// Level and parent after rerooting, from the path distance or the parent's new level.
    fn settle_reroot(st: &mut ConnState, parent_level: Option<u64>) {
        if let Some(d) = st.s.path_dist {
            st.s.new_level = Some(d);
            st.s.new_parent = st.s.path_child;
        } else if let Some(pl) = parent_level {
            st.s.new_level = Some(pl + 1);
            st.s.new_parent = st.parent;
        }
    }

    fn down_payload(&self, st: &ConnState) -> Payload {
        let level = if self.congest { st.s.new_level } else { None };
        match Self::kind(st) {
            Some(ChoiceKind::Connect) => Payload::Distance(st.s.new_level.unwrap_or(0)),
            _ => Payload::Adoption {
                adopted: st.s.adopted.unwrap_or(false),
                path_dist: level,
            },
        }
    }

    fn finish_phase(
        &self,
        view: &LocalView,
        st: &mut ConnState,
        inbox: &[Envelope],
        ctl: &mut Control<DltEntry>,
    ) {
        let me = view.id;
        for e in inbox {
            if let Some(Payload::Label(l)) = e.payloads.first() {
                st.nbr.insert(e.src, *l);
            }
        }
        let Some(label) = st.s.final_label else {
            ctl.fail("no final label at the end of the phase");
            return;
        };
        st.label = label;
        st.parent = st.s.final_parent;
        st.parent_label = match st.parent {
            Some(p) => {
                let published = st.nbr.get(&p).copied();
                if published != st.s.final_parent_label {
                    ctl.fail(format!(
                        "parent {p} published {published:?}, expected {:?}",
                        st.s.final_parent_label
                    ));
                }
                published
            }
            None => None,
        };
        let (phase, _, _) = self.layout.locate(ctl.round());
        if phase + 1 < self.layout.phases {
            Self::start_phase(st, me);
            for r in self.phase_rounds(phase + 1, st) {
                ctl.wake_at(r);
            }
        } else {
            ctl.output(st.entry());
        }
    }
}

impl VertexProgram for Connection {
    type State = ConnState;
    type Output = DltEntry;

    fn init(&self, view: &LocalView) -> Init<ConnState, DltEntry> {
        let label = VertexLabel::new(view.id, 0);
        let nbr = view
            .neighbors
            .iter()
            .map(|&w| (w, VertexLabel::new(w, 0)))
            .collect();
        let mut st = ConnState {
            label,
            parent: None,
            parent_label: None,
            nbr,
            s: Scratch::default(),
        };
        if self.layout.phases == 0 {
            let entry = st.entry();
            return Init::new(st, []).with_output(entry);
        }
        Self::start_phase(&mut st, view.id);
        let wake = self.phase_rounds(0, &st);
        Init::new(st, wake)
    }

    fn on_send(&self, view: &LocalView, round: u64, st: &ConnState) -> Vec<(VertexId, Payload)> {
        let (_, slot, off) = self.layout.locate(round);
        let me = view.id;
        let label_msg =
            |l: Option<VertexLabel>| to_all_neighbors(view, &Payload::Label(l.unwrap_or(st.label)));
        match slot {
            Slot::Notify => {
                let target = match st.s.choice {
                    Some((ChoiceKind::Connect, u, w)) if u == me => Some(w),
                    _ => None,
                };
                view.neighbors
                    .iter()
                    .map(|&x| (x, Payload::Flag(Some(x) == target)))
                    .collect()
            }
            Slot::StageOneLabels => label_msg(st.s.s1_label),
            Slot::AttachLabels | Slot::FinalLabels => label_msg(st.s.final_label),
            _ => {
                if self.role(st, slot, off) != Some(Role::Send) {
                    return Vec::new();
                }
                match slot {
                    Slot::Gather => {
                        let p = if self.congest {
                            Payload::Candidate(st.s.best)
                        } else {
                            let mut edges = st.s.edges.clone();
                            edges.push((me, st.parent.expect("senders have parents")));
                            edges.sort_unstable();
                            Payload::SubtreeReport {
                                edges,
                                best: st.s.best,
                            }
                        };
                        vec![(st.parent.expect("senders have parents"), p)]
                    }
                    Slot::PathUp => {
                        let p = Payload::Adoption {
                            adopted: st.s.subtree_adopted,
                            path_dist: st.s.path_dist,
                        };
                        vec![(st.parent.expect("senders have parents"), p)]
                    }
                    Slot::Choice => {
                        st.s.choice_msg
                            .as_ref()
                            .map_or_else(Vec::new, |m| to_all_neighbors(view, m))
                    }
                    Slot::PathDown => {
                        st.s.down_msg
                            .as_ref()
                            .map_or_else(Vec::new, |m| to_all_neighbors(view, m))
                    }
                    Slot::Relabel | Slot::AttachRelabel => label_msg(st.s.final_label),
                    _ => Vec::new(),
                }
            }
        }
    }

    fn on_receive(
        &self,
        view: &LocalView,
        round: u64,
        inbox: &[Envelope],
        st: &mut ConnState,
        ctl: &mut Control<DltEntry>,
    ) {
        let (phase, slot, off) = self.layout.locate(round);
        let me = view.id;
        let from = |src: Option<VertexId>| {
            src.and_then(|p| inbox.iter().find(|e| e.src == p))
                .and_then(|e| e.payloads.first())
        };
        match slot {
            Slot::Gather => {
                if self.role(st, slot, off) != Some(Role::Receive) {
                    return;
                }
                for e in inbox {
                    match e.payloads.first() {
                        Some(Payload::Candidate(c)) => st.s.best = min_candidate(st.s.best, *c),
                        Some(Payload::SubtreeReport { edges, best }) => {
                            st.s.best = min_candidate(st.s.best, *best);
                            st.s.edges.extend_from_slice(edges);
                        }
                        _ => ctl.fail("unexpected payload while gathering candidates"),
                    }
                }
                if st.parent.is_none() {
                    self.decide(st, me, ctl);
                }
            }
            Slot::Choice => {
                if self.role(st, slot, off) == Some(Role::Receive) {
                    match from(st.parent).cloned() {
                        Some(msg) => self.learn_choice(st, me, &msg, ctl),
                        None => ctl.fail("no choice from parent"),
                    }
                }
            }
            Slot::Notify => {
                let chosen = inbox
                    .iter()
                    .any(|e| e.payloads.first() == Some(&Payload::Flag(true)));
                st.s.subtree_adopted = chosen;
            }
            Slot::PathUp => {
                if self.role(st, slot, off) != Some(Role::Receive) {
                    return;
                }
                for e in inbox {
                    if let Some(Payload::Adoption { adopted, path_dist }) = e.payloads.first() {
                        st.s.subtree_adopted |= adopted;
                        if let Some(d) = path_dist {
                            st.s.path_dist = Some(d + 1);
                            st.s.path_child = Some(e.src);
                        }
                    }
                }
                if st.parent.is_none() {
                    if Self::kind(st) == Some(ChoiceKind::LocalMin) {
                        st.s.adopted = Some(st.s.subtree_adopted);
                    }
                    if self.congest {
                        Self::settle_reroot(st, None);
                        if Self::kind(st) == Some(ChoiceKind::Connect) {
                            self.settle_stage_one(st, me);
                        }
                    }
                    st.s.down_msg = Some(self.down_payload(st));
                }
            }
            Slot::PathDown => {
                if self.role(st, slot, off) != Some(Role::Receive) {
                    return;
                }
                match from(st.parent).cloned() {
                    Some(Payload::Distance(d)) => {
                        Self::settle_reroot(st, Some(d));
                        self.settle_stage_one(st, me);
                    }
                    Some(Payload::Adoption { adopted, path_dist }) => {
                        st.s.adopted = Some(adopted);
                        if self.congest {
                            Self::settle_reroot(st, path_dist);
                        }
                    }
                    _ => {
                        ctl.fail("no path-down message from parent");
                        return;
                    }
                }
                st.s.down_msg = Some(self.down_payload(st));
            }
            Slot::StageOneLabels => {
                if Self::kind(st) == Some(ChoiceKind::LocalMin) && st.s.s1_label.is_none() {
                    self.settle_stage_one(st, me);
                }
                let published: BTreeMap<VertexId, VertexLabel> = inbox
                    .iter()
                    .filter_map(|e| match e.payloads.first() {
                        Some(Payload::Label(l)) => Some((e.src, *l)),
                        _ => None,
                    })
                    .collect();
                st.s.s1_parent_label = st.s.s1_parent.and_then(|p| published.get(&p).copied());
                if st.s.s1_parent.is_some() && st.s.s1_parent_label.is_none() {
                    ctl.fail("stage-one parent did not publish a label");
                    return;
                }
                if Self::unadopted(st) {
                    let (own, parent) = Self::temp_labels(st);
                    let start = self.layout.slot_start(phase, Slot::AttachRelabel);
                    self.schedule_window(ctl, start, broadcast_rounds(&self.layout, own, parent));
                } else {
                    let s1 = st.s.s1_label.expect("stage-one label known");
                    if st.s.s1_parent.is_none() {
                        st.s.final_label = Some(VertexLabel::new(s1.tree_id, 0));
                    }
                    let start = self.layout.slot_start(phase, Slot::Relabel);
                    self.schedule_window(
                        ctl,
                        start,
                        broadcast_rounds(&self.layout, s1, st.s.s1_parent_label),
                    );
                }
            }
            Slot::Relabel => {
                if self.role(st, slot, off) == Some(Role::Receive) {
                    match from(st.s.s1_parent) {
                        Some(Payload::Label(lp)) => {
                            st.s.final_label = Some(VertexLabel::new(lp.tree_id, lp.level + 1));
                            st.s.final_parent = st.s.s1_parent;
                            st.s.final_parent_label = Some(*lp);
                        }
                        _ => ctl.fail("no component label from stage-one parent"),
                    }
                }
            }
            Slot::AttachLabels => {
                if Self::unadopted(st) && Self::is_choice_vertex(st, me) {
                    let (_, _, w) = st.s.choice.expect("choice known");
                    match from(Some(w)) {
                        Some(Payload::Label(lw)) => {
                            st.s.final_label = Some(VertexLabel::new(lw.tree_id, lw.level + 1));
                            st.s.final_parent = Some(w);
                            st.s.final_parent_label = Some(*lw);
                        }
                        _ => ctl.fail(format!("attach target {w} did not publish a label")),
                    }
                }
            }
            Slot::AttachRelabel => {
                if self.role(st, slot, off) == Some(Role::Receive) {
                    match from(st.s.new_parent) {
                        Some(Payload::Label(lp)) => {
                            st.s.final_label = Some(VertexLabel::new(lp.tree_id, lp.level + 1));
                            st.s.final_parent = st.s.new_parent;
                            st.s.final_parent_label = Some(*lp);
                        }
                        _ => ctl.fail("no final label from rerooted parent"),
                    }
                }
            }
            Slot::FinalLabels => self.finish_phase(view, st, inbox, ctl),
        }
    }
}

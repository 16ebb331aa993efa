use std::collections::BTreeMap;

use super::layout::{FastLayout, FastSlot};
use super::overlay::{apply_color_step, mark_step, DepthTag, Marks};
use crate::construct::local_candidate;
use crate::graph::{DltEntry, VertexId, VertexLabel};
use crate::sim::{
    to_all_neighbors, CandidateEdge, Control, Envelope, Init, LocalView, Payload, VertexProgram,
};

pub(crate) struct FastConnection {
    pub layout: FastLayout,
}

/// What a vertex knew about its tree in the phase that just ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct PhaseNote {
    pub tree: u64,
    pub target: u64,
    pub h_root: bool,
    pub color: u64,
    pub marks: Marks,
    pub tag: DepthTag,
}

#[derive(Debug, Clone, Default)]
struct Scratch {
    best: Option<CandidateEdge>,
    choice: Option<CandidateEdge>,
    h_root: bool,
    path_dist: Option<u64>,
    path_child: Option<VertexId>,
    comm_level: Option<u64>,
    comm_parent: Option<VertexId>,
    color: u64,
    prev_color: u64,
    marks: Marks,
    got_child: bool,
    stage: Option<u8>,
    final_label: Option<VertexLabel>,
    final_parent: Option<VertexId>,
    final_parent_label: Option<VertexLabel>,
}

#[derive(Debug, Clone)]
pub(crate) struct FastState {
    pub label: VertexLabel,
    pub parent: Option<VertexId>,
    pub parent_label: Option<VertexLabel>,
    pub note: Option<PhaseNote>,
    nbr: BTreeMap<VertexId, VertexLabel>,
    s: Scratch,
}

impl FastState {
    pub fn entry(&self) -> DltEntry {
        match (self.parent, self.parent_label) {
            (Some(p), Some(pl)) => DltEntry::child(self.label, p, pl),
            _ => DltEntry::root(self.label),
        }
    }

    fn is_pointer_vertex(&self, me: VertexId) -> bool {
        self.s.choice.is_some_and(|c| c.u == me)
    }
}

fn words(p: Option<&Payload>) -> Option<&[u64]> {
    match p {
        Some(Payload::Words(w)) => Some(w),
        _ => None,
    }
}

fn from(inbox: &[Envelope], src: Option<VertexId>) -> Option<&Payload> {
    src.and_then(|s| inbox.iter().find(|e| e.src == s))
        .and_then(|e| e.payloads.first())
}

#[derive(PartialEq)]
enum Role {
    Receive,
    Send,
}

impl FastConnection {
    fn down_role(&self, level: u64, off: u64) -> Option<Role> {
        if off == level {
            Some(Role::Send)
        } else if level > 0 && off == level - 1 {
            Some(Role::Receive)
        } else {
            None
        }
    }

    fn up_role(&self, level: u64, off: u64) -> Option<Role> {
        let last = self.layout.window - 1;
        if off == last - level {
            Some(Role::Receive)
        } else if level > 0 && off == last - level + 1 {
            Some(Role::Send)
        } else {
            None
        }
    }

    fn role(&self, st: &FastState, slot: FastSlot, off: u64) -> Option<Role> {
        let lvl = st.label.level;
        match slot {
            FastSlot::Gather | FastSlot::PathUp => self.up_role(lvl, off),
            FastSlot::Choice | FastSlot::PathDown => self.down_role(lvl, off),
            FastSlot::MarkUp(_) => self.up_role(st.s.comm_level?, off),
            FastSlot::ColorSpread(_) | FastSlot::MarkDown(_) | FastSlot::Spread(_) => {
                self.down_role(st.s.comm_level?, off)
            }
            _ => None,
        }
    }

    fn wake_window(
        &self,
        ctl: &mut Control<DltEntry>,
        phase: u64,
        slot: FastSlot,
        offsets: Vec<u64>,
    ) {
        let start = self.layout.slot_start(phase, slot);
        for o in offsets {
            ctl.wake_at(start + o);
        }
    }

    fn phase_rounds(&self, phase: u64, level: u64) -> Vec<u64> {
        let l = &self.layout;
        let mut out = l.globals(phase);
        for (slot, offs) in [
            (FastSlot::Gather, l.up(level)),
            (FastSlot::Choice, l.down(level)),
            (FastSlot::PathUp, l.up(level)),
            (FastSlot::PathDown, l.down(level)),
        ] {
            let start = l.slot_start(phase, slot);
            out.extend(offs.into_iter().map(|o| start + o));
        }
        out
    }

    fn start_phase(st: &mut FastState, me: VertexId) {
        st.s = Scratch {
            best: local_candidate(me, st.label, &st.nbr),
            color: st.label.tree_id,
            prev_color: st.label.tree_id,
            ..Scratch::default()
        };
    }

    /// The tree's pointer edge is known; `None` means the tree spans the graph.
    fn learn_choice(
        &self,
        st: &mut FastState,
        me: VertexId,
        choice: Option<CandidateEdge>,
        ctl: &mut Control<DltEntry>,
    ) {
        st.s.choice = choice;
        match choice {
            None => ctl.output(st.entry()),
            Some(c) if c.u == me => st.s.path_dist = Some(0),
            Some(_) => {}
        }
    }

    /// Level and parent in the tree rerooted at the pointer vertex are known.
    fn settle_comm(
        &self,
        st: &mut FastState,
        level: u64,
        parent: Option<VertexId>,
        phase: u64,
        ctl: &mut Control<DltEntry>,
    ) {
        st.s.comm_level = Some(level);
        st.s.comm_parent = parent;
        let l = &self.layout;
        if !st.s.h_root {
            for i in 0..l.steps.len() {
                self.wake_window(ctl, phase, FastSlot::ColorSpread(i), l.down(level));
            }
        }
        for k in 0..3 {
            self.wake_window(ctl, phase, FastSlot::MarkUp(k), l.up(level));
            self.wake_window(ctl, phase, FastSlot::MarkDown(k), l.down(level));
        }
    }

    /// Marks are final: either stay a piece root or hang below the pointed-at tree.
    fn settle_marks(&self, st: &mut FastState, phase: u64, ctl: &mut Control<DltEntry>) {
        if st.s.marks.attaches() {
            self.wake_window(
                ctl,
                phase,
                FastSlot::Spread(2),
                self.layout.down(st.s.comm_level.expect("comm tree known")),
            );
        } else {
            st.s.stage = Some(1);
            st.s.final_label = Some(st.label);
            st.s.final_parent = st.parent;
            st.s.final_parent_label = st.parent_label;
        }
    }

    fn take_label(st: &mut FastState, parent: VertexId, lp: VertexLabel, stage: u8) {
        st.s.stage = Some(stage);
        st.s.final_label = Some(VertexLabel::new(lp.tree_id, lp.level + 1));
        st.s.final_parent = Some(parent);
        st.s.final_parent_label = Some(lp);
    }

    fn finish_phase(
        &self,
        view: &LocalView,
        st: &mut FastState,
        inbox: &[Envelope],
        phase: u64,
        ctl: &mut Control<DltEntry>,
    ) {
        for e in inbox {
            if let Some(Payload::Label(l)) = e.payloads.first() {
                st.nbr.insert(e.src, *l);
            }
        }
        let (Some(label), Some(choice)) = (st.s.final_label, st.s.choice) else {
            return ctl.fail("no final label at the end of the phase");
        };
        let tag = match st.s.stage {
            Some(1) => DepthTag::Root,
            Some(2) => DepthTag::Middle,
            _ => DepthTag::Leaf,
        };
        st.note = Some(PhaseNote {
            tree: st.label.tree_id,
            target: choice.w_tree,
            h_root: st.s.h_root,
            color: st.s.color,
            marks: st.s.marks,
            tag,
        });
        st.label = label;
        st.parent = st.s.final_parent;
        st.parent_label = match st.parent {
            Some(p) => {
                let published = st.nbr.get(&p).copied();
                if published != st.s.final_parent_label {
                    return ctl.fail(format!(
                        "parent {p} published {published:?}, expected {:?}",
                        st.s.final_parent_label
                    ));
                }
                published
            }
            None => None,
        };
        if phase + 1 < self.layout.phases {
            Self::start_phase(st, view.id);
            for r in self.phase_rounds(phase + 1, st.label.level) {
                ctl.wake_at(r);
            }
        } else {
            ctl.output(st.entry());
        }
    }
}

impl VertexProgram for FastConnection {
    type State = FastState;
    type Output = DltEntry;

    fn init(&self, view: &LocalView) -> Init<FastState, DltEntry> {
        let nbr = view
            .neighbors
            .iter()
            .map(|&w| (w, VertexLabel::new(w, 0)))
            .collect();
        let mut st = FastState {
            label: VertexLabel::new(view.id, 0),
            parent: None,
            parent_label: None,
            note: None,
            nbr,
            s: Scratch::default(),
        };
        if self.layout.phases == 0 {
            let entry = st.entry();
            return Init::new(st, []).with_output(entry);
        }
        Self::start_phase(&mut st, view.id);
        let wake = self.phase_rounds(0, 0);
        Init::new(st, wake)
    }

    fn on_send(&self, view: &LocalView, round: u64, st: &FastState) -> Vec<(VertexId, Payload)> {
        let (_, slot, off) = self.layout.locate(round);
        let me = view.id;
        let label_msg = || {
            to_all_neighbors(
                view,
                &st.s
                    .final_label
                    .map_or(Payload::Flag(false), Payload::Label),
            )
        };
        match slot {
            FastSlot::Pointers => match st.s.choice {
                Some(c) => to_all_neighbors(view, &Payload::Words(vec![c.w_tree])),
                None => Vec::new(),
            },
            FastSlot::ColorSwap(_) => to_all_neighbors(view, &Payload::Words(vec![st.s.color])),
            FastSlot::MarkSwap(_) => {
                let toward =
                    st.s.choice
                        .filter(|c| c.u == me && !st.s.h_root)
                        .map(|c| c.w);
                view.neighbors
                    .iter()
                    .map(|&x| {
                        (
                            x,
                            Payload::Words(vec![
                                st.s.color,
                                st.s.marks.marked as u64,
                                (toward == Some(x)) as u64,
                            ]),
                        )
                    })
                    .collect()
            }
            FastSlot::Labels(_) => label_msg(),
            _ => {
                if self.role(st, slot, off) != Some(Role::Send) {
                    return Vec::new();
                }
                match slot {
                    FastSlot::Gather => vec![(
                        st.parent.expect("senders have parents"),
                        Payload::Candidate(st.s.best),
                    )],
                    FastSlot::Choice => to_all_neighbors(view, &Payload::Candidate(st.s.choice)),
                    FastSlot::PathUp => {
                        let w =
                            st.s.path_dist
                                .map_or_else(Vec::new, |d| vec![d, st.s.h_root as u64]);
                        vec![(st.parent.expect("senders have parents"), Payload::Words(w))]
                    }
                    FastSlot::PathDown => {
                        let lvl = st.s.comm_level.expect("comm level known before forwarding");
                        to_all_neighbors(view, &Payload::Words(vec![lvl, st.s.h_root as u64]))
                    }
                    FastSlot::ColorSpread(_) => {
                        to_all_neighbors(view, &Payload::Words(vec![st.s.color]))
                    }
                    FastSlot::MarkUp(_) => vec![(
                        st.s.comm_parent.expect("senders have parents"),
                        Payload::Flag(st.s.got_child),
                    )],
                    FastSlot::MarkDown(_) => {
                        let m = st.s.marks;
                        to_all_neighbors(
                            view,
                            &Payload::Words(vec![m.marked as u64, m.connected_up as u64]),
                        )
                    }
                    FastSlot::Spread(_) => label_msg(),
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
        st: &mut FastState,
        ctl: &mut Control<DltEntry>,
    ) {
        let (phase, slot, off) = self.layout.locate(round);
        let me = view.id;
        let receiving = self.role(st, slot, off) == Some(Role::Receive);
        match slot {
            FastSlot::Gather if receiving => {
                for e in inbox {
                    match e.payloads.first() {
                        Some(Payload::Candidate(c)) => {
                            st.s.best = crate::construct::min_candidate(st.s.best, *c)
                        }
                        _ => return ctl.fail("unexpected payload while gathering candidates"),
                    }
                }
                if st.parent.is_none() {
                    self.learn_choice(st, me, st.s.best, ctl);
                }
            }
            FastSlot::Choice if receiving => match from(inbox, st.parent) {
                Some(&Payload::Candidate(c)) => self.learn_choice(st, me, c, ctl),
                _ => ctl.fail("no pointer edge from parent"),
            },
            FastSlot::Pointers => {
                if let Some(c) = st.s.choice.filter(|c| c.u == me) {
                    match words(from(inbox, Some(c.w))) {
                        Some(&[back]) => {
                            st.s.h_root = back == st.label.tree_id && st.label.tree_id < c.w_tree
                        }
                        _ => ctl.fail(format!(
                            "pointer target {} did not report its own pointer",
                            c.w
                        )),
                    }
                }
            }
            FastSlot::PathUp if receiving => {
                for e in inbox {
                    if let Some(&[d, flag]) = words(e.payloads.first()) {
                        st.s.path_dist = Some(d + 1);
                        st.s.path_child = Some(e.src);
                        st.s.h_root = flag == 1;
                    }
                }
                if st.parent.is_none() {
                    match st.s.path_dist {
                        Some(d) => self.settle_comm(st, d, st.s.path_child, phase, ctl),
                        None => ctl.fail("pointer vertex not found below the root"),
                    }
                }
            }
            FastSlot::PathDown if receiving => match words(from(inbox, st.parent)) {
                Some(&[pl, flag]) => {
                    st.s.h_root = flag == 1;
                    let (lvl, parent) = match st.s.path_dist {
                        Some(d) => (d, st.s.path_child),
                        None => (pl + 1, st.parent),
                    };
                    self.settle_comm(st, lvl, parent, phase, ctl);
                }
                _ => ctl.fail("no distance from parent"),
            },
            FastSlot::ColorSwap(i) => {
                let step = self.layout.steps[i];
                let parent = if st.s.h_root {
                    None
                } else if let Some(c) = st.s.choice.filter(|c| c.u == me) {
                    match words(from(inbox, Some(c.w))) {
                        Some(&[pc]) => Some(pc),
                        _ => return ctl.fail("pointer target sent no color"),
                    }
                } else {
                    return;
                };
                let next = apply_color_step(step, st.s.color, parent, st.s.prev_color);
                st.s.prev_color = std::mem::replace(&mut st.s.color, next);
            }
            FastSlot::ColorSpread(_) if receiving => match words(from(inbox, st.s.comm_parent)) {
                Some(&[c]) => st.s.color = c,
                _ => ctl.fail("no color from comm parent"),
            },
            FastSlot::MarkSwap(k) => {
                let mine = st.s.marks;
                st.s.got_child = inbox.iter().any(|e| {
                    matches!(words(e.payloads.first()), Some(&[c, m, toward]) if toward == 1 && c == k && m == 0 && !mine.marked)
                });
                if st.is_pointer_vertex(me) && !st.s.h_root {
                    let w = st.s.choice.expect("pointer vertex has a choice").w;
                    match words(from(inbox, Some(w))) {
                        Some(&[_, pm, _]) => {
                            st.s.marks = mark_step(k, mine, st.s.color, false, pm == 1, false)
                        }
                        _ => ctl.fail("pointer target sent no marks"),
                    }
                }
            }
            FastSlot::MarkUp(k) if receiving => {
                for e in inbox {
                    if let Some(Payload::Flag(true)) = e.payloads.first() {
                        st.s.got_child = true;
                    }
                }
                if st.s.comm_parent.is_none() {
                    st.s.marks.marked |= st.s.got_child;
                    if k == 2 {
                        self.settle_marks(st, phase, ctl);
                    }
                }
            }
            FastSlot::MarkDown(k) if receiving => match words(from(inbox, st.s.comm_parent)) {
                Some(&[m, cu]) => {
                    st.s.marks = Marks {
                        marked: m == 1,
                        connected_up: cu == 1,
                    };
                    if k == 2 {
                        self.settle_marks(st, phase, ctl);
                    }
                }
                _ => ctl.fail("no marks from comm parent"),
            },
            FastSlot::Labels(s) if s < 3 => {
                if st.s.final_label.is_some() || !st.is_pointer_vertex(me) {
                    return;
                }
                let w = st.s.choice.expect("pointer vertex has a choice").w;
                match from(inbox, Some(w)) {
                    Some(&Payload::Label(lw)) => Self::take_label(st, w, lw, s + 1),
                    Some(Payload::Flag(false)) if s == 1 => {
                        self.wake_window(ctl, phase, FastSlot::Spread(3), self.layout.down(0));
                    }
                    _ => ctl.fail(format!("tree below {w} is deeper than two pieces")),
                }
            }
            FastSlot::Spread(s) if receiving => {
                let parent = st.s.comm_parent.expect("receivers have comm parents");
                match from(inbox, Some(parent)) {
                    Some(&Payload::Label(lp)) => Self::take_label(st, parent, lp, s),
                    Some(Payload::Flag(false)) if s == 2 => {
                        let lvl = st.s.comm_level.expect("comm tree known");
                        self.wake_window(ctl, phase, FastSlot::Spread(3), self.layout.down(lvl));
                    }
                    _ => ctl.fail("no label from comm parent"),
                }
            }
            FastSlot::Labels(_) => self.finish_phase(view, st, inbox, phase, ctl),
            _ => {}
        }
    }
}

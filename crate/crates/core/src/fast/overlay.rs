//! The tree-of-trees: one overlay vertex per tree, an edge from every tree to
//! the neighbor tree it points at. Its 3-coloring and its split into shallow
//! pieces are pure functions here; the vertex program performs the same steps
//! with one exchange per step.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::ceil_log2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OverlayError {
    #[error("overlay vertex {0} points at an unknown vertex")]
    Dangling(u64),
    #[error("overlay vertex {0} lies on a pointer cycle longer than two")]
    LongCycle(u64),
    #[error("overlay edge {0} -> {1} is monochromatic or a color is missing")]
    Improper(u64, u64),
    #[error("overlay vertex {0} ended at depth {1} of its piece")]
    TooDeep(u64, u32),
}

/// A rooted overlay forest. Each root also names a child it falls back to
/// when it ends up alone (its partner in a mutual pair).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayTree {
    parent: BTreeMap<u64, Option<u64>>,
    fallback: BTreeMap<u64, u64>,
}

impl OverlayTree {
    /// From a pointer map where every vertex points at a different vertex.
    /// Such maps only form 2-cycles when each vertex points at its smallest
    /// neighbor; the smaller end of each 2-cycle becomes a root.
    pub fn from_pointers(ptr: &BTreeMap<u64, u64>) -> Result<Self, OverlayError> {
        let mut parent = BTreeMap::new();
        let mut fallback = BTreeMap::new();
        for (&v, &t) in ptr {
            let tt = *ptr.get(&t).ok_or(OverlayError::Dangling(v))?;
            if tt == v && v < t {
                parent.insert(v, None);
                fallback.insert(v, t);
            } else {
                parent.insert(v, Some(t));
            }
        }
        let h = Self { parent, fallback };
        h.check_acyclic()?;
        Ok(h)
    }

    /// From a parent map. A root's fallback is its smallest child.
    pub fn from_parents(parent: BTreeMap<u64, Option<u64>>) -> Result<Self, OverlayError> {
        let mut fallback = BTreeMap::new();
        for (&v, &p) in &parent {
            if let Some(p) = p {
                match parent.get(&p) {
                    None => return Err(OverlayError::Dangling(v)),
                    Some(None) => {
                        let e = fallback.entry(p).or_insert(v);
                        *e = (*e).min(v);
                    }
                    Some(Some(_)) => {}
                }
            }
        }
        let h = Self { parent, fallback };
        h.check_acyclic()?;
        Ok(h)
    }

    fn check_acyclic(&self) -> Result<(), OverlayError> {
        for &v in self.parent.keys() {
            let mut at = v;
            for _ in 0..=self.parent.len() {
                match self.parent[&at] {
                    Some(p) => at = p,
                    None => break,
                }
            }
            if self.parent[&at].is_some() {
                return Err(OverlayError::LongCycle(v));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> impl Iterator<Item = u64> + '_ {
        self.parent.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: u64) -> Option<u64> {
        self.parent.get(&v).copied().flatten()
    }

    pub fn fallback(&self, v: u64) -> Option<u64> {
        self.fallback.get(&v).copied()
    }

    pub fn edges(&self) -> Vec<(u64, u64)> {
        self.parent
            .iter()
            .filter_map(|(&v, &p)| p.map(|p| (v, p)))
            .collect()
    }

    pub fn root_of(&self, mut v: u64) -> u64 {
        while let Some(p) = self.parent(v) {
            v = p;
        }
        v
    }

    /// Number of trees in the forest.
    pub fn components(&self) -> usize {
        self.parent.values().filter(|p| p.is_none()).count()
    }
}

/// One synchronous recoloring step of the overlay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorStep {
    /// Bit-position reduction against the parent.
    Reduce,
    /// Take the parent's color; roots pick a small color different from their own.
    ShiftDown,
    /// Vertices of the given color move into `{0, 1, 2}`.
    Eliminate(u64),
}

/// Steps that bring distinct ids below `n̂` to colors `{0, 1, 2}`. Depends only on `n̂`.
pub fn color_schedule(n_hat: u64) -> Vec<ColorStep> {
    let mut steps = Vec::new();
    let mut palette = n_hat.max(2);
    while palette > 6 {
        steps.push(ColorStep::Reduce);
        palette = 2 * ceil_log2(palette).max(1) as u64;
    }
    for c in [5, 4, 3] {
        steps.push(ColorStep::ShiftDown);
        steps.push(ColorStep::Eliminate(c));
    }
    steps
}

/// New color of one overlay vertex. `parent` is the parent's current color,
/// `children` the color all children currently share (own color before the
/// preceding shift).
pub fn apply_color_step(step: ColorStep, own: u64, parent: Option<u64>, children: u64) -> u64 {
    let smallest_free = |avoid: &[u64]| {
        (0..3)
            .find(|c| !avoid.contains(c))
            .expect("two constraints leave a free color")
    };
    match step {
        ColorStep::Reduce => {
            let i = parent.map_or(0, |p| (own ^ p).trailing_zeros() as u64);
            2 * i + (own >> i & 1)
        }
        ColorStep::ShiftDown => parent.unwrap_or_else(|| smallest_free(&[own])),
        ColorStep::Eliminate(c) if own == c => match parent {
            Some(p) => smallest_free(&[p, children]),
            None => smallest_free(&[children]),
        },
        ColorStep::Eliminate(_) => own,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayColoring {
    pub colors: BTreeMap<u64, u64>,
    pub steps: usize,
}

/// Colors the overlay with `{0, 1, 2}`, starting from the vertex ids.
pub fn three_color_overlay(h: &OverlayTree, n_hat: u64) -> OverlayColoring {
    let schedule = color_schedule(n_hat);
    let mut colors: BTreeMap<u64, u64> = h.vertices().map(|v| (v, v)).collect();
    let mut before = colors.clone();
    for &step in &schedule {
        let next = h
            .vertices()
            .map(|v| {
                (
                    v,
                    apply_color_step(
                        step,
                        colors[&v],
                        h.parent(v).map(|p| colors[&p]),
                        before[&v],
                    ),
                )
            })
            .collect();
        before = std::mem::replace(&mut colors, next);
    }
    OverlayColoring {
        colors,
        steps: schedule.len(),
    }
}

/// Position of an overlay vertex in its piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub enum DepthTag {
    Root,
    Middle,
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Parent inside the piece; `None` for piece roots.
    pub attach: BTreeMap<u64, Option<u64>>,
    pub tags: BTreeMap<u64, DepthTag>,
    /// Number of pieces.
    pub pieces: usize,
    /// Largest depth of any piece, in edges.
    pub max_depth: u32,
}

/// Per-vertex outcome of the three marking steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Marks {
    pub marked: bool,
    pub connected_up: bool,
}

impl Marks {
    /// Whether the vertex hangs below another piece member: it connected up,
    /// or nobody joined it.
    pub fn attaches(self) -> bool {
        self.connected_up || !self.marked
    }
}

/// Outcome of marking step `k` for a vertex, given its own marks and color, its
/// parent's marks, and whether some child connected to it in this step.
pub fn mark_step(
    k: u64,
    own: Marks,
    color: u64,
    is_root: bool,
    parent_marked: bool,
    child_joined: bool,
) -> Marks {
    let up = !is_root && color == k && !own.marked && !parent_marked;
    Marks {
        marked: own.marked || up || child_joined,
        connected_up: own.connected_up || up,
    }
}

/// Splits a properly 3-colored overlay into pieces of depth at most two.
pub fn bounded_depth_partition(
    h: &OverlayTree,
    colors: &BTreeMap<u64, u64>,
) -> Result<Partition, OverlayError> {
    for (v, p) in h.edges() {
        match (colors.get(&v), colors.get(&p)) {
            (Some(a), Some(b)) if a != b && *a < 3 && *b < 3 => {}
            _ => return Err(OverlayError::Improper(v, p)),
        }
    }
    let mut marks: BTreeMap<u64, Marks> = h.vertices().map(|v| (v, Marks::default())).collect();
    for k in 0..3 {
        let joined: BTreeSet<u64> = h
            .edges()
            .into_iter()
            .filter(|&(v, p)| colors[&v] == k && !marks[&v].marked && !marks[&p].marked)
            .map(|(_, p)| p)
            .collect();
        marks = h
            .vertices()
            .map(|v| {
                let pm = h.parent(v).is_some_and(|p| marks[&p].marked);
                (
                    v,
                    mark_step(
                        k,
                        marks[&v],
                        colors[&v],
                        h.parent(v).is_none(),
                        pm,
                        joined.contains(&v),
                    ),
                )
            })
            .collect();
    }
    let attach: BTreeMap<u64, Option<u64>> = h
        .vertices()
        .map(|v| {
            let up = marks[&v].attaches();
            (
                v,
                if up {
                    h.parent(v).or(h.fallback(v))
                } else {
                    None
                },
            )
        })
        .collect();
    let mut tags = BTreeMap::new();
    let mut max_depth = 0;
    for v in h.vertices() {
        let mut d = 0u32;
        let mut at = v;
        while let Some(p) = attach[&at] {
            d += 1;
            at = p;
            if d > 2 {
                return Err(OverlayError::TooDeep(v, d));
            }
        }
        max_depth = max_depth.max(d);
        tags.insert(
            v,
            [DepthTag::Root, DepthTag::Middle, DepthTag::Leaf][d as usize],
        );
    }
    let pieces = attach.values().filter(|a| a.is_none()).count();
    Ok(Partition {
        attach,
        tags,
        pieces,
        max_depth,
    })
}

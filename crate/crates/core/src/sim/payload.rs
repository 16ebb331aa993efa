//! Canonical wire encoding for every protocol message kind.
//!
//! Each payload starts with a prefix-free kind tag: `0` for a bare
//! [`Payload::Distance`], `1xxxxx` for every other kind. Ids, tree ids and
//! levels are fixed-width fields of `⌈log₂ n̂⌉` bits (at least one), which every
//! vertex can compute from the shared bound `n̂`. Unbounded integers and list
//! lengths use Elias-gamma codes. A payload is zero-padded to a byte boundary,
//! so several payloads concatenate into one message and decode back in order.

use thiserror::Error;

use super::bits::{BitReader, BitWriter};
use crate::graph::{ceil_log2, VertexId, VertexLabel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("value {value} does not fit in {width} bits")]
    FieldOverflow { value: u64, width: u32 },
    #[error("message ended in the middle of a payload")]
    Truncated,
    #[error("unknown payload kind tag {0}")]
    UnknownKind(u8),
    #[error("malformed payload: {0}")]
    Malformed(&'static str),
}

/// A cross-tree edge seen from inside a tree: `u` is ours, `w` is outside,
/// `w_tree` is the tree id of `w`'s label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateEdge {
    pub u: VertexId,
    pub w: VertexId,
    pub w_tree: u64,
}

impl CandidateEdge {
    /// Selection order: `(w_tree, w, u)`.
    pub fn key(&self) -> (u64, VertexId, VertexId) {
        (self.w_tree, self.w, self.u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChoiceKind {
    /// The tree hangs under a smaller neighbor tree through `(u, w)`.
    Connect,
    /// No smaller neighbor; `(u, w)` is the fallback attachment edge.
    LocalMin,
    /// No cross edge at all: the tree spans its component.
    Alone,
}

/// One rerooted-tree entry: vertex, new level, new parent (if any).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanEntry {
    pub vertex: VertexId,
    pub level: u64,
    pub parent: Option<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    /// A distance or level value below `n̂`.
    Distance(u64),
    Label(VertexLabel),
    /// Global-wake exchange: current label, and whether the receiver was chosen as parent.
    Exchange {
        label: VertexLabel,
        chose_you: bool,
    },
    Candidate(Option<CandidateEdge>),
    Choice {
        kind: ChoiceKind,
        u: VertexId,
        w: VertexId,
    },
    Adoption {
        adopted: bool,
        path_dist: Option<u64>,
    },
    Flag(bool),
    /// Subtree structure as `(child, parent)` edges plus the best cross edge seen.
    SubtreeReport {
        edges: Vec<(VertexId, VertexId)>,
        best: Option<CandidateEdge>,
    },
    /// Rerooting decision for a whole tree.
    RerootPlan {
        kind: ChoiceKind,
        u: VertexId,
        w: VertexId,
        entries: Vec<PlanEntry>,
    },
    Color(u64),
    /// O-LOCAL status: sender's color, its decision once made, and everything it has accumulated.
    Status {
        color: u64,
        decision: Option<u64>,
        known: Vec<(VertexId, u64)>,
    },
    /// Topology of a subtree: its vertices and every edge incident to them.
    Adjacency {
        vertices: Vec<VertexId>,
        edges: Vec<(VertexId, VertexId)>,
    },
    Solution {
        root: VertexId,
        outputs: Vec<(VertexId, u64)>,
    },
    /// Two bounded integers (each below `n̂²`) for combinable partial solutions.
    Partial {
        a: u64,
        b: u64,
    },
    /// Free-form word record for overlay bookkeeping.
    Words(Vec<u64>),
}

const KIND_NAMES: [&str; 15] = [
    "distance",
    "label",
    "exchange",
    "candidate",
    "choice",
    "adoption",
    "flag",
    "subtree-report",
    "reroot-plan",
    "color",
    "status",
    "adjacency",
    "solution",
    "partial",
    "words",
];

impl Payload {
    fn tag(&self) -> u8 {
        match self {
            Payload::Distance(_) => 0,
            Payload::Label(_) => 1,
            Payload::Exchange { .. } => 2,
            Payload::Candidate(_) => 3,
            Payload::Choice { .. } => 4,
            Payload::Adoption { .. } => 5,
            Payload::Flag(_) => 6,
            Payload::SubtreeReport { .. } => 7,
            Payload::RerootPlan { .. } => 8,
            Payload::Color(_) => 9,
            Payload::Status { .. } => 10,
            Payload::Adjacency { .. } => 11,
            Payload::Solution { .. } => 12,
            Payload::Partial { .. } => 13,
            Payload::Words(_) => 14,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        KIND_NAMES[self.tag() as usize]
    }
}

/// Encoder/decoder parameterized by the shared id-space bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Codec {
    width: u32,
}

impl Codec {
    pub fn new(n_hat: u64) -> Self {
        Self {
            width: ceil_log2(n_hat).max(1),
        }
    }

    /// Bits per id / tree id / level field.
    pub fn id_width(&self) -> u32 {
        self.width
    }

    pub fn encode(&self, p: &Payload) -> Result<Vec<u8>, CodecError> {
        let mut w = BitWriter::new();
        self.write(&mut w, p)?;
        Ok(w.finish())
    }

    /// Encoded size in bits (always a multiple of 8).
    pub fn bit_size(&self, p: &Payload) -> Result<usize, CodecError> {
        self.encode(p).map(|b| b.len() * 8)
    }

    /// Decodes exactly one payload occupying all of `bytes`.
    pub fn decode(&self, bytes: &[u8]) -> Result<Payload, CodecError> {
        let mut r = BitReader::new(bytes);
        let p = self.read(&mut r)?;
        r.align()?;
        if !r.at_end() {
            return Err(CodecError::Malformed("trailing bytes"));
        }
        Ok(p)
    }

    /// Decodes a concatenation of byte-aligned payloads.
    pub fn decode_all(&self, bytes: &[u8]) -> Result<Vec<Payload>, CodecError> {
        let mut r = BitReader::new(bytes);
        let mut out = Vec::new();
        while !r.at_end() {
            out.push(self.read(&mut r)?);
            r.align()?;
        }
        Ok(out)
    }

    /// Room for values below `n̂²`, capped at one machine word.
    fn partial_width(&self) -> u32 {
        (2 * self.width).min(64)
    }

    fn id(&self, w: &mut BitWriter, v: u64) -> Result<(), CodecError> {
        w.fixed(v, self.width)
    }

    fn label(&self, w: &mut BitWriter, l: VertexLabel) -> Result<(), CodecError> {
        self.id(w, l.tree_id)?;
        self.id(w, l.level)
    }

    fn candidate(&self, w: &mut BitWriter, c: &CandidateEdge) -> Result<(), CodecError> {
        self.id(w, c.u)?;
        self.id(w, c.w)?;
        self.id(w, c.w_tree)
    }

    fn choice_kind(w: &mut BitWriter, k: ChoiceKind) -> Result<(), CodecError> {
        let code = match k {
            ChoiceKind::Connect => 0,
            ChoiceKind::LocalMin => 1,
            ChoiceKind::Alone => 2,
        };
        w.fixed(code, 2)
    }

    fn write(&self, w: &mut BitWriter, p: &Payload) -> Result<(), CodecError> {
        let tag = p.tag();
        if tag == 0 {
            w.bit(false);
        } else {
            w.bit(true);
            w.fixed(tag as u64, 5)?;
        }
        match p {
            Payload::Distance(d) => self.id(w, *d)?,
            Payload::Label(l) => self.label(w, *l)?,
            Payload::Exchange { label, chose_you } => {
                self.label(w, *label)?;
                w.bit(*chose_you);
            }
            Payload::Candidate(c) => {
                w.bit(c.is_some());
                if let Some(c) = c {
                    self.candidate(w, c)?;
                }
            }
            Payload::Choice { kind, u, w: x } => {
                Self::choice_kind(w, *kind)?;
                self.id(w, *u)?;
                self.id(w, *x)?;
            }
            Payload::Adoption { adopted, path_dist } => {
                w.bit(*adopted);
                w.bit(path_dist.is_some());
                if let Some(d) = path_dist {
                    self.id(w, *d)?;
                }
            }
            Payload::Flag(b) => w.bit(*b),
            Payload::SubtreeReport { edges, best } => {
                w.gamma(edges.len() as u64);
                for &(c, p) in edges {
                    self.id(w, c)?;
                    self.id(w, p)?;
                }
                w.bit(best.is_some());
                if let Some(c) = best {
                    self.candidate(w, c)?;
                }
            }
            Payload::RerootPlan {
                kind,
                u,
                w: x,
                entries,
            } => {
                Self::choice_kind(w, *kind)?;
                self.id(w, *u)?;
                self.id(w, *x)?;
                w.gamma(entries.len() as u64);
                for e in entries {
                    self.id(w, e.vertex)?;
                    self.id(w, e.level)?;
                    w.bit(e.parent.is_some());
                    if let Some(p) = e.parent {
                        self.id(w, p)?;
                    }
                }
            }
            Payload::Color(c) => w.gamma(*c),
            Payload::Status {
                color,
                decision,
                known,
            } => {
                w.gamma(*color);
                w.bit(decision.is_some());
                if let Some(d) = decision {
                    w.gamma(*d);
                }
                w.gamma(known.len() as u64);
                for &(v, d) in known {
                    self.id(w, v)?;
                    w.gamma(d);
                }
            }
            Payload::Adjacency { vertices, edges } => {
                w.gamma(vertices.len() as u64);
                for &v in vertices {
                    self.id(w, v)?;
                }
                w.gamma(edges.len() as u64);
                for &(a, b) in edges {
                    self.id(w, a)?;
                    self.id(w, b)?;
                }
            }
            Payload::Solution { root, outputs } => {
                self.id(w, *root)?;
                w.gamma(outputs.len() as u64);
                for &(v, o) in outputs {
                    self.id(w, v)?;
                    w.gamma(o);
                }
            }
            Payload::Partial { a, b } => {
                w.fixed(*a, self.partial_width())?;
                w.fixed(*b, self.partial_width())?;
            }
            Payload::Words(words) => {
                w.gamma(words.len() as u64);
                for &x in words {
                    w.gamma(x);
                }
            }
        }
        Ok(())
    }

    fn read_id(&self, r: &mut BitReader) -> Result<u64, CodecError> {
        r.fixed(self.width)
    }

    fn read_label(&self, r: &mut BitReader) -> Result<VertexLabel, CodecError> {
        Ok(VertexLabel::new(self.read_id(r)?, self.read_id(r)?))
    }

    fn read_candidate(&self, r: &mut BitReader) -> Result<CandidateEdge, CodecError> {
        Ok(CandidateEdge {
            u: self.read_id(r)?,
            w: self.read_id(r)?,
            w_tree: self.read_id(r)?,
        })
    }

    fn read_choice_kind(r: &mut BitReader) -> Result<ChoiceKind, CodecError> {
        match r.fixed(2)? {
            0 => Ok(ChoiceKind::Connect),
            1 => Ok(ChoiceKind::LocalMin),
            2 => Ok(ChoiceKind::Alone),
            _ => Err(CodecError::Malformed("choice kind")),
        }
    }

    /// Reads a list length, rejecting lengths that cannot fit in what is left
    /// (every element occupies at least one bit).
    fn read_len(r: &mut BitReader) -> Result<usize, CodecError> {
        let len = r.gamma()?;
        if len > r.remaining() as u64 {
            return Err(CodecError::Truncated);
        }
        Ok(len as usize)
    }

    fn read(&self, r: &mut BitReader) -> Result<Payload, CodecError> {
        let tag = if r.bit()? { r.fixed(5)? as u8 } else { 0 };
        Ok(match tag {
            0 => Payload::Distance(self.read_id(r)?),
            1 => Payload::Label(self.read_label(r)?),
            2 => Payload::Exchange {
                label: self.read_label(r)?,
                chose_you: r.bit()?,
            },
            3 => Payload::Candidate(if r.bit()? {
                Some(self.read_candidate(r)?)
            } else {
                None
            }),
            4 => Payload::Choice {
                kind: Self::read_choice_kind(r)?,
                u: self.read_id(r)?,
                w: self.read_id(r)?,
            },
            5 => {
                let adopted = r.bit()?;
                let path_dist = if r.bit()? {
                    Some(self.read_id(r)?)
                } else {
                    None
                };
                Payload::Adoption { adopted, path_dist }
            }
            6 => Payload::Flag(r.bit()?),
            7 => {
                let len = Self::read_len(r)?;
                let mut edges = Vec::with_capacity(len);
                for _ in 0..len {
                    edges.push((self.read_id(r)?, self.read_id(r)?));
                }
                let best = if r.bit()? {
                    Some(self.read_candidate(r)?)
                } else {
                    None
                };
                Payload::SubtreeReport { edges, best }
            }
            8 => {
                let kind = Self::read_choice_kind(r)?;
                let u = self.read_id(r)?;
                let w = self.read_id(r)?;
                let len = Self::read_len(r)?;
                let mut entries = Vec::with_capacity(len);
                for _ in 0..len {
                    let vertex = self.read_id(r)?;
                    let level = self.read_id(r)?;
                    let parent = if r.bit()? {
                        Some(self.read_id(r)?)
                    } else {
                        None
                    };
                    entries.push(PlanEntry {
                        vertex,
                        level,
                        parent,
                    });
                }
                Payload::RerootPlan {
                    kind,
                    u,
                    w,
                    entries,
                }
            }
            9 => Payload::Color(r.gamma()?),
            10 => {
                let color = r.gamma()?;
                let decision = if r.bit()? { Some(r.gamma()?) } else { None };
                let len = Self::read_len(r)?;
                let mut known = Vec::with_capacity(len);
                for _ in 0..len {
                    known.push((self.read_id(r)?, r.gamma()?));
                }
                Payload::Status {
                    color,
                    decision,
                    known,
                }
            }
            11 => {
                let nv = Self::read_len(r)?;
                let mut vertices = Vec::with_capacity(nv);
                for _ in 0..nv {
                    vertices.push(self.read_id(r)?);
                }
                let ne = Self::read_len(r)?;
                let mut edges = Vec::with_capacity(ne);
                for _ in 0..ne {
                    edges.push((self.read_id(r)?, self.read_id(r)?));
                }
                Payload::Adjacency { vertices, edges }
            }
            12 => {
                let root = self.read_id(r)?;
                let len = Self::read_len(r)?;
                let mut outputs = Vec::with_capacity(len);
                for _ in 0..len {
                    outputs.push((self.read_id(r)?, r.gamma()?));
                }
                Payload::Solution { root, outputs }
            }
            13 => Payload::Partial {
                a: r.fixed(self.partial_width())?,
                b: r.fixed(self.partial_width())?,
            },
            14 => {
                let len = Self::read_len(r)?;
                let mut words = Vec::with_capacity(len);
                for _ in 0..len {
                    words.push(r.gamma()?);
                }
                Payload::Words(words)
            }
            other => return Err(CodecError::UnknownKind(other)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_encoding_is_stable_and_small() {
        let codec = Codec::new(16);
        let p = Payload::Label(VertexLabel::new(3, 1));
        let a = codec.encode(&p).unwrap();
        let b = codec.encode(&p).unwrap();
        assert_eq!(a, b);
        // 2·⌈log₂ 16⌉ + 16 = 24
        assert!(a.len() * 8 <= 24);
        assert_eq!(codec.decode(&a).unwrap(), p);
    }

    #[test]
    fn label_bound_holds_across_id_spaces() {
        for n_hat in [2u64, 3, 16, 100, 255, 256, 1000, 1 << 20, 1 << 32] {
            let codec = Codec::new(n_hat);
            let l = VertexLabel::new(n_hat - 1, n_hat - 1);
            let bits = codec.bit_size(&Payload::Label(l)).unwrap();
            assert!(
                bits as u32 <= 2 * ceil_log2(n_hat) + 16,
                "n_hat={n_hat}: {bits}"
            );
        }
    }

    #[test]
    fn distance_fits_header_plus_log() {
        // d < n = 100 with n̂ = 100: at most 8 + ⌈log₂ 100⌉ = 15 bits.
        let codec = Codec::new(100);
        for d in 0..100 {
            let bits = codec.bit_size(&Payload::Distance(d)).unwrap();
            assert!(bits <= 8 + 7, "d={d}: {bits}");
        }
    }

    #[test]
    fn topology_round_trip() {
        let codec = Codec::new(64);
        let vertices: Vec<u64> = (10..20).collect();
        let edges: Vec<(u64, u64)> = (10..19)
            .map(|v| (v, v + 1))
            .chain([(10, 40), (15, 63)])
            .collect();
        let p = Payload::Adjacency { vertices, edges };
        let bytes = codec.encode(&p).unwrap();
        assert_eq!(codec.decode(&bytes).unwrap(), p);
    }

    #[test]
    fn concatenation_decodes_in_order() {
        let codec = Codec::new(32);
        let parts = [
            Payload::Distance(3),
            Payload::Flag(true),
            Payload::Color(77),
        ];
        let mut bytes = Vec::new();
        for p in &parts {
            bytes.extend(codec.encode(p).unwrap());
        }
        assert_eq!(codec.decode_all(&bytes).unwrap(), parts.to_vec());
    }

    #[test]
    fn out_of_range_fields_and_bad_input() {
        let codec = Codec::new(8);
        assert!(matches!(
            codec.encode(&Payload::Distance(8)),
            Err(CodecError::FieldOverflow { .. })
        ));
        assert_eq!(codec.decode(&[]), Err(CodecError::Truncated));
        assert_eq!(
            codec.decode(&[0b1111_1100]),
            Err(CodecError::UnknownKind(31))
        );
        // Trailing junk after a valid distance.
        assert!(codec.decode(&[0b0001_0000, 0]).is_err());
        // Absurd list length.
        assert!(codec
            .decode(&[0b1011_1000, 0, 0, 0, 0, 0, 0, 0, 1])
            .is_err());
    }
}

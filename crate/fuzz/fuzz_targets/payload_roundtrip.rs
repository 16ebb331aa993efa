#![no_main]

use libfuzzer_sys::arbitrary::{Result, Unstructured};
use libfuzzer_sys::fuzz_target;
use sleeping_core::graph::VertexLabel;
use sleeping_core::sim::{CandidateEdge, ChoiceKind, Codec, Payload, PlanEntry};

fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1 << bits) - 1
    }
}

struct Gen<'a, 'b> {
    u: &'b mut Unstructured<'a>,
    width: u32,
}

impl Gen<'_, '_> {
    fn id(&mut self) -> Result<u64> {
        Ok(self.u.arbitrary::<u64>()? & mask(self.width))
    }

    fn opt_id(&mut self) -> Result<Option<u64>> {
        Ok(if self.u.arbitrary()? {
            Some(self.id()?)
        } else {
            None
        })
    }

    fn kind(&mut self) -> Result<ChoiceKind> {
        Ok(*self
            .u
            .choose(&[ChoiceKind::Connect, ChoiceKind::LocalMin, ChoiceKind::Alone])?)
    }

    fn candidate(&mut self) -> Result<Option<CandidateEdge>> {
        Ok(if self.u.arbitrary()? {
            Some(CandidateEdge {
                u: self.id()?,
                w: self.id()?,
                w_tree: self.id()?,
            })
        } else {
            None
        })
    }

    fn len(&mut self) -> Result<usize> {
        self.u.int_in_range(0..=16)
    }

    fn pairs(&mut self) -> Result<Vec<(u64, u64)>> {
        (0..self.len()?)
            .map(|_| Ok((self.id()?, self.id()?)))
            .collect()
    }

    fn tagged(&mut self) -> Result<Vec<(u64, u64)>> {
        (0..self.len()?)
            .map(|_| Ok((self.id()?, self.u.arbitrary()?)))
            .collect()
    }

    fn payload(&mut self) -> Result<Payload> {
        Ok(match self.u.int_in_range(0..=14u8)? {
            0 => Payload::Distance(self.id()?),
            1 => Payload::Label(VertexLabel::new(self.id()?, self.id()?)),
            2 => Payload::Exchange {
                label: VertexLabel::new(self.id()?, self.id()?),
                chose_you: self.u.arbitrary()?,
            },
            3 => Payload::Candidate(self.candidate()?),
            4 => Payload::Choice {
                kind: self.kind()?,
                u: self.id()?,
                w: self.id()?,
            },
            5 => Payload::Adoption {
                adopted: self.u.arbitrary()?,
                path_dist: self.opt_id()?,
            },
            6 => Payload::Flag(self.u.arbitrary()?),
            7 => Payload::SubtreeReport {
                edges: self.pairs()?,
                best: self.candidate()?,
            },
            8 => {
                let (kind, u, w) = (self.kind()?, self.id()?, self.id()?);
                let entries = (0..self.len()?)
                    .map(|_| {
                        Ok(PlanEntry {
                            vertex: self.id()?,
                            level: self.id()?,
                            parent: self.opt_id()?,
                        })
                    })
                    .collect::<Result<_>>()?;
                Payload::RerootPlan {
                    kind,
                    u,
                    w,
                    entries,
                }
            }
            9 => Payload::Color(self.u.arbitrary()?),
            10 => Payload::Status {
                color: self.u.arbitrary()?,
                decision: self.u.arbitrary()?,
                known: self.tagged()?,
            },
            11 => {
                let vertices = (0..self.len()?).map(|_| self.id()).collect::<Result<_>>()?;
                Payload::Adjacency {
                    vertices,
                    edges: self.pairs()?,
                }
            }
            12 => Payload::Solution {
                root: self.id()?,
                outputs: self.tagged()?,
            },
            13 => {
                let m = mask(2 * self.width);
                Payload::Partial {
                    a: self.u.arbitrary::<u64>()? & m,
                    b: self.u.arbitrary::<u64>()? & m,
                }
            }
            _ => Payload::Words(
                (0..self.len()?)
                    .map(|_| self.u.arbitrary())
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

fuzz_target!(|data: &[u8]| {
    let mut u = Unstructured::new(data);
    let Ok(n_hat) = u.arbitrary::<u64>() else {
        return;
    };
    let codec = Codec::new(n_hat);
    let mut g = Gen {
        u: &mut u,
        width: codec.id_width(),
    };
    let mut sent = Vec::new();
    let mut wire = Vec::new();
    while let Ok(p) = g.payload() {
        let bytes = codec.encode(&p).expect("in-range payload encodes");
        assert_eq!(codec.bit_size(&p).unwrap(), bytes.len() * 8);
        assert_eq!(codec.decode(&bytes).unwrap(), p);
        wire.extend(bytes);
        sent.push(p);
        if sent.len() == 8 || g.u.is_empty() {
            break;
        }
    }
    assert_eq!(codec.decode_all(&wire).unwrap(), sent);
});

//! Rerooting by distance counting: only one integer crosses each edge.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{RerootError, VertexId};
use crate::sim::{Codec, CodecError, Payload};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relabel {
    /// Distance of every tree vertex from the new root.
    pub levels: BTreeMap<VertexId, u64>,
    /// The new root first, the old root last.
    pub path: Vec<VertexId>,
    /// Counter messages sent up the path.
    pub path_messages: u64,
    /// Distance messages sent down the old tree.
    pub down_messages: u64,
    /// Largest integer carried by any message.
    pub max_value: u64,
}

impl Relabel {
    /// Size of the largest message when every value travels as a distance payload.
    pub fn max_message_bits(&self, codec: &Codec) -> Result<usize, CodecError> {
        codec.bit_size(&Payload::Distance(self.max_value))
    }
}

/// Reroots the tree given by `parents` (exactly one `None`) at `new_root`.
///
/// Vertices on the path from `new_root` up to the old root count their
/// distance upward. The old root then starts a top-down pass where each vertex
/// sends its own distance to its children, and every child off the path takes
/// the value plus one.
pub fn path_distance_relabel(
    parents: &BTreeMap<VertexId, Option<VertexId>>,
    new_root: VertexId,
) -> Result<Relabel, RerootError> {
    if !parents.contains_key(&new_root) {
        return Err(RerootError::RootNotInTree(new_root));
    }
    let mut roots = parents.iter().filter(|(_, p)| p.is_none()).map(|(&v, _)| v);
    let (Some(old_root), None) = (roots.next(), roots.next()) else {
        return Err(RerootError::NotATree("needs exactly one root"));
    };
    let mut children: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for (&v, &p) in parents {
        if let Some(p) = p {
            if !parents.contains_key(&p) {
                return Err(RerootError::NotATree("parent outside the tree"));
            }
            if p == v {
                return Err(RerootError::NotATree("self-loop"));
            }
            children.entry(p).or_default().push(v);
        }
    }

    let mut path = vec![new_root];
    let mut on_path = BTreeMap::from([(new_root, 0u64)]);
    while let Some(p) = parents[path.last().expect("path is never empty")] {
        if on_path.contains_key(&p) {
            return Err(RerootError::NotATree("parent cycle"));
        }
        on_path.insert(p, path.len() as u64);
        path.push(p);
    }
    let path_messages = path.len() as u64 - 1;
    let mut max_value = path_messages.saturating_sub(1);

    let mut levels = BTreeMap::new();
    let mut down_messages = 0;
    let mut stack = vec![(old_root, on_path[&old_root])];
    let mut seen = BTreeSet::new();
    while let Some((v, level)) = stack.pop() {
        seen.insert(v);
        levels.insert(v, level);
        for &c in children.get(&v).map_or(&[][..], Vec::as_slice) {
            down_messages += 1;
            max_value = max_value.max(level);
            stack.push((c, on_path.get(&c).copied().unwrap_or(level + 1)));
        }
    }
    if seen.len() != parents.len() {
        return Err(RerootError::NotATree("disconnected"));
    }
    Ok(Relabel {
        levels,
        path,
        path_messages,
        down_messages,
        max_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_reversal() {
        // a=1 – b=2 – c=3 – d=4 rooted at d.
        let parents = BTreeMap::from([(1, Some(2)), (2, Some(3)), (3, Some(4)), (4, None)]);
        let r = path_distance_relabel(&parents, 1).unwrap();
        assert_eq!(r.levels, BTreeMap::from([(1, 0), (2, 1), (3, 2), (4, 3)]));
        assert_eq!(r.path, vec![1, 2, 3, 4]);
        assert_eq!((r.path_messages, r.down_messages), (3, 3));
    }

    #[test]
    fn star_at_a_leaf() {
        let parents = BTreeMap::from([(0, None), (1, Some(0)), (2, Some(0)), (3, Some(0))]);
        let r = path_distance_relabel(&parents, 2).unwrap();
        assert_eq!(r.levels, BTreeMap::from([(0, 1), (1, 2), (2, 0), (3, 2)]));
    }

    #[test]
    fn rejects_bad_input() {
        let parents = BTreeMap::from([(0, None), (1, Some(0))]);
        assert_eq!(
            path_distance_relabel(&parents, 7),
            Err(RerootError::RootNotInTree(7))
        );
        let cyc = BTreeMap::from([(0, None), (1, Some(2)), (2, Some(1))]);
        assert!(path_distance_relabel(&cyc, 0).is_err());
        assert!(path_distance_relabel(&cyc, 1).is_err());
    }
}

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("schedule tree size {0} is not a power of two ≥ 2")]
    BadSize(u64),
    #[error("color {color} outside [1, {q}]")]
    ColorOutOfRange { color: u64, q: u64 },
}

/// Complete binary search tree over `[1, 2q−1]`: every node holds the middle
/// of its range, the root holds `q`, and leaf `i` (from the left, 1-based)
/// holds `2i − 1`. It is never materialized; paths are walked by bisection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleTree {
    q: u64,
}

/// Wake rounds of one color: the root-to-leaf path, plus the leaf value at
/// which the decision is made.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WakeRounds {
    pub path: Vec<u64>,
    pub decision: u64,
}

impl WakeRounds {
    /// Path values in time order.
    pub fn sorted(&self) -> Vec<u64> {
        let mut r = self.path.clone();
        r.sort_unstable();
        r
    }
}

pub fn build_schedule_tree(q: u64) -> Result<ScheduleTree, ScheduleError> {
    if q < 2 || !q.is_power_of_two() || q > 1 << 62 {
        return Err(ScheduleError::BadSize(q));
    }
    Ok(ScheduleTree { q })
}

impl ScheduleTree {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn root(&self) -> u64 {
        self.q
    }

    pub fn size(&self) -> u64 {
        2 * self.q - 1
    }

    /// Number of nodes on every root-to-leaf path: `log₂ q + 1`.
    pub fn depth(&self) -> u32 {
        self.q.trailing_zeros() + 1
    }

    /// Node values from the root down to the node holding `value`.
    pub fn path_to(&self, value: u64) -> Vec<u64> {
        let (mut lo, mut hi) = (1, self.size());
        let mut out = Vec::new();
        while lo <= hi {
            let mid = lo + (hi - lo) / 2;
            out.push(mid);
            if value < mid {
                hi = mid - 1;
            } else if value > mid {
                lo = mid + 1;
            } else {
                break;
            }
        }
        out
    }

    pub fn leaves(&self) -> Vec<u64> {
        (1..=self.q).map(|i| 2 * i - 1).collect()
    }

    pub fn in_order(&self) -> Vec<u64> {
        fn walk(lo: u64, hi: u64, out: &mut Vec<u64>) {
            if lo > hi {
                return;
            }
            let mid = lo + (hi - lo) / 2;
            walk(lo, mid - 1, out);
            out.push(mid);
            walk(mid + 1, hi, out);
        }
        let mut out = Vec::new();
        walk(1, self.size(), &mut out);
        out
    }

    /// Deepest node on both paths.
    pub fn lca(&self, a: u64, b: u64) -> u64 {
        let pa = self.path_to(a);
        let pb = self.path_to(b);
        pa.iter()
            .zip(&pb)
            .take_while(|(x, y)| x == y)
            .last()
            .map(|(x, _)| *x)
            .unwrap_or(self.q)
    }

    pub fn wake_rounds(&self, color: u64) -> Result<WakeRounds, ScheduleError> {
        if color == 0 || color > self.q {
            return Err(ScheduleError::ColorOutOfRange { color, q: self.q });
        }
        let leaf = 2 * color - 1;
        Ok(WakeRounds {
            path: self.path_to(leaf),
            decision: leaf,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_shape_for_eight() {
        let t = build_schedule_tree(8).unwrap();
        assert_eq!(t.root(), 8);
        assert_eq!(t.leaves(), vec![1, 3, 5, 7, 9, 11, 13, 15]);
        assert_eq!(t.wake_rounds(7).unwrap().path, vec![8, 12, 14, 13]);
        assert_eq!(t.wake_rounds(5).unwrap().path, vec![8, 12, 10, 9]);
        assert_eq!(t.lca(9, 13), 12);
    }

    #[test]
    fn smallest_tree() {
        let t = build_schedule_tree(2).unwrap();
        assert_eq!(t.in_order(), vec![1, 2, 3]);
        assert_eq!(
            t.wake_rounds(1).unwrap(),
            WakeRounds {
                path: vec![2, 1],
                decision: 1
            }
        );
    }

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(build_schedule_tree(6), Err(ScheduleError::BadSize(6)));
        assert_eq!(build_schedule_tree(1), Err(ScheduleError::BadSize(1)));
        let t = build_schedule_tree(4).unwrap();
        assert!(t.wake_rounds(0).is_err() && t.wake_rounds(5).is_err());
    }
}

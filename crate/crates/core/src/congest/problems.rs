//! Problems whose partial solutions are two bounded integers and combine
//! across vertex-disjoint parts of the graph.

use std::fmt;

use serde::Serialize;

/// A partial solution: two integers below `n̂²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialSolution {
    pub a: u64,
    pub b: u64,
}

/// A per-vertex answer as an exact fraction in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den).max(1);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn whole(num: u64) -> Self {
        Self { num, den: 1 }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// What a vertex contributes before any communication.
#[derive(Debug, Clone, Copy)]
pub struct LeafContext {
    pub id: u64,
    pub degree: usize,
    pub is_root: bool,
}

pub trait CCongestProblem: Sync {
    fn name(&self) -> &'static str;
    fn leaf(&self, ctx: LeafContext) -> PartialSolution;
    /// Associative and commutative over disjoint parts.
    fn combine(&self, x: PartialSolution, y: PartialSolution) -> PartialSolution;
    fn extract(&self, whole: PartialSolution) -> Ratio;
}

/// Everyone learns the id of the tree root. `b` flags a part containing it.
pub struct LeaderElection;
/// `a` sums degrees; the answer is half of it.
pub struct EdgeCount;
/// `a` sums degrees, `b` counts vertices.
pub struct AverageDegree;

impl CCongestProblem for LeaderElection {
    fn name(&self) -> &'static str {
        "leader-election"
    }
    fn leaf(&self, ctx: LeafContext) -> PartialSolution {
        PartialSolution {
            a: ctx.id,
            b: ctx.is_root as u64,
        }
    }
    fn combine(&self, x: PartialSolution, y: PartialSolution) -> PartialSolution {
        // Disjoint parts hold the root at most once; otherwise keep the smaller id.
        match (x.b, y.b) {
            (1, 0) => x,
            (0, 1) => y,
            _ => x.min(y),
        }
    }
    fn extract(&self, whole: PartialSolution) -> Ratio {
        Ratio::whole(whole.a)
    }
}

impl CCongestProblem for EdgeCount {
    fn name(&self) -> &'static str {
        "edge-count"
    }
    fn leaf(&self, ctx: LeafContext) -> PartialSolution {
        PartialSolution {
            a: ctx.degree as u64,
            b: 0,
        }
    }
    fn combine(&self, x: PartialSolution, y: PartialSolution) -> PartialSolution {
        PartialSolution { a: x.a + y.a, b: 0 }
    }
    fn extract(&self, whole: PartialSolution) -> Ratio {
        Ratio::new(whole.a, 2)
    }
}

impl CCongestProblem for AverageDegree {
    fn name(&self) -> &'static str {
        "average-degree"
    }
    fn leaf(&self, ctx: LeafContext) -> PartialSolution {
        PartialSolution {
            a: ctx.degree as u64,
            b: 1,
        }
    }
    fn combine(&self, x: PartialSolution, y: PartialSolution) -> PartialSolution {
        PartialSolution {
            a: x.a + y.a,
            b: x.b + y.b,
        }
    }
    fn extract(&self, whole: PartialSolution) -> Ratio {
        Ratio::new(whole.a, whole.b)
    }
}

pub const CCONGEST_PROBLEMS: [&str; 3] = ["leader-election", "edge-count", "average-degree"];

pub fn ccongest_problem(name: &str) -> Option<&'static dyn CCongestProblem> {
    Some(match name {
        "leader-election" => &LeaderElection,
        "edge-count" => &EdgeCount,
        "average-degree" => &AverageDegree,
        _ => return None,
    })
}

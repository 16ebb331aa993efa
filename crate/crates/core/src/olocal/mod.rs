//! Wake scheduling for problems decidable along an acyclic orientation: color
//! the graph, orient edges toward smaller colors, and let each vertex wake
//! only on its root-to-leaf path of a binary search tree over the colors.

mod linial;
mod problems;
mod runner;
mod schedule_tree;

pub use linial::{plan as linial_plan, recolor, Step, LINIAL_C0, LINIAL_K};
pub use problems::{
    olocal_problem, DecisionContext, DeltaPlusOneColoring, Mis, OLocalProblem, OLOCAL_PROBLEMS,
};
pub use runner::{linial_coloring, run_olocal, ColorAssignment, OLocalRun};
pub use schedule_tree::{build_schedule_tree, ScheduleError, ScheduleTree, WakeRounds};

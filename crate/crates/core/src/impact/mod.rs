//! Impact equations, their numerical solution, and the weights of the
//! resulting collisionless trajectory.

pub mod contour;
pub mod equations;
pub mod modes;
pub mod newton;
pub mod rank;
mod roots;

pub use contour::{scan_contour, ContourField, GridSpec};
pub use equations::{ImpactEquations, ImpactModes};
pub use modes::{g_eval, w_eval, w_eval_with_zero, ModeValue, ModeVectors};
pub use newton::{solve_impact, ImpactTimes, NewtonOptions};
pub use roots::{find_roots, solution_at, ImpactSolution, RootFilter, RootSet};

//! Linear programs solved as unconstrained minimization of a smooth convex merit
//! function, using Levenberg–Marquardt regularized Newton steps.
//!
//! ```
//! use lpmerit_core::{generate_optimal_lp, solve, SolveStatus, SolverConfig};
//!
//! let g = generate_optimal_lp(3, 6, 7).unwrap();
//! let out = solve(&g.lp, &SolverConfig::homotopy(), None).unwrap();
//! assert_eq!(out.status, SolveStatus::Optimal);
//! ```

pub use nalgebra;

pub mod format;
pub mod generate;
pub mod linsys;
pub mod merit;
pub mod oracle;
pub mod problem;
pub mod solver;

pub use format::{to_json_string, FormatError, KindTag, PointFile, ProblemFile};
pub use generate::{
    generate_optimal_lp, generate_unbounded_lp, GeneratedProblem, ProblemKind, GENERATOR_NAME,
};
pub use linsys::{newton_direction, LinsysError, NewtonStep, RankOneBackend};
pub use merit::{Merit, MeritError, MeritKind, MeritSpec};
pub use problem::{HomogeneousPoint, ModelError, PrimalDualPoint, Residuals, StandardFormLp};
pub use solver::{
    solve, solve_homogeneous, solve_with_reference, Algorithm, Classification, HomogeneousOutcome,
    HomogeneousStatus, IterationRecord, LineSearch, SolveOutcome, SolveStatus, SolverConfig,
    SolverError,
};

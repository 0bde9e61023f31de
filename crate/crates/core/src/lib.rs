//! Deterministic global optimization for minimum-sum-of-squares clustering
//! under pairwise must-link and cannot-link constraints.
//!
//! Must-link components are collapsed into weighted pseudo-samples (exact up
//! to an additive constant), cannot-links survive as a graph over the
//! pseudo-samples, and a reduced-space branch-and-bound searches only over
//! cluster centroid boxes, producing certified lower and upper bounds and a
//! relative optimality gap.
//!
//! Typical use:
//!
//! ```
//! use ckbb::model::{ConstraintSet, Dataset, SolverConfig};
//!
//! let data = Dataset::new(
//!     vec![vec![0.0, 0.0], vec![0.3, 0.1], vec![5.0, 5.0], vec![5.2, 4.9]],
//!     None,
//! )
//! .unwrap();
//! let cons = ConstraintSet::new(vec![(0, 1)], vec![(1, 2)]).unwrap();
//! let inst = ckbb::preprocess::collapse(&data, &cons, 2).unwrap();
//! let result = ckbb::engine::solve(&inst, &SolverConfig::new(2), None).unwrap();
//! assert!(result.rel_gap <= 1e-3);
//! ```

pub mod bounds;
pub mod engine;
pub mod geometry;
pub mod heuristics;
pub mod io;
pub mod model;
pub mod oracle;
pub mod preprocess;

pub use engine::{solve, SolveResult, SolveStatus};
pub use model::{CollapsedInstance, ConstraintSet, Dataset, Solution, SolverConfig};

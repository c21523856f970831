//! Bearing rigidity analysis and the two bearing-based multi-agent protocols
//! built on it: formation control with bearing constraints (leaderless or
//! with fixed leaders) and bearing-only network localization with anchors.
//!
//! Everything works in any ambient dimension `d >= 2`. Configurations are
//! stacked vectors `p = [p_1; ...; p_n]` in vertex order, and edges follow a
//! canonical orientation (`tail < head`, sorted), which fixes the row order
//! of every edge-indexed matrix.
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | graphs, orientation, incidence matrices |
//! | [`rigidity`] | projectors, bearings, rigidity matrix, rigidity test |
//! | [`laplacian`] | bearing Laplacian, role partitions, feasibility |
//! | [`formation`] | controllers, closed-form equilibria, observables |
//! | [`localization`] | anchor-based estimator and its closed form |
//! | [`simulation`] | fixed-step integration with convergence detection |
//! | [`scenario`] | scenario files, generators, runner and reports |
//!
//! ```
//! use bearing_core::rigidity::is_infinitesimally_bearing_rigid;
//! use bearing_core::{Configuration, Framework, Graph};
//!
//! // A square with one diagonal is rigid in the plane; without it, it is not.
//! let pts = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
//! let config = Configuration::from_points(2, &pts).unwrap();
//! let cycle = [(0, 1), (1, 3), (3, 2), (2, 0)];
//! let flexible = Framework::new(Graph::new(4, &cycle).unwrap(), config.clone()).unwrap();
//! assert!(!is_infinitesimally_bearing_rigid(&flexible).unwrap().rigid);
//!
//! let braced = [(0, 1), (1, 3), (3, 2), (2, 0), (0, 3)];
//! let rigid = Framework::new(Graph::new(4, &braced).unwrap(), config).unwrap();
//! assert_eq!(is_infinitesimally_bearing_rigid(&rigid).unwrap().rank, 5);
//! ```

// `!(x > tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod formation;
pub mod graph;
pub mod laplacian;
pub mod linalg;
pub mod localization;
pub mod rigidity;
pub mod scenario;
pub mod simulation;
mod tolerance;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, IncidenceMatrix, OrientedGraph};
pub use laplacian::{BearingConstraintSet, BearingLaplacian, RolePartition};
pub use rigidity::{BearingVector, Configuration, Framework};
pub use tolerance::Tolerances;

//! Adaptive online geodesically-convex optimization on Hadamard manifolds.
//!
//! The crate is organized bottom-up:
//!
//! - [`manifold`]: exponential/log maps, distance, parallel transport and the
//!   curvature constant ζ on Euclidean space, the Poincaré ball, SPD matrices
//!   and diagonal SPD matrices.
//! - [`sets`]: geodesic-ball decision sets, their enlargements and projections.
//! - [`means`]: weighted Fréchet means and sequential geodesic averaging.
//! - [`losses`]: geodesically convex losses with declared constants.
//! - [`algorithms`]: Riemannian OGD, optimistic mirror descent with improper
//!   plays, Hedge / Optimistic Hedge, and the ensemble learners that combine
//!   them, plus step-size grids and regret metrics.
//! - [`game`]: the exactly solvable minimax regret game on diagonal SPD matrices.
//! - [`harness`]: scenario generation, runs, trace files and verification suites.

pub mod algorithms;
pub mod error;
pub mod game;
pub mod harness;
pub mod losses;
pub mod manifold;
pub mod means;
pub mod sets;

pub use error::{Error, Result};
pub use manifold::{ManifoldSpec, Point, Tangent};

//! Two-dimensional Mullins-Sekerka interface evolution.
//!
//! The crate evolves sharp interfaces by the nonlocal curvature flow in which
//! a potential, harmonic away from the interface and equal to the curvature on
//! it (Gibbs-Thomson law), drives the interface with the jump of its normal
//! derivative as normal velocity. On top of the solver sit the diagnostics of
//! the weak-strong stability machinery: relative entropy and bulk error
//! functionals, good/bad-time classification, height-function graph fitting,
//! `H^{1/2}` interface norms via harmonic extension, and the near-identity
//! diffeomorphism that flattens a graph onto its reference interface.
//!
//! Module map:
//! - [`geometry`]: closed planar curves, signed distance, projection, areas.
//! - [`laplace`]: single-layer Dirichlet-to-Neumann solver plus a finite
//!   difference grid oracle.
//! - [`flow`]: explicit time stepping with energy/area audits.
//! - [`entropy`]: extended normal/weight/velocity fields and the error
//!   functionals comparing two phase trajectories.
//! - [`hilbert`]: minimal-Dirichlet-energy interface norms.
//! - [`hanzawa`]: graph-flattening diffeomorphism and its closed-form
//!   differential data.
//! - [`scenario`]: configuration, persistence and the command entry points
//!   used by the CLI.

pub mod entropy;
pub mod flow;
pub mod geometry;
pub mod hanzawa;
pub mod hilbert;
pub mod laplace;
pub mod scenario;

pub use geometry::{InterfaceCurve, PhaseSet, Rect, ScalarField, Vec2, VectorField};

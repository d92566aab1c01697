//! Harmonic oscillator dynamics on the nine two-dimensional Cayley-Klein spaces.
//!
//! A Cayley-Klein space is fixed by a pair `(κ₁, κ₂)`: κ₁ is the constant
//! curvature and κ₂ the signature parameter. Positive κ₂ gives the sphere,
//! the Euclidean plane and the hyperbolic plane; κ₂ = 0 the Newton-Hooke and
//! Galilean spacetimes; negative κ₂ the anti de Sitter, Minkowski and de
//! Sitter spacetimes.
//!
//! The crate is layered:
//!
//! * [`cktrig`]: labelled trigonometric functions `C_κ`, `S_κ`, `T_κ`.
//! * [`geometry`]: the nine spaces, metrics, chart conversions, Killing fields.
//! * [`dynamics`]: potential, equations of motion, Noether momenta, Fradkin tensor.
//! * [`integrator`]: adaptive Dormand-Prince propagation with event detection.
//! * [`orbits`]: closed-form orbits, effective potential, classification, period.
//! * [`conics`]: orbits as ellipses, equidistants and ultraellipses.
//! * [`render`]: projections and SVG/CSV figure output.
//! * [`sweep`]: batch evaluation over parameter grids, parallel with the
//!   `parallel` feature.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cktrig;
pub mod conics;
pub mod dynamics;
pub mod geometry;
pub mod integrator;
pub mod orbits;
pub mod render;
pub mod sweep;

pub use cktrig::{ck_atan, ck_cos, ck_sin, ck_tan, Label, TrigError};
pub use conics::{ConicGeometry, ConicKind, MajorAxis};
pub use dynamics::{FradkinTensor, NoetherMomenta, Oscillator, PhaseState};
pub use geometry::{CKParams, Chart, ParallelPointUY, ParallelPointXV, PolarPoint, SpaceKind};
pub use integrator::{IntegratorConfig, Trajectory};
pub use orbits::{OrbitClass, OrbitSolution, OrbitTag};
pub use render::{Projection, ProjectionKind};

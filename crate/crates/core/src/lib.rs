//! Rigid-body motion about a fixed point under potential and gyroscopic forces.
//!
//! The crate integrates the generalized Euler–Poisson equations on SO(3) and
//! decides whether a gyroscopic form admits the generalized area integral
//! `G = 𝐀ω·α + f(α)`.
//!
//! * [`so3`]: attitudes, `hat`/`vee`, the left-invariant frame and coframe, and
//!   the symmetry action (rotation about the first space axis).
//! * [`forms`]: scalar fields, 1- and 2-forms in the invariant coframe, exterior
//!   derivative, interior product, Lie derivative, closedness.
//! * [`dynamics`]: equations of motion, RK4 integration, energy and area monitors.
//! * [`symmetry`]: invariance tests, the `κ = Fα + ∇f` decomposition and the
//!   involution test.
//! * [`scenario`] and [`harness`]: scenario files, built-in scenarios and the
//!   batch front-end used by the `gyrosym` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod expr;
pub mod forms;
pub mod harness;
pub mod poly;
pub mod scenario;
pub mod so3;
pub mod symmetry;

pub use nalgebra::{Matrix3, Vector3};

//! Desk-scale laboratory for the sedimentation of N inertial spheres in a
//! quasi-static Stokes flow.
//!
//! The crate is organized around six subsystems:
//!
//! * [`geometry`] — vector/matrix primitives, particle configurations,
//!   singular interaction kernels and the closed-form Stokes kernels
//!   (Oseen tensor, single-sphere velocity field, finite-radius corrected
//!   kernel).
//! * [`mobility`] — matrix-free hydrodynamic operators: mobility and
//!   resistance applies (method of reflections), inertialess velocities,
//!   spectrum and gradient-norm estimation, and the annulus-weight
//!   force-representation validator.
//! * [`dynamics`] — time integration of the inertial and inertialess
//!   sedimentation systems and of damped/first-order binary interaction
//!   systems, with collision detection and exact checkpointing.
//! * [`macroref`] — particle-method reference solvers for the limiting
//!   transport equations and evaluation of macroscopic fluid velocities.
//! * [`otmetrics`] — exact optimal-transport distances (assignment,
//!   network simplex, bottleneck), coupled trajectory functionals and
//!   closed-form bound evaluators.
//! * [`diagnostics`] — modulated energies, singular-sum reports, decay and
//!   power-law fits, and velocity/force bound monitors.

pub mod diagnostics;
pub mod dynamics;
pub mod geometry;
pub mod macroref;
pub mod mobility;
pub mod otmetrics;

pub use geometry::{Configuration, Mat3, Vec3};

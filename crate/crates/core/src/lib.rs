//! Pseudospectral flow-map solver for two-dimensional incompressible MHD
//! with zero resistivity around a strong impressed field `m e₂`.
//!
//! The crate is organized bottom-up:
//!
//! - [`spectral`]: periodic fields, transforms, derivatives, norms.
//! - [`kinematics`]: flow-map geometry and label-frame operators.
//! - [`pressure`]: variable-coefficient elliptic solves.
//! - [`linear`]: exact linear propagators and gradient correctors.
//! - [`evolve`]: Lagrangian and Eulerian time steppers, particle tracking.
//! - [`initial`]: constrained initial data and its validation.
//! - [`diagnostics`]: energy functionals, decay fits, linear-error metrics.
//! - [`checkpoint`]: binary state files.
//! - [`experiment`]: configs, subcommands and their outputs.

pub mod checkpoint;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod experiment;
pub mod initial;
pub mod kinematics;
pub mod linear;
pub mod pressure;
pub mod spectral;

pub use error::{Error, Result};

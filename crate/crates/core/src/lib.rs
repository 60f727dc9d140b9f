//! Finite-element core for two-dimensional transient heat conduction in
//! electric-machine cross-sections.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It provides:
//!
//! * [`mesh`]: tagged linear-triangle meshes, probe location and a
//!   parametric quarter-section mesher for induction machines;
//! * [`materials`]: region-to-material tables with literature and fitted
//!   defaults;
//! * [`fem`]: assembly of stiffness, mass, Robin and load terms, Dirichlet
//!   elimination and steady solves;
//! * [`transient`]: theta-method time integration of scheduled scenarios;
//! * [`analysis`]: thermal time constants and validation errors;
//! * [`calibrate`]: bounded Nelder-Mead fitting of effective parameters
//!   against measured traces.
//!
//! Units are fixed throughout: degrees Celsius, seconds, meters and watts.
//! Two-dimensional quantities are per meter of axial length.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod calibrate;
mod error;
pub mod fem;
pub mod materials;
pub mod mesh;
pub mod schedule;
pub mod solver;
pub mod sparse;
pub mod transient;

pub use error::{Error, Result};

/// A point or vector in the cross-section plane, in meters.
pub type Point = [f64; 2];

//! Pseudo-spectral solver and numerical diagnostics for the 3D incompressible
//! MHD system with one-directional velocity dissipation and horizontal
//! magnetic diffusion, posed on a periodic box near the uniform background
//! magnetic field e₂.
//!
//! The crate is organised around immutable Fourier-coefficient fields:
//!
//! * [`grid`] / [`field`] — periodic box, spectral scalar/vector fields,
//!   derivatives, dealiased products and the Leray projection;
//! * [`dynamics`] — right-hand sides and integrating-factor RK4 time stepping
//!   for the perturbation system and its variants;
//! * [`energy`] — Sobolev norms, the energy functionals and bootstrap
//!   residual, vorticity/current diagnostics, interaction terms, pressure;
//! * [`inequality`] — numerical audits of the anisotropic triple/quadruple
//!   product inequalities and the 1D interpolation inequality;
//! * [`wave`] — closed-form dispersion analysis of the linearised system and
//!   oracles used to validate the simulator.

pub mod dynamics;
pub mod energy;
pub mod error;
pub mod field;
mod fft;
pub mod grid;
pub mod inequality;
pub mod wave;

pub use dynamics::{run, run_continued, step, ModelConfig, RunOutcome, State, Stepper, Variant};
pub use energy::{curl, EnergyReport, SobolevForm, SobolevSpec};
pub use error::{Error, Result};
pub use field::{SpectralScalarField, SpectralVectorField};
pub use grid::{Axis, Grid};

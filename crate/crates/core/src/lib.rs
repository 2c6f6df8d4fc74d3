//! Pseudo-spectral Galerkin solver for the 3D Navier-Stokes equations with
//! fractional dissipation `nu Lambda^(2 alpha)` on a periodic box, together with
//! tools for measuring and checking energy decay rates.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod decay;
pub mod dynamics;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod heat;
pub mod initial;
pub mod io;
pub mod runner;
pub mod spectral;

pub use config::RunConfig;
pub use decay::{DecayFit, FitWindow, NormSelector, NormSeries, Verdict, VerdictStatus};
pub use dynamics::{GalerkinSolver, SimParams, SimState};
pub use error::{Error, Result};
pub use field::{Multiplier, PhysicalField, ScalarSpectral, SpectralField};
pub use grid::Grid;
pub use heat::{DecayClaim, HeatOracle};
pub use initial::{ShellWeighting, SpectrumSpec};
pub use runner::{RunKind, RunReport};

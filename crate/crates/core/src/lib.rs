//! Fourier pseudo-spectral Cahn–Hilliard solver with energy-stable
//! auxiliary-variable time stepping.

// Validation deliberately writes `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod io;
pub mod model;
pub mod problems;
pub mod schemes;
pub mod simulation;

pub use error::{Error, Result};
pub use grid::{GridSpec, RealField, Spectral, SpectralField};
pub use model::{Model, PhysicalParams};
pub use diagnostics::HistoryRecord;
pub use problems::{ProblemKind, ProblemSpec};
pub use schemes::{SchemeKind, SchemeState, StepReport, Stepper};
pub use simulation::{RunOutcome, Simulation};

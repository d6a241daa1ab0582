//! Pseudospectral simulation and verification tools for the two-component
//! b-family with time-dependent coefficients.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod friedrichs;
pub mod initial_data;
pub mod integrator;
pub mod littlewood_paley;
pub mod params;
pub mod spectral;
pub mod theory;

pub use dynamics::{RhsForm, State, Tendency};
pub use error::{Error, Result};
pub use integrator::{simulate, SimResult, StepControl, Verdict};
pub use littlewood_paley::BesovSpec;
pub use params::{ParamFn, ParamKind, ParamSet};
pub use spectral::{Field, Grid, Spectrum};
pub use theory::TheoryConfig;

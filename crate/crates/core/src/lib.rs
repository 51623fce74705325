//! Open-system models of an NV center coupled to a cantilever, with the
//! numerics needed to study EIT ground-state cooling: operator algebra,
//! Lindblad generators, an adaptive integrator, steady states, closed-form
//! rates and spectra.
//!
//! Frequencies are in units of the mechanical frequency ω_m unless a name
//! says otherwise.

pub mod analytics;
pub mod constants;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod liouvillian;
pub mod model;
pub mod ode;
pub mod operator;
pub mod params;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use operator::{DensityMatrix, HilbertSpace, LindbladModel, Operator};
pub use params::{Bath, ModelParams, PhysicalParams};

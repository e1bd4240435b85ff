//! Fault-tolerant single-qubit gates built from Landau-Zener sweeps.
//!
//! A linear sweep of the detuning through resonance acts on the qubit, in the
//! modified adiabatic basis, as an X rotation sandwiched between Z rotations
//! whose angles are the adiabatic phases at the two endpoints. Choosing the
//! endpoints so that those phases vanish gives a pure X gate; flanking it with
//! two pi-pulses cancels the leading response of the phases to a static
//! detuning offset.

pub mod analytic;
pub mod cli;
pub mod composite;
pub mod exec;
pub mod gate_error;
pub mod linalg;
pub mod numeric;
pub mod propagator;
pub mod special;

mod error;

pub use error::{Error, Result};

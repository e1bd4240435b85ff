//! Closed-form Landau-Zener theory for linear sweeps: the adiabatic frame,
//! endpoint phases, the transition matrix and its rotation decomposition.

mod phase;
mod pulse;
mod scattering;

pub use phase::{
    adiabatic_phase, endpoint_phases, energy, phase_offset_exact, phase_offset_perturbative, phi0,
    EndpointPhases, OffsetMode, PhaseMethod, Sweep,
};
pub use pulse::{adiabatic_frame, AdiabaticFrame, Endpoint, LinearSweepPulse, DEFAULT_THRESHOLD_FACTOR};
pub use scattering::{
    rotation_angles, rotation_form, scattering_from_phases, scattering_matrix, RotationDecomposition,
};

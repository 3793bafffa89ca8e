//! Closed-form predictions: limiting thermodynamics, perturbative branches,
//! the two-level crossing gap and the phase diagram.
//!
//! The zero-field glass temperature used here is `T_c = 1/(2 sqrt(ln 2))`,
//! the inverse slope of `s(e) = ln 2 - e^2` at the ground-state energy
//! density. The value `1/sqrt(ln 2)` is sometimes quoted instead; it does not
//! follow from `s(e)` and is not used.

mod crossing;
mod perturbation;
mod phase;
mod thermo;

use thiserror::Error;

pub use crossing::{
    annealing_time_estimate, min_gap_prediction, two_level_gap, CrossingModel, GapPrediction,
    ANNEALING_TIME_CONSTANT,
};
pub use perturbation::{perturbed_energy_classical, perturbed_energy_quantum, quantum_level};
pub use phase::{phase_diagram, phase_point, Phase, PhaseGrid, PhasePoint};
pub use thermo::{
    critical_temperature, entropy_density, free_energy_para, free_energy_rem, ground_energy_density,
    transition_gamma, TRANSITION_BRACKET, TRANSITION_TOL,
};

#[derive(Debug, Error, PartialEq)]
pub enum TheoryError {
    #[error("energy density {0} lies outside the support [-sqrt(ln 2), sqrt(ln 2)]")]
    ZeroMeasure(f64),
    #[error("temperature must be finite and non-negative, got {0}")]
    InvalidTemperature(f64),
    #[error("transverse field must be finite and non-negative, got {0}")]
    InvalidGamma(f64),
    #[error("no transition field in {bracket:?} at T = {temperature}")]
    NoTransition { temperature: f64, bracket: (f64, f64) },
    #[error("expansion is singular: {0}")]
    Singular(&'static str),
    #[error("invalid spin count {0}")]
    InvalidSpinCount(u32),
    #[error("classical ground energy must be negative, got {0}")]
    NonNegativeGroundEnergy(f64),
    #[error("overlap squared must lie in [0, 1], got {0}")]
    InvalidOverlap(f64),
    #[error("gap must be positive, got {0}")]
    NonPositiveGap(f64),
}

pub type Result<T, E = TheoryError> = std::result::Result<T, E>;

//! Thermodynamics of the two limits: the classical random energy model at
//! zero field and the free-spin paramagnet at infinite field. All quantities
//! are intensive (per spin).

use std::f64::consts::LN_2;

use super::{Result, TheoryError};
use crate::numeric::bisect_secant;

/// Bracket searched for the first-order transition field.
pub const TRANSITION_BRACKET: (f64, f64) = (0.0, 10.0);
pub const TRANSITION_TOL: f64 = 1e-10;

/// Ground-state energy density `e0 = -sqrt(ln 2)`.
pub fn ground_energy_density() -> f64 {
    -LN_2.sqrt()
}

/// Microcanonical entropy density `ln 2 - e^2`. Outside `|e| <= sqrt(ln 2)`
/// the expected number of levels is exponentially small and an error is
/// returned instead.
pub fn entropy_density(e: f64) -> Result<f64> {
    let edge = LN_2.sqrt();
    if !(e.abs() <= edge) {
        return Err(TheoryError::ZeroMeasure(e));
    }
    Ok((LN_2 - e * e).max(0.0))
}

/// `T_c = 1 / s'(e0) = 1 / (2 sqrt(ln 2))`.
pub fn critical_temperature() -> f64 {
    1.0 / (2.0 * LN_2.sqrt())
}

/// Free energy density of the classical model: frozen at `-sqrt(ln 2)` below
/// `T_c`, `-1/(4T) - T ln 2` above.
pub fn free_energy_rem(temperature: f64) -> f64 {
    if temperature <= critical_temperature() {
        -LN_2.sqrt()
    } else {
        -1.0 / (4.0 * temperature) - temperature * LN_2
    }
}

/// Free energy density of `n` free spins in a transverse field,
/// `-T ln(2 cosh(gamma / T))`, evaluated as
/// `-gamma - T ln(1 + exp(-2 gamma / T))` so that it stays finite as `T -> 0`.
pub fn free_energy_para(temperature: f64, gamma: f64) -> f64 {
    if temperature <= 0.0 {
        return -gamma;
    }
    -gamma - temperature * (-2.0 * gamma / temperature).exp().ln_1p()
}

/// Field at which the classical and paramagnetic free energies cross.
pub fn transition_gamma(temperature: f64) -> Result<f64> {
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(TheoryError::InvalidTemperature(temperature));
    }
    if temperature == 0.0 {
        return Ok(LN_2.sqrt());
    }
    let target = free_energy_rem(temperature);
    let (lo, hi) = TRANSITION_BRACKET;
    bisect_secant(|g| target - free_energy_para(temperature, g), lo, hi, TRANSITION_TOL)
        .map_err(|_| TheoryError::NoTransition { temperature, bracket: TRANSITION_BRACKET })
}

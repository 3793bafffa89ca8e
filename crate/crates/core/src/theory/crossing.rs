//! Two-level model of the avoided crossing between the classical ground
//! state and the paramagnet ground state.
//!
//! The paramagnet level sits at `-gamma n`. Projected onto the two states,
//! the secular equation gives
//! `gap^2 = (gamma n + E0)^2 - 4 E0 gamma n <SG|QP>^2`.
//! The overlap of a basis state with the uniform paramagnet is `2^{-n/2}`.

use serde::{Deserialize, Serialize};

use super::{Result, TheoryError};

/// Proportionality constant in `tau = c / gap^2`; only ratios are meaningful.
pub const ANNEALING_TIME_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingModel {
    /// Classical ground energy `E0 < 0` (extensive).
    pub e_classical: f64,
    pub n: u32,
    /// `<SG|QP>^2`, in `[0, 1]`.
    pub overlap_sq: f64,
}

impl CrossingModel {
    pub fn new(e_classical: f64, n: u32, overlap_sq: f64) -> Result<Self> {
        if !(e_classical < 0.0 && e_classical.is_finite()) {
            return Err(TheoryError::NonNegativeGroundEnergy(e_classical));
        }
        if n == 0 {
            return Err(TheoryError::InvalidSpinCount(n));
        }
        if !(0.0..=1.0).contains(&overlap_sq) {
            return Err(TheoryError::InvalidOverlap(overlap_sq));
        }
        Ok(Self { e_classical, n, overlap_sq })
    }

    /// Overlap of one basis state with the uniform superposition, `2^{-n}`.
    pub fn with_uniform_overlap(e_classical: f64, n: u32) -> Result<Self> {
        Self::new(e_classical, n, 0.5f64.powi(n as i32))
    }

    /// Field at which the two unperturbed levels are degenerate, `|E0| / n`.
    pub fn degeneracy_gamma(&self) -> f64 {
        -self.e_classical / self.n as f64
    }

    /// Exact minimiser of `two_level_gap` in the field:
    /// `gamma n = |E0| (1 - 2 <SG|QP>^2)`.
    pub fn stationary_gamma(&self) -> f64 {
        self.degeneracy_gamma() * (1.0 - 2.0 * self.overlap_sq)
    }

    /// Minimum of `two_level_gap`, `2 |E0| sqrt(s^2 (1 - s^2))`.
    pub fn minimum_gap(&self) -> f64 {
        2.0 * self.e_classical.abs() * (self.overlap_sq * (1.0 - self.overlap_sq)).sqrt()
    }
}

/// Splitting of the two-level model at field `gamma`.
pub fn two_level_gap(model: &CrossingModel, gamma: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(TheoryError::InvalidGamma(gamma));
    }
    let qp = gamma * model.n as f64;
    let e0 = model.e_classical;
    let radicand = (qp + e0).powi(2) - 4.0 * e0 * qp * model.overlap_sq;
    assert!(radicand >= 0.0, "negative radicand {radicand} with E0 = {e0}");
    Ok(radicand.sqrt())
}

/// Predicted minimal gap `2 |E0| 2^{-n/2}` and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPrediction {
    pub min_gap: f64,
    pub gamma: f64,
}

pub fn min_gap_prediction(e_classical: f64, n: u32) -> Result<GapPrediction> {
    if !(e_classical < 0.0 && e_classical.is_finite()) {
        return Err(TheoryError::NonNegativeGroundEnergy(e_classical));
    }
    if n == 0 {
        return Err(TheoryError::InvalidSpinCount(n));
    }
    Ok(GapPrediction {
        min_gap: 2.0 * e_classical.abs() * 2f64.powf(-(n as f64) / 2.0),
        gamma: e_classical.abs() / n as f64,
    })
}

/// Annealing time `c / gap^2` with `c = 1`.
pub fn annealing_time_estimate(min_gap: f64) -> Result<f64> {
    if !(min_gap > 0.0 && min_gap.is_finite()) {
        return Err(TheoryError::NonPositiveGap(min_gap));
    }
    Ok(ANNEALING_TIME_CONSTANT / (min_gap * min_gap))
}

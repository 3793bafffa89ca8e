//! Phase diagram in the (temperature, field) plane: the equilibrium free
//! energy is the lower of the classical and paramagnet branches.

use serde::{Deserialize, Serialize};

use super::thermo::{critical_temperature, free_energy_para, free_energy_rem};
use super::{Result, TheoryError};
use crate::numeric::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    FrozenClassical,
    UnfrozenClassical,
    QuantumParamagnet,
}

impl Phase {
    pub fn is_classical(self) -> bool {
        !matches!(self, Phase::QuantumParamagnet)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::FrozenClassical => "frozen-classical",
            Phase::UnfrozenClassical => "unfrozen-classical",
            Phase::QuantumParamagnet => "quantum-paramagnet",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub temperature: f64,
    pub gamma: f64,
    pub phase: Phase,
    pub free_energy_density: f64,
}

/// Classifies `(T, gamma)`; ties go to the classical side.
pub fn phase_point(temperature: f64, gamma: f64) -> Result<PhasePoint> {
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(TheoryError::InvalidTemperature(temperature));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(TheoryError::InvalidGamma(gamma));
    }
    let f_rem = free_energy_rem(temperature);
    let f_para = free_energy_para(temperature, gamma);
    let (phase, free_energy_density) = if f_rem <= f_para {
        let label = if temperature <= critical_temperature() {
            Phase::FrozenClassical
        } else {
            Phase::UnfrozenClassical
        };
        (label, f_rem)
    } else {
        (Phase::QuantumParamagnet, f_para)
    };
    Ok(PhasePoint { temperature, gamma, phase, free_energy_density })
}

/// Phase labels on a temperature x field grid, stored temperature-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub temperatures: Vec<f64>,
    pub gammas: Vec<f64>,
    pub points: Vec<PhasePoint>,
}

impl PhaseGrid {
    pub fn at(&self, t_index: usize, g_index: usize) -> &PhasePoint {
        &self.points[t_index * self.gammas.len() + g_index]
    }

    /// For each temperature row, the index of the first paramagnet point
    /// (`gammas.len()` if the row is entirely classical).
    pub fn boundary_indices(&self) -> Vec<usize> {
        (0..self.temperatures.len())
            .map(|t| {
                (0..self.gammas.len())
                    .find(|&g| !self.at(t, g).phase.is_classical())
                    .unwrap_or(self.gammas.len())
            })
            .collect()
    }

    /// True if every row switches from classical to paramagnet at most once.
    pub fn rows_are_monotone(&self) -> bool {
        (0..self.temperatures.len()).all(|t| {
            let labels: Vec<bool> = (0..self.gammas.len()).map(|g| self.at(t, g).phase.is_classical()).collect();
            labels.windows(2).all(|w| w[0] || !w[1])
        })
    }
}

pub fn phase_diagram(temperatures: &Grid, gammas: &Grid) -> Result<PhaseGrid> {
    let ts = temperatures.points();
    let gs = gammas.points();
    let mut points = Vec::with_capacity(ts.len() * gs.len());
    for &t in &ts {
        for &g in &gs {
            points.push(phase_point(t, g)?);
        }
    }
    Ok(PhaseGrid { temperatures: ts, gammas: gs, points })
}

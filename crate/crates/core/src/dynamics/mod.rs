//! Direct integration of the Schrodinger equation under a field schedule
//! `gamma(t)`, started in the ground state at the initial field.
//!
//! The Hamiltonian is held constant over each step at its midpoint value and
//! `exp(-i H dt)` is applied in a Krylov subspace. Steps satisfy
//! `||H||_est dt <= dt_control`; a step whose Krylov error estimate exceeds
//! the bound is halved and retried.

mod krylov;

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::EnergyTable;
use crate::spectral::{solve, HamiltonianView, LanczosOptions, SpectralError, StartVector};
use krylov::{cdot, cnorm, KrylovStepper, StepResult};

/// Largest size propagated; the state vector is complex and dense.
pub const MAX_DYNAMICS_SPINS: u32 = 14;
pub const DEFAULT_DT_CONTROL: f64 = 0.5;
pub const DEFAULT_STEP_TOL: f64 = 1e-12;
pub const DEFAULT_KRYLOV_DIM: usize = 30;
pub const NORM_TOL: f64 = 1e-8;
/// Tolerance of the eigensolve that prepares the initial state.
const INITIAL_STATE_TOL: f64 = 1e-12;
const MAX_HALVINGS: u32 = 30;

/// Default initial field, `3 sqrt(ln 2)`: three times the zero-temperature
/// transition field.
pub fn default_gamma_max() -> f64 {
    3.0 * LN_2.sqrt()
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("dynamics is limited to n <= {MAX_DYNAMICS_SPINS}, got n = {0}")]
    TooManySpins(u32),
    #[error("total time must be finite and positive, got {0}")]
    InvalidTime(f64),
    #[error("field must be finite and non-negative, got {0}")]
    InvalidGamma(f64),
    #[error("dt control must be finite and positive, got {0}")]
    InvalidControl(f64),
    #[error("annealing times must be positive and sorted")]
    UnsortedTimes,
    #[error("initial state preparation failed: {0}")]
    Preparation(#[source] SpectralError),
    #[error("state length {got} does not match dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("step at t = {time} rejected {halvings} times (error estimate {error:e}, dt = {dt:e})")]
    StepRejected { time: f64, dt: f64, error: f64, halvings: u32 },
    #[error("norm drifted by {drift:e} at t = {time} after {steps} steps")]
    NormDrift { time: f64, drift: f64, steps: usize },
}

pub type Result<T, E = DynamicsError> = std::result::Result<T, E>;

/// Field as a function of time over `[0, total_time]`.
pub trait Protocol: Sync {
    fn total_time(&self) -> f64;
    fn gamma_at(&self, time: f64) -> f64;
    /// Largest field over the run, used for the step-size bound.
    fn gamma_bound(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `gamma_max (1 - s)`
    Linear,
}

impl Profile {
    pub fn gamma(self, gamma_max: f64, s: f64) -> f64 {
        match self {
            Profile::Linear => gamma_max * (1.0 - s.clamp(0.0, 1.0)),
        }
    }
}

/// Annealing schedule from `gamma_max` at `s = 0` down to zero at `s = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub total_time: f64,
    pub gamma_max: f64,
    pub profile: Profile,
}

impl Schedule {
    pub fn linear(total_time: f64) -> Result<Self> {
        Self::new(total_time, default_gamma_max(), Profile::Linear)
    }

    pub fn new(total_time: f64, gamma_max: f64, profile: Profile) -> Result<Self> {
        if !(total_time.is_finite() && total_time > 0.0) {
            return Err(DynamicsError::InvalidTime(total_time));
        }
        if !(gamma_max.is_finite() && gamma_max >= 0.0) {
            return Err(DynamicsError::InvalidGamma(gamma_max));
        }
        Ok(Self { total_time, gamma_max, profile })
    }

    pub fn gamma(&self, s: f64) -> f64 {
        self.profile.gamma(self.gamma_max, s)
    }
}

impl Protocol for Schedule {
    fn total_time(&self) -> f64 {
        self.total_time
    }

    fn gamma_at(&self, time: f64) -> f64 {
        self.gamma(time / self.total_time)
    }

    fn gamma_bound(&self) -> f64 {
        self.gamma_max
    }
}

/// Constant field for a fixed time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrozenField {
    pub gamma: f64,
    pub total_time: f64,
}

impl FrozenField {
    pub fn new(gamma: f64, total_time: f64) -> Result<Self> {
        Schedule::new(total_time, gamma, Profile::Linear)?;
        Ok(Self { gamma, total_time })
    }
}

impl Protocol for FrozenField {
    fn total_time(&self) -> f64 {
        self.total_time
    }

    fn gamma_at(&self, _time: f64) -> f64 {
        self.gamma
    }

    fn gamma_bound(&self) -> f64 {
        self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    /// Upper bound on `||H||_est dt`.
    pub dt_control: f64,
    /// Bound on the Krylov error estimate of a single step.
    pub step_tol: f64,
    pub krylov_dim: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { dt_control: DEFAULT_DT_CONTROL, step_tol: DEFAULT_STEP_TOL, krylov_dim: DEFAULT_KRYLOV_DIM }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_control.is_finite() && self.dt_control > 0.0) {
            return Err(DynamicsError::InvalidControl(self.dt_control));
        }
        if !(self.step_tol.is_finite() && self.step_tol > 0.0) {
            return Err(DynamicsError::InvalidControl(self.step_tol));
        }
        if self.krylov_dim < 2 {
            return Err(DynamicsError::InvalidControl(self.krylov_dim as f64));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationStats {
    pub steps: usize,
    pub rejected_steps: usize,
    pub max_krylov_dim: usize,
    /// Sum of the per-step error estimates.
    pub error_bound: f64,
    pub norm_error: f64,
}

/// Propagates `psi` in place over the whole protocol. The state is never
/// renormalised; a norm drift beyond `NORM_TOL` aborts.
pub fn propagate<P: Protocol + ?Sized>(
    table: &EnergyTable,
    protocol: &P,
    control: &StepControl,
    psi: &mut [Complex64],
) -> Result<PropagationStats> {
    control.validate()?;
    check_size(table)?;
    if psi.len() != table.len() {
        return Err(DynamicsError::DimensionMismatch { expected: table.len(), got: psi.len() });
    }
    let total = protocol.total_time();
    if !(total.is_finite() && total > 0.0) {
        return Err(DynamicsError::InvalidTime(total));
    }
    let initial_norm = cnorm(psi);
    let norm_bound = table.max_abs() + protocol.gamma_bound() * table.n() as f64;
    let dt_max = control.dt_control / norm_bound;
    let mut stepper = KrylovStepper::new(table.len(), control.krylov_dim.min(table.len()).max(2));
    let mut stats = PropagationStats { steps: 0, rejected_steps: 0, max_krylov_dim: 0, error_bound: 0.0, norm_error: 0.0 };
    let mut time = 0.0;
    while time < total {
        let mut dt = dt_max.min(total - time);
        let mut halvings = 0;
        loop {
            let gamma = protocol.gamma_at(time + 0.5 * dt);
            let h = HamiltonianView::new(table, gamma).map_err(|_| DynamicsError::InvalidGamma(gamma))?;
            match stepper.step(&h, psi, dt, control.step_tol) {
                StepResult::Accepted { dim, error } => {
                    stats.max_krylov_dim = stats.max_krylov_dim.max(dim);
                    stats.error_bound += error;
                    break;
                }
                StepResult::Rejected { error } => {
                    stats.rejected_steps += 1;
                    halvings += 1;
                    if halvings > MAX_HALVINGS {
                        return Err(DynamicsError::StepRejected { time, dt, error, halvings });
                    }
                    dt *= 0.5;
                }
            }
        }
        time = if total - time - dt <= f64::EPSILON * total { total } else { time + dt };
        stats.steps += 1;
        let drift = (cnorm(psi) - initial_norm).abs();
        if drift > NORM_TOL {
            return Err(DynamicsError::NormDrift { time, drift, steps: stats.steps });
        }
    }
    stats.norm_error = (cnorm(psi) - initial_norm).abs();
    Ok(stats)
}

/// `<psi|H|psi>` at field `gamma`.
pub fn energy(table: &EnergyTable, gamma: f64, psi: &[Complex64]) -> Result<f64> {
    let h = HamiltonianView::new(table, gamma).map_err(|_| DynamicsError::InvalidGamma(gamma))?;
    let hpsi = h.apply_complex(psi).map_err(|_| DynamicsError::DimensionMismatch { expected: table.len(), got: psi.len() })?;
    Ok(cdot(psi, &hpsi).re)
}

/// Ground state of `H(gamma)` as a complex unit vector.
pub fn ground_state(table: &EnergyTable, gamma: f64) -> Result<Vec<Complex64>> {
    check_size(table)?;
    let h = HamiltonianView::new(table, gamma).map_err(|_| DynamicsError::InvalidGamma(gamma))?;
    let opts = LanczosOptions::new(1, StartVector::keyed(table.seed(), gamma)).tol(INITIAL_STATE_TOL).with_vectors(true);
    let result = solve(&h, &opts).map_err(DynamicsError::Preparation)?;
    let v = &result.eigenvectors.expect("vectors requested")[0];
    // Fix the arbitrary sign so that the largest component is positive.
    let pivot = v.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
    let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
    Ok(v.iter().map(|&x| Complex64::new(sign * x, 0.0)).collect())
}

fn check_size(table: &EnergyTable) -> Result<()> {
    if table.n() > MAX_DYNAMICS_SPINS {
        return Err(DynamicsError::TooManySpins(table.n()));
    }
    Ok(())
}

/// Result of one annealing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealOutcome {
    pub tau: f64,
    /// `|<classical ground|psi(tau)>|^2`
    pub success_probability: f64,
    /// The same overlap for the initial state.
    pub initial_success: f64,
    pub norm_error: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    pub error_bound: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub ground_index: u64,
}

/// Anneals from the ground state at the protocol's initial field and
/// measures the weight on the classical ground configuration.
pub fn evolve<P: Protocol + ?Sized>(table: &EnergyTable, protocol: &P, control: &StepControl) -> Result<AnnealOutcome> {
    let initial = ground_state(table, protocol.gamma_at(0.0))?;
    evolve_from(table, protocol, control, &initial)
}

fn evolve_from<P: Protocol + ?Sized>(
    table: &EnergyTable,
    protocol: &P,
    control: &StepControl,
    initial: &[Complex64],
) -> Result<AnnealOutcome> {
    let (ground, _) = table.ground_state();
    let g = ground.index() as usize;
    let mut psi = initial.to_vec();
    let initial_energy = energy(table, protocol.gamma_at(0.0), &psi)?;
    let stats = propagate(table, protocol, control, &mut psi)?;
    Ok(AnnealOutcome {
        tau: protocol.total_time(),
        success_probability: psi[g].norm_sqr(),
        initial_success: initial[g].norm_sqr(),
        norm_error: stats.norm_error,
        steps: stats.steps,
        rejected_steps: stats.rejected_steps,
        error_bound: stats.error_bound,
        initial_energy,
        final_energy: energy(table, protocol.gamma_at(protocol.total_time()), &psi)?,
        ground_index: ground.index(),
    })
}

/// Outcomes over a list of annealing times and the first crossing of 1/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub outcomes: Vec<AnnealOutcome>,
    /// Time at which success first exceeds 1/2, interpolated linearly in
    /// `ln tau` between the bracketing runs.
    pub tau_half: Option<f64>,
}

impl SuccessCurve {
    pub fn is_monotone(&self) -> bool {
        self.outcomes.windows(2).all(|w| w[1].success_probability >= w[0].success_probability)
    }
}

/// Independent runs, in parallel, for each time in `taus` with the schedule
/// produced by `family`. All runs start from the same prepared state.
pub fn success_curve<P, F>(table: &EnergyTable, taus: &[f64], family: F, control: &StepControl) -> Result<SuccessCurve>
where
    P: Protocol,
    F: Fn(f64) -> Result<P> + Sync,
{
    if taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) || taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(DynamicsError::UnsortedTimes);
    }
    let protocols: Vec<P> = taus.iter().map(|&t| family(t)).collect::<Result<_>>()?;
    let Some(first) = protocols.first() else {
        return Ok(SuccessCurve { outcomes: Vec::new(), tau_half: None });
    };
    let initial = ground_state(table, first.gamma_at(0.0))?;
    let outcomes: Vec<AnnealOutcome> =
        protocols.par_iter().map(|p| evolve_from(table, p, control, &initial)).collect::<Result<_>>()?;
    let tau_half = crossing_time(&outcomes, 0.5);
    Ok(SuccessCurve { outcomes, tau_half })
}

fn crossing_time(outcomes: &[AnnealOutcome], level: f64) -> Option<f64> {
    let i = outcomes.iter().position(|o| o.success_probability > level)?;
    if i == 0 {
        return Some(outcomes[0].tau);
    }
    let (a, b) = (&outcomes[i - 1], &outcomes[i]);
    let f = (level - a.success_probability) / (b.success_probability - a.success_probability);
    Some((a.tau.ln() + f * (b.tau.ln() - a.tau.ln())).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_energies, ModelParams};
    use crate::spectral::dense_eigenpairs;

    fn table(n: u32, seed: u64) -> EnergyTable {
        sample_energies(&ModelParams::new(n, seed, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn schedule_endpoints() {
        let s = Schedule::linear(10.0).unwrap();
        assert_eq!(s.gamma(0.0), default_gamma_max());
        assert_eq!(s.gamma(1.0), 0.0);
        assert!((s.gamma_at(2.5) - 0.75 * default_gamma_max()).abs() < 1e-15);
        assert!(Schedule::linear(0.0).is_err());
        assert!(Schedule::new(1.0, -1.0, Profile::Linear).is_err());
    }

    #[test]
    fn frozen_ground_state_is_stationary() {
        let t = table(8, 3);
        let protocol = FrozenField::new(default_gamma_max(), 5.0).unwrap();
        let out = evolve(&t, &protocol, &StepControl::default()).unwrap();
        assert!((out.success_probability - out.initial_success).abs() < 1e-6);
        assert!(out.norm_error <= NORM_TOL);
        assert!((out.final_energy - out.initial_energy).abs() < 1e-9);
    }

    #[test]
    fn frozen_field_conserves_energy_of_a_superposition() {
        let t = table(7, 8);
        let mut psi: Vec<Complex64> = (0..t.len()).map(|i| Complex64::new((i as f64).sin(), 0.3 * (i as f64).cos())).collect();
        let norm = cnorm(&psi);
        psi.iter_mut().for_each(|x| *x /= norm);
        let gamma = 0.8;
        let before = energy(&t, gamma, &psi).unwrap();
        let stats = propagate(&t, &FrozenField::new(gamma, 20.0).unwrap(), &StepControl::default(), &mut psi).unwrap();
        let after = energy(&t, gamma, &psi).unwrap();
        assert!((after - before).abs() <= 10.0 * stats.error_bound * t.max_abs().max(1.0) + 1e-10);
        assert!(stats.norm_error <= NORM_TOL);
    }

    #[test]
    fn frozen_evolution_matches_spectral_propagator() {
        let t = table(6, 5);
        let gamma = 0.6;
        let time = 3.7;
        let (values, vectors) = dense_eigenpairs(&HamiltonianView::new(&t, gamma).unwrap()).unwrap();
        let mut psi = vec![Complex64::new(0.0, 0.0); t.len()];
        psi[0] = Complex64::new(1.0, 0.0);
        let mut expected = vec![Complex64::new(0.0, 0.0); t.len()];
        for (lambda, v) in values.iter().zip(&vectors) {
            let c = Complex64::from_polar(v[0], -lambda * time);
            for (e, a) in expected.iter_mut().zip(v) {
                *e += c * a;
            }
        }
        propagate(&t, &FrozenField::new(gamma, time).unwrap(), &StepControl::default(), &mut psi).unwrap();
        let diff: f64 = psi.iter().zip(&expected).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn sudden_quench_keeps_initial_overlap() {
        let t = table(8, 1);
        let out = evolve(&t, &Schedule::linear(1e-9).unwrap(), &StepControl::default()).unwrap();
        let (_, vectors) = dense_eigenpairs(&HamiltonianView::new(&t, default_gamma_max()).unwrap()).unwrap();
        let g = t.ground_state().0.index() as usize;
        let direct = vectors[0][g] * vectors[0][g];
        assert!((out.success_probability - direct).abs() < 1e-8);
        assert!((out.initial_success - direct).abs() < 1e-10);
        assert_eq!(out.steps, 1);
    }

    #[test]
    fn curve_bookkeeping() {
        let t = table(6, 2);
        let control = StepControl::default();
        let curve = success_curve(&t, &[2.0, 2.0, 50.0], Schedule::linear, &control).unwrap();
        assert_eq!(curve.outcomes.len(), 3);
        assert_eq!(curve.outcomes[0], curve.outcomes[1]);
        let single = success_curve(&t, &[2.0], Schedule::linear, &control).unwrap();
        assert_eq!(single.outcomes[0], curve.outcomes[0]);
        assert!(matches!(success_curve(&t, &[3.0, 1.0], Schedule::linear, &control), Err(DynamicsError::UnsortedTimes)));
        assert!(matches!(success_curve(&t, &[0.0], Schedule::linear, &control), Err(DynamicsError::UnsortedTimes)));
    }

    #[test]
    fn crossing_interpolates_in_log_time() {
        let mk = |tau: f64, p: f64| AnnealOutcome {
            tau,
            success_probability: p,
            initial_success: 0.0,
            norm_error: 0.0,
            steps: 1,
            rejected_steps: 0,
            error_bound: 0.0,
            initial_energy: 0.0,
            final_energy: 0.0,
            ground_index: 0,
        };
        let outcomes = [mk(1.0, 0.1), mk(10.0, 0.3), mk(100.0, 0.7)];
        assert!((crossing_time(&outcomes, 0.5).unwrap() - 10f64.powf(1.5)).abs() < 1e-9);
        assert_eq!(crossing_time(&outcomes[..2], 0.5), None);
    }

    #[test]
    fn size_cap() {
        let t = table(15, 0);
        assert!(matches!(evolve(&t, &Schedule::linear(1.0).unwrap(), &StepControl::default()), Err(DynamicsError::TooManySpins(15))));
    }
}

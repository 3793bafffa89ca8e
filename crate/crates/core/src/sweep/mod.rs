//! Field sweeps per disorder sample: gap curves, the location and size of the
//! minimal avoided-crossing gap, and statistics over ensembles of samples.

mod curve;
mod ensemble;
mod min_gap;

use thiserror::Error;

use crate::model::ModelError;
use crate::spectral::SpectralError;
use crate::theory::TheoryError;

pub use curve::{gap_sweep, GapCurve, GapPoint, SweepConfig};
pub use ensemble::{ensemble_run, fit_log_gap_slope, EnsembleConfig, EnsembleSummary, LinearFit, SeedFailure};
pub use min_gap::{
    evaluate_gap, find_min_gap, gap_closing_width, scan_gap, ClosingWidth, GapSample, MinGapConfig, MinGapRecord,
    DEFAULT_GAMMA_TOL, DEFAULT_SCAN_POINTS, MAX_BRACKET_EXPANSIONS, MAX_WINDOW_EXTENSIONS, SEARCH_MAX_BASIS,
};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid field range [{min}, {max}]")]
    InvalidRange { min: f64, max: f64 },
    #[error("a sweep needs at least 2 grid points, got {0}")]
    TooFewSteps(usize),
    #[error("eigensolve failed at gamma = {gamma}: {source}")]
    Spectral {
        gamma: f64,
        #[source]
        source: SpectralError,
    },
    #[error("gap {gap} at gamma = {gamma} is not positive")]
    NonPositiveGap { gamma: f64, gap: f64 },
    #[error("minimum stays at the bracket edge after {expansions} expansions (last bracket [{lo}, {hi}])")]
    BracketFailure { lo: f64, hi: f64, expansions: u32 },
    #[error("seed list is empty")]
    EmptySeeds,
    #[error("need at least two sizes with a positive median gap to fit a slope")]
    TooFewSizes,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SweepError {
    pub(crate) fn at(gamma: f64) -> impl FnOnce(SpectralError) -> SweepError {
        move |source| SweepError::Spectral { gamma, source }
    }
}

pub type Result<T, E = SweepError> = std::result::Result<T, E>;

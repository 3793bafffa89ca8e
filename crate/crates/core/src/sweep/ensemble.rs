use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{find_min_gap, MinGapConfig, MinGapRecord, Result, SweepError};
use crate::model::{sample_energies_with_budget, ModelParams, DEFAULT_TABLE_BUDGET_BYTES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub min_gap: MinGapConfig,
    pub table_budget_bytes: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { min_gap: MinGapConfig::default(), table_budget_bytes: DEFAULT_TABLE_BUDGET_BYTES }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: String,
}

/// Minimal-gap records of one size over a seed list, with summary
/// statistics over the successful seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n: u32,
    pub seeds: Vec<u64>,
    pub records: Vec<MinGapRecord>,
    pub failures: Vec<SeedFailure>,
    pub median_gap: f64,
    pub mean_gap: f64,
    pub min_gap: f64,
    pub max_gap: f64,
    /// Mean and median of `min_gap / prediction`.
    pub mean_ratio: f64,
    pub median_ratio: f64,
}

impl EnsembleSummary {
    pub fn from_records(n: u32, seeds: Vec<u64>, mut records: Vec<MinGapRecord>, mut failures: Vec<SeedFailure>) -> Self {
        records.sort_by_key(|r| r.seed);
        failures.sort_by_key(|f| f.seed);
        let gaps: Vec<f64> = records.iter().map(|r| r.min_gap).collect();
        let ratios: Vec<f64> = records.iter().map(MinGapRecord::ratio).collect();
        Self {
            n,
            seeds,
            median_gap: median(&gaps),
            mean_gap: mean(&gaps),
            min_gap: gaps.iter().copied().fold(f64::NAN, f64::min),
            max_gap: gaps.iter().copied().fold(f64::NAN, f64::max),
            mean_ratio: mean(&ratios),
            median_ratio: median(&ratios),
            records,
            failures,
        }
    }

    /// Recomputes the statistics from the stored records and compares.
    pub fn is_consistent(&self) -> bool {
        let again = Self::from_records(self.n, self.seeds.clone(), self.records.clone(), self.failures.clone());
        let same = |a: f64, b: f64| a == b || (a.is_nan() && b.is_nan());
        same(again.median_gap, self.median_gap)
            && same(again.mean_gap, self.mean_gap)
            && same(again.min_gap, self.min_gap)
            && same(again.max_gap, self.max_gap)
            && same(again.mean_ratio, self.mean_ratio)
            && same(again.median_ratio, self.median_ratio)
            && self.records.len() + self.failures.len() == self.seeds.len()
    }

    /// `max / min` of the minimal gaps.
    pub fn dispersion(&self) -> f64 {
        self.max_gap / self.min_gap
    }

    /// Fraction of records with `|gamma* n / |E0| - 1| <= tolerance`.
    pub fn location_fraction(&self, tolerance: f64) -> f64 {
        let hits = self.records.iter().filter(|r| r.location_error().abs() <= tolerance).count();
        hits as f64 / self.records.len() as f64
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// One minimal-gap search per seed, run in parallel. Seeds are sorted and
/// deduplicated; a failing seed is recorded and the others continue.
pub fn ensemble_run(n: u32, seeds: &[u64], config: &EnsembleConfig) -> Result<EnsembleSummary> {
    if seeds.is_empty() {
        return Err(SweepError::EmptySeeds);
    }
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    ModelParams::new(n, seeds[0], 0.0)?;
    let outcomes: Vec<std::result::Result<MinGapRecord, SeedFailure>> = seeds
        .par_iter()
        .map(|&seed| {
            let run = || -> Result<MinGapRecord> {
                let table = sample_energies_with_budget(&ModelParams::new(n, seed, 0.0)?, config.table_budget_bytes)?;
                find_min_gap(&table, &config.min_gap)
            };
            run().map_err(|e| SeedFailure { seed, error: e.to_string() })
        })
        .collect();
    let (mut records, mut failures) = (Vec::new(), Vec::new());
    for outcome in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    Ok(EnsembleSummary::from_records(n, seeds, records, failures))
}

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Fits `ln(median gap)` against `n` over several ensemble sizes.
pub fn fit_log_gap_slope(summaries: &[EnsembleSummary]) -> Result<LinearFit> {
    let points: Vec<(f64, f64)> = summaries
        .iter()
        .filter(|s| s.median_gap > 0.0)
        .map(|s| (s.n as f64, s.median_gap.ln()))
        .collect();
    let distinct = points.iter().any(|p| p.0 != points[0].0);
    if points.len() < 2 || !distinct {
        return Err(SweepError::TooFewSizes);
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(LinearFit { slope, intercept: my - slope * mx, points: points.len() })
}

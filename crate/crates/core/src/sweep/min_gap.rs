use serde::{Deserialize, Serialize};

use super::{Result, SweepError};
use crate::model::EnergyTable;
use crate::numeric::{golden_section, Grid};
use crate::spectral::{kernels, solve, HamiltonianView, LanczosOptions, StartVector, DEFAULT_TOL};
use crate::theory::{annealing_time_estimate, min_gap_prediction, two_level_gap, CrossingModel};

pub const DEFAULT_GAMMA_TOL: f64 = 1e-4;
/// Points of the coarse scan that picks the golden-section bracket.
pub const DEFAULT_SCAN_POINTS: usize = 9;
pub const MAX_BRACKET_EXPANSIONS: u32 = 3;
/// Extra scan cells the golden-section window may grow by when its minimum
/// sits on the window edge.
pub const MAX_WINDOW_EXTENSIONS: usize = 2;
/// Krylov basis cap for the many small solves of a search; short restarts
/// are cheaper than one long basis at the sizes swept here.
pub const SEARCH_MAX_BASIS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinGapConfig {
    /// Search interval in the field; `None` means `[0.5, 1.5] |E0| / n`.
    pub bracket: Option<(f64, f64)>,
    pub gamma_tol: f64,
    /// Eigensolver tolerance.
    pub tol: f64,
    pub scan_points: usize,
    pub max_expansions: u32,
    pub max_basis: usize,
}

impl Default for MinGapConfig {
    fn default() -> Self {
        Self {
            bracket: None,
            gamma_tol: DEFAULT_GAMMA_TOL,
            tol: DEFAULT_TOL,
            scan_points: DEFAULT_SCAN_POINTS,
            max_expansions: MAX_BRACKET_EXPANSIONS,
            max_basis: SEARCH_MAX_BASIS,
        }
    }
}

/// Minimal gap of one sample together with the two-level prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinGapRecord {
    pub n: u32,
    pub seed: u64,
    pub gamma_star: f64,
    pub min_gap: f64,
    /// Classical ground energy `E0` (extensive).
    pub e_classical: f64,
    pub ground_index: u64,
    /// `2 |E0| 2^{-n/2}`
    pub prediction: f64,
    /// `|E0| / n`
    pub predicted_gamma: f64,
    pub tau_estimate: f64,
    /// Final scan interval and the gaps at its ends.
    pub bracket: (f64, f64),
    pub bracket_gaps: (f64, f64),
    /// Interval handed to golden section and the gaps at its ends.
    pub search_interval: (f64, f64),
    pub search_gaps: (f64, f64),
    /// The minimum lies on the edge of the final search window, so the gap
    /// keeps falling away from the transition (typically towards a crossing
    /// between two classical levels).
    pub edge_limited: bool,
    pub expansions: u32,
    pub evaluations: usize,
}

impl MinGapRecord {
    pub fn ratio(&self) -> f64 {
        self.min_gap / self.prediction
    }

    /// `gamma* n / |E0| - 1`
    pub fn location_error(&self) -> f64 {
        self.gamma_star / self.predicted_gamma - 1.0
    }

    /// Two-level model gap at the located minimum.
    pub fn two_level_gap(&self) -> Result<f64> {
        let model = CrossingModel::with_uniform_overlap(self.e_classical, self.n)?;
        Ok(two_level_gap(&model, self.gamma_star)?)
    }
}

/// One eigensolve of a search: the gap and the ground state's transverse
/// magnetisation per spin, `<sum_b sigma^x_b> / n`, which is near 0 on the
/// classical side of the transition and near -1 on the paramagnet side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample {
    pub gamma: f64,
    pub gap: f64,
    pub magnetization: f64,
}

fn solve_gap(table: &EnergyTable, gamma: f64, config: &MinGapConfig, vectors: bool) -> Result<GapSample> {
    let h = HamiltonianView::new(table, gamma).map_err(SweepError::at(gamma))?;
    let opts = LanczosOptions::new(2, StartVector::keyed(table.seed(), gamma))
        .tol(config.tol)
        .max_basis(config.max_basis)
        .with_vectors(vectors);
    let result = solve(&h, &opts).map_err(SweepError::at(gamma))?;
    let gap = result.gap().unwrap_or(f64::NAN);
    if !(gap > 0.0) {
        return Err(SweepError::NonPositiveGap { gamma, gap });
    }
    let magnetization = match &result.eigenvectors {
        Some(v) if gamma > 0.0 => {
            let psi = &v[0];
            let weighted: Vec<f64> = psi.iter().zip(table.energies()).map(|(x, e)| e * x).collect();
            (result.eigenvalues[0] - kernels::dot(psi, &weighted)) / (gamma * table.n() as f64)
        }
        _ => 0.0,
    };
    Ok(GapSample { gamma, gap, magnetization })
}

/// `lambda1 - lambda0` at one field from a cold, keyed start.
pub fn evaluate_gap(table: &EnergyTable, gamma: f64, config: &MinGapConfig) -> Result<f64> {
    Ok(solve_gap(table, gamma, config, false)?.gap)
}

/// Scan of gap and magnetisation over an evenly spaced field grid.
pub fn scan_gap(table: &EnergyTable, lo: f64, hi: f64, points: usize, config: &MinGapConfig) -> Result<Vec<GapSample>> {
    Grid { start: lo, end: hi, count: points }
        .points()
        .into_iter()
        .map(|g| solve_gap(table, g, config, true))
        .collect()
}

/// Locates the minimal gap of the avoided crossing between the classical
/// ground state and the paramagnet.
///
/// A coarse scan over the bracket finds the cell where the ground-state
/// magnetisation passes -1/2. Golden section on the gap over that cell
/// refines the minimum to `gamma_tol`, and a parabola through the best three
/// evaluations of `gap^2` is tried last. A minimum on the cell edge grows the
/// window by one cell, at most `MAX_WINDOW_EXTENSIONS` times. If the
/// passage is not inside the bracket, the bracket is doubled about its
/// centre, at most `max_expansions` times.
///
/// Narrow crossings between two classical levels can give smaller gaps
/// elsewhere in the bracket; they are not the transition and are skipped.
pub fn find_min_gap(table: &EnergyTable, config: &MinGapConfig) -> Result<MinGapRecord> {
    let n = table.n();
    let (ground, e0) = table.ground_state();
    let prediction = min_gap_prediction(e0, n)?;
    let (mut lo, mut hi) = config.bracket.unwrap_or((0.5 * prediction.gamma, 1.5 * prediction.gamma));
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(SweepError::InvalidRange { min: lo, max: hi });
    }
    let points = config.scan_points.max(3);
    let mut evaluations = 0usize;
    let mut expansions = 0;
    let (scan, cell) = loop {
        let scan = scan_gap(table, lo, hi, points, config)?;
        evaluations += scan.len();
        let crossing = (0..points - 1)
            .filter(|&i| scan[i].magnetization > -0.5 && scan[i + 1].magnetization <= -0.5)
            .min_by(|&a, &b| {
                let ga = scan[a].gap.min(scan[a + 1].gap);
                let gb = scan[b].gap.min(scan[b + 1].gap);
                ga.total_cmp(&gb)
            });
        if let Some(cell) = crossing {
            break (scan, cell);
        }
        if expansions == config.max_expansions {
            return Err(SweepError::BracketFailure { lo, hi, expansions });
        }
        let (centre, half) = (0.5 * (lo + hi), hi - lo);
        lo = (centre - half).max(0.0);
        hi = centre + half;
        expansions += 1;
    };
    let bracket_gaps = (scan[0].gap, scan[points - 1].gap);
    let (mut first, mut last) = (cell, cell + 1);
    let mut extensions = 0;
    let mut edge_limited = false;
    let (gamma_star, min_gap) = loop {
        let (a, b) = (scan[first].gamma, scan[last].gamma);
        let mut inside: Vec<(f64, f64)> = Vec::new();
        let mut eval = |g: f64| -> Result<f64> {
            let gap = evaluate_gap(table, g, config)?;
            inside.push((g, gap));
            Ok(gap)
        };
        golden_section(&mut eval, a, b, config.gamma_tol)?;
        inside.extend(scan[first..=last].iter().map(|s| (s.gamma, s.gap)));
        if let Some(vertex) = parabola_vertex(&inside, a, b) {
            let gap = evaluate_gap(table, vertex, config)?;
            inside.push((vertex, gap));
        }
        evaluations += inside.len() - (last - first + 1);
        let best = inside
            .iter()
            .copied()
            .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.total_cmp(&y.0)))
            .expect("at least one evaluation");
        // A minimum pressed against the window edge continues past it.
        let at_left = best.0 - a <= config.gamma_tol;
        let at_right = b - best.0 <= config.gamma_tol;
        if !(at_left || at_right) {
            break best;
        }
        if extensions == MAX_WINDOW_EXTENSIONS || (at_left && first == 0) || (at_right && last == points - 1) {
            edge_limited = true;
            break best;
        }
        if at_left {
            first -= 1;
        } else {
            last += 1;
        }
        extensions += 1;
    };
    let (a, b) = (scan[first].gamma, scan[last].gamma);

    Ok(MinGapRecord {
        n,
        seed: table.seed(),
        gamma_star,
        min_gap,
        e_classical: e0,
        ground_index: ground.index(),
        prediction: prediction.min_gap,
        predicted_gamma: prediction.gamma,
        tau_estimate: annealing_time_estimate(min_gap)?,
        bracket: (lo, hi),
        bracket_gaps,
        search_interval: (a, b),
        search_gaps: (scan[first].gap, scan[last].gap),
        edge_limited,
        expansions,
        evaluations,
    })
}

/// Vertex of the parabola through the three lowest `(gamma, gap^2)` samples
/// inside `[a, b]`, if it opens upwards and lands inside the interval.
fn parabola_vertex(samples: &[(f64, f64)], a: f64, b: f64) -> Option<f64> {
    let mut inside: Vec<(f64, f64)> = samples.iter().copied().filter(|&(g, _)| g >= a && g <= b).collect();
    inside.sort_by(|x, y| x.1.total_cmp(&y.1));
    inside.dedup_by(|x, y| x.0 == y.0);
    if inside.len() < 3 {
        return None;
    }
    let [(x0, y0), (x1, y1), (x2, y2)] = [inside[0], inside[1], inside[2]].map(|(g, d)| (g, d * d));
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if !(curvature > 0.0) {
        return None;
    }
    let vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
    (vertex > a && vertex < b && vertex.is_finite()).then_some(vertex)
}

/// Field interval around `gamma_star` where the gap stays below
/// `factor * min_gap`. A side that never reaches the threshold before zero
/// field is clamped there and flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosingWidth {
    pub left: f64,
    pub right: f64,
    pub width: f64,
    pub left_clamped: bool,
}

pub fn gap_closing_width(table: &EnergyTable, record: &MinGapRecord, factor: f64, config: &MinGapConfig) -> Result<ClosingWidth> {
    let threshold = factor * record.min_gap;
    let centre = record.gamma_star;
    let step = record.min_gap / record.n as f64;
    let below = |g: f64| -> Result<bool> { Ok(evaluate_gap(table, g, config)? < threshold) };

    // Left side: march outwards with doubling steps, then bisect.
    let mut left_clamped = false;
    let mut inner = centre;
    let mut h = step;
    let mut outer = loop {
        let probe = centre - h;
        if probe <= 0.0 {
            if below(0.0)? {
                left_clamped = true;
                inner = 0.0;
            }
            break 0.0;
        }
        if !below(probe)? {
            break probe;
        }
        inner = probe;
        h *= 2.0;
    };
    while inner - outer > config.gamma_tol {
        let mid = 0.5 * (inner + outer);
        if below(mid)? {
            inner = mid;
        } else {
            outer = mid;
        }
    }
    let left = 0.5 * (inner + outer);

    let (mut inner, mut outer) = (centre, centre + step);
    let mut h = step;
    while below(outer)? {
        inner = outer;
        h *= 2.0;
        outer = centre + h;
    }
    while outer - inner > config.gamma_tol {
        let mid = 0.5 * (inner + outer);
        if below(mid)? {
            inner = mid;
        } else {
            outer = mid;
        }
    }
    let right = 0.5 * (inner + outer);
    Ok(ClosingWidth { left, right, width: right - left, left_clamped })
}

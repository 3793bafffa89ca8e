use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Result, SweepError};
use crate::model::EnergyTable;
use crate::numeric::Grid;
use crate::rng::CounterStream;
use crate::spectral::{solve, HamiltonianView, LanczosOptions, StartVector, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub gamma_min: f64,
    pub gamma_max: f64,
    /// Number of grid points, both ends included.
    pub steps: usize,
    pub k: usize,
    pub tol: f64,
}

impl SweepConfig {
    pub fn new(gamma_min: f64, gamma_max: f64, steps: usize) -> Self {
        Self { gamma_min, gamma_max, steps, k: 2, tol: DEFAULT_TOL }
    }

    pub fn k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn grid(&self) -> Grid {
        Grid { start: self.gamma_min, end: self.gamma_max, count: self.steps }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_min.is_finite() && self.gamma_max.is_finite())
            || self.gamma_min < 0.0
            || self.gamma_min >= self.gamma_max
        {
            return Err(SweepError::InvalidRange { min: self.gamma_min, max: self.gamma_max });
        }
        if self.steps < 2 {
            return Err(SweepError::TooFewSteps(self.steps));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub gamma: f64,
    /// Lowest `k` eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
    pub max_residual: f64,
    pub norm_estimate: f64,
}

impl GapPoint {
    pub fn lambda0(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[1]
    }
}

/// Lowest levels of one sample along a field grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCurve {
    pub n: u32,
    pub seed: u64,
    pub tol: f64,
    pub points: Vec<GapPoint>,
}

impl GapCurve {
    pub fn gammas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gamma).collect()
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gap).collect()
    }

    /// Grid point with the smallest gap.
    pub fn min_point(&self) -> Option<&GapPoint> {
        self.points.iter().min_by(|a, b| a.gap.total_cmp(&b.gap))
    }

    /// Largest violation of `|lambda_i(g') - lambda_i(g)| <= n |g' - g| + 2 tol_i`
    /// over adjacent points and levels, where `tol_i` is the residual bound of
    /// each solve. Non-positive means the curve is consistent.
    pub fn lipschitz_excess(&self) -> f64 {
        let n = self.n as f64;
        let mut worst = f64::NEG_INFINITY;
        for pair in self.points.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let slack = n * (b.gamma - a.gamma);
            for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
                let bound = slack
                    + self.tol * (x.abs() + a.norm_estimate)
                    + self.tol * (y.abs() + b.norm_estimate);
                worst = worst.max((y - x).abs() - bound);
            }
        }
        worst
    }

    pub fn is_lipschitz(&self) -> bool {
        self.lipschitz_excess() <= 0.0
    }

    pub fn gaps_positive(&self) -> bool {
        self.points.iter().all(|p| p.gap > 0.0)
    }

    /// CSV with one row per grid point. Each `preamble` line is written first
    /// behind a `# ` marker.
    pub fn write_csv<W: Write>(&self, preamble: &[String], mut out: W) -> Result<()> {
        for line in preamble {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "{}", Self::csv_header(self.points.first().map_or(0, |p| p.eigenvalues.len())))?;
        self.write_csv_rows(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn csv_header(k: usize) -> String {
        let mut header = String::from("seed,gamma");
        for i in 0..k {
            header.push_str(&format!(",lambda{i}"));
        }
        header.push_str(",gap,iterations,max_residual");
        header
    }

    pub fn write_csv_rows<W: Write>(&self, mut out: W) -> Result<()> {
        for p in &self.points {
            write!(out, "{},{:?}", self.seed, p.gamma)?;
            for v in &p.eigenvalues {
                write!(out, ",{v:?}")?;
            }
            writeln!(out, ",{:?},{},{:e}", p.gap, p.iterations, p.max_residual)?;
        }
        Ok(())
    }
}

/// Lowest `k` levels on an evenly spaced field grid. Each solve after the
/// first starts from the previous point's eigenvectors.
pub fn gap_sweep(table: &EnergyTable, config: &SweepConfig) -> Result<GapCurve> {
    config.validate()?;
    let mut points = Vec::with_capacity(config.steps);
    let mut previous: Option<Vec<Vec<f64>>> = None;
    for gamma in config.grid().points() {
        let h = HamiltonianView::new(table, gamma).map_err(SweepError::at(gamma))?;
        let stream = CounterStream::keyed(table.seed(), gamma.to_bits());
        let start = match previous.take() {
            Some(vectors) => StartVector::Warm { vectors, stream },
            None => StartVector::Random(stream),
        };
        let opts = LanczosOptions::new(config.k, start).tol(config.tol).with_vectors(true);
        let mut result = solve(&h, &opts).map_err(SweepError::at(gamma))?;
        let gap = result.gap().unwrap_or(f64::NAN);
        points.push(GapPoint {
            gamma,
            gap,
            iterations: result.iterations,
            max_residual: result.max_residual(),
            norm_estimate: result.norm_estimate,
            eigenvalues: std::mem::take(&mut result.eigenvalues),
        });
        previous = result.eigenvectors;
    }
    Ok(GapCurve { n: table.n(), seed: table.seed(), tol: config.tol, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_energies, ModelParams};
    use crate::spectral::{dense_spectrum, lowest_eigenpairs};

    fn table(n: u32, seed: u64) -> EnergyTable {
        sample_energies(&ModelParams::new(n, seed, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn zero_field_point_is_the_sorted_table() {
        let t = table(8, 5);
        let curve = gap_sweep(&t, &SweepConfig::new(0.0, 1.0, 5)).unwrap();
        let lowest = t.lowest_energies(2);
        assert_eq!(curve.points[0].eigenvalues, lowest);
        assert_eq!(curve.points[0].gap, lowest[1] - lowest[0]);
        assert_eq!(curve.gammas(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn warm_started_sweep_matches_dense_and_cold_solves() {
        let t = table(8, 11);
        let curve = gap_sweep(&t, &SweepConfig::new(0.1, 1.4, 14).k(3)).unwrap();
        assert!(curve.is_lipschitz());
        assert!(curve.gaps_positive());
        for p in &curve.points {
            let h = HamiltonianView::new(&t, p.gamma).unwrap();
            let dense = dense_spectrum(&h).unwrap();
            let cold = lowest_eigenpairs(&h, 3, DEFAULT_TOL).unwrap();
            for i in 0..3 {
                assert!((p.eigenvalues[i] - dense[i]).abs() < 1e-9);
                assert!((p.eigenvalues[i] - cold.eigenvalues[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lipschitz_check_flags_a_jump() {
        let t = table(6, 2);
        let mut curve = gap_sweep(&t, &SweepConfig::new(0.0, 1.0, 3)).unwrap();
        assert!(curve.is_lipschitz());
        curve.points[1].eigenvalues[0] += 10.0;
        assert!(!curve.is_lipschitz());
    }

    #[test]
    fn rejects_bad_ranges() {
        let t = table(4, 0);
        assert!(matches!(gap_sweep(&t, &SweepConfig::new(1.0, 1.0, 4)), Err(SweepError::InvalidRange { .. })));
        assert!(matches!(gap_sweep(&t, &SweepConfig::new(-1.0, 1.0, 4)), Err(SweepError::InvalidRange { .. })));
        assert!(matches!(gap_sweep(&t, &SweepConfig::new(0.0, 1.0, 1)), Err(SweepError::TooFewSteps(1))));
        let err = gap_sweep(&t, &SweepConfig::new(0.0, 1.0, 3).k(17)).unwrap_err();
        assert!(matches!(err, SweepError::Spectral { gamma, .. } if gamma == 0.0));
    }

    #[test]
    fn csv_layout() {
        let t = table(4, 3);
        let curve = gap_sweep(&t, &SweepConfig::new(0.0, 0.5, 2)).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&["{\"schema_version\":1}".to_string()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# {\"schema_version\":1}");
        assert_eq!(lines[1], "seed,gamma,lambda0,lambda1,gap,iterations,max_residual");
        assert_eq!(lines.len(), 4);
        let fields: Vec<f64> = lines[3].split(',').take(5).map(|s| s.parse().unwrap()).collect();
        assert_eq!(fields[0], 3.0);
        assert_eq!(fields[1], 0.5);
        assert_eq!(fields[2], curve.points[1].eigenvalues[0]);
        assert_eq!(fields[4], curve.points[1].gap);
    }
}

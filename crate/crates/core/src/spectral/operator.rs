use num_complex::Complex64;
use rayon::prelude::*;

use super::{Result, SpectralError};
use crate::model::EnergyTable;

/// Output rows per parallel task in the matrix-free product.
const MATVEC_BLOCK: usize = 1 << 12;

/// A real symmetric operator known only through its action on vectors.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`. Both slices have length `dim()`.
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    /// Upper bound on the spectral norm, used to scale residual tolerances.
    fn norm_estimate(&self) -> f64;
}

/// The transverse-field operator `E(sigma^z) + gamma * sum_b sigma^x_b` on a
/// borrowed energy table, applied without materialising the matrix.
#[derive(Debug, Clone, Copy)]
pub struct HamiltonianView<'a> {
    table: &'a EnergyTable,
    gamma: f64,
}

impl<'a> HamiltonianView<'a> {
    pub fn new(table: &'a EnergyTable, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(SpectralError::InvalidGamma(gamma));
        }
        Ok(Self { table, gamma })
    }

    pub fn table(&self) -> &'a EnergyTable {
        self.table
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> u32 {
        self.table.n()
    }

    /// Gershgorin bound `max|E| + gamma * n`.
    pub fn gershgorin_bound(&self) -> f64 {
        self.table.max_abs() + self.gamma * self.table.n() as f64
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    pub fn apply_complex(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_dim(x.len())?;
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        self.apply_complex_into(x, &mut y);
        Ok(y)
    }

    pub fn apply_complex_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.table.len());
        debug_assert_eq!(y.len(), self.table.len());
        let n = self.table.n();
        let energies = self.table.energies();
        let gamma = self.gamma;
        let rows = |start: usize, out: &mut [Complex64]| {
            for (offset, slot) in out.iter_mut().enumerate() {
                let a = start + offset;
                let mut flip = Complex64::new(0.0, 0.0);
                for bit in 0..n {
                    flip += x[a ^ (1usize << bit)];
                }
                *slot = x[a] * energies[a] + flip * gamma;
            }
        };
        if y.len() <= MATVEC_BLOCK {
            rows(0, y);
        } else {
            y.par_chunks_mut(MATVEC_BLOCK)
                .enumerate()
                .for_each(|(block, out)| rows(block * MATVEC_BLOCK, out));
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.table.len() {
            return Err(SpectralError::DimensionMismatch { expected: self.table.len(), got: len });
        }
        Ok(())
    }
}

impl SymmetricOperator for HamiltonianView<'_> {
    fn dim(&self) -> usize {
        self.table.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.table.len());
        debug_assert_eq!(y.len(), self.table.len());
        let n = self.table.n();
        let energies = self.table.energies();
        let gamma = self.gamma;
        // Each output row is summed in the same bit order regardless of how
        // rows are split across workers.
        let rows = |start: usize, out: &mut [f64]| {
            for (offset, slot) in out.iter_mut().enumerate() {
                let a = start + offset;
                let mut flip = 0.0;
                for bit in 0..n {
                    flip += x[a ^ (1usize << bit)];
                }
                *slot = energies[a] * x[a] + gamma * flip;
            }
        };
        if y.len() <= MATVEC_BLOCK {
            rows(0, y);
        } else {
            y.par_chunks_mut(MATVEC_BLOCK)
                .enumerate()
                .for_each(|(block, out)| rows(block * MATVEC_BLOCK, out));
        }
    }

    fn norm_estimate(&self) -> f64 {
        self.gershgorin_bound()
    }
}

/// Dense symmetric matrix as an operator; used for testing the solver on
/// spectra that do not come from a hypercube.
#[derive(Debug, Clone)]
pub struct DenseSymmetric {
    dim: usize,
    entries: Vec<f64>,
}

impl DenseSymmetric {
    /// Row-major entries; only symmetric input is meaningful.
    pub fn new(dim: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut entries = vec![0.0; dim * dim];
        for (i, v) in values.iter().enumerate() {
            entries[i * dim + i] = *v;
        }
        Self { dim, entries }
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }
}

impl SymmetricOperator for DenseSymmetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (row, slot) in y.iter_mut().enumerate() {
            let r = &self.entries[row * self.dim..(row + 1) * self.dim];
            *slot = r.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn norm_estimate(&self) -> f64 {
        (0..self.dim)
            .map(|row| self.entries[row * self.dim..(row + 1) * self.dim].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

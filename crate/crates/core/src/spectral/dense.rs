//! Brute-force reference: build the full matrix and diagonalise it.

use faer::{Mat, Side};

use super::operator::HamiltonianView;
use super::{Result, SpectralError};

/// Largest spin count accepted by the dense routines unless overridden.
pub const DEFAULT_DENSE_CAP: u32 = 14;

fn build(h: &HamiltonianView<'_>, cap: u32) -> Result<Mat<f64>> {
    let n = h.n();
    if n > cap {
        return Err(SpectralError::DenseTooLarge { n, cap });
    }
    let energies = h.table().energies();
    let gamma = h.gamma();
    let dim = energies.len();
    let mut m = Mat::<f64>::zeros(dim, dim);
    for a in 0..dim {
        m[(a, a)] = energies[a];
        for bit in 0..n {
            m[(a ^ (1usize << bit), a)] = gamma;
        }
    }
    Ok(m)
}

/// All `2^n` eigenvalues, ascending.
pub fn dense_spectrum(h: &HamiltonianView<'_>) -> Result<Vec<f64>> {
    dense_spectrum_with_cap(h, DEFAULT_DENSE_CAP)
}

pub fn dense_spectrum_with_cap(h: &HamiltonianView<'_>, cap: u32) -> Result<Vec<f64>> {
    let m = build(h, cap)?;
    let mut values = m.self_adjoint_eigenvalues(Side::Lower).map_err(|e| SpectralError::Dense(format!("{e:?}")))?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenvalues ascending with the matching unit eigenvectors.
pub fn dense_eigenpairs(h: &HamiltonianView<'_>) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = build(h, DEFAULT_DENSE_CAP)?;
    let eig = m.self_adjoint_eigen(Side::Lower).map_err(|e| SpectralError::Dense(format!("{e:?}")))?;
    let dim = m.nrows();
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let values = order.iter().map(|&i| s[i]).collect();
    let vectors = order.iter().map(|&i| (0..dim).map(|r| u[(r, i)]).collect()).collect();
    Ok((values, vectors))
}

//! One step of `psi <- exp(-i H dt) psi` in a Krylov subspace of `H` built
//! from `psi`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::spectral::HamiltonianView;

/// Below this the Krylov space is treated as invariant and the step is exact.
const BREAKDOWN_TOL: f64 = 1e-14;

pub(crate) fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut acc = [Complex64::new(0.0, 0.0); 2];
    let mut ca = a.chunks_exact(2);
    let mut cb = b.chunks_exact(2);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0].conj() * y[0];
        acc[1] += x[1].conj() * y[1];
    }
    let mut tail = Complex64::new(0.0, 0.0);
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x.conj() * y;
    }
    acc[0] + acc[1] + tail
}

pub(crate) fn cnorm(a: &[Complex64]) -> f64 {
    cdot(a, a).re.sqrt()
}

/// Outcome of one attempted step.
pub(crate) enum StepResult {
    /// Accepted with this Krylov dimension and error estimate.
    Accepted { dim: usize, error: f64 },
    /// The error bound was not met within `max_dim` vectors; `psi` is untouched.
    Rejected { error: f64 },
}

/// Workspace reused across steps.
pub(crate) struct KrylovStepper {
    basis: Vec<Vec<Complex64>>,
    w: Vec<Complex64>,
    max_dim: usize,
}

impl KrylovStepper {
    pub(crate) fn new(dim: usize, max_dim: usize) -> Self {
        Self { basis: (0..max_dim).map(|_| vec![Complex64::new(0.0, 0.0); dim]).collect(), w: vec![Complex64::new(0.0, 0.0); dim], max_dim }
    }

    /// Advances `psi` by `dt` under `h` if the a-posteriori error estimate
    /// `beta_m |[exp(-i T dt) e1]_m| ||psi||` falls below `tol`.
    pub(crate) fn step(&mut self, h: &HamiltonianView<'_>, psi: &mut [Complex64], dt: f64, tol: f64) -> StepResult {
        let norm = cnorm(psi);
        for (b, x) in self.basis[0].iter_mut().zip(psi.iter()) {
            *b = x / norm;
        }
        let mut alpha: Vec<f64> = Vec::with_capacity(self.max_dim);
        let mut beta: Vec<f64> = Vec::with_capacity(self.max_dim);
        let mut last_error = f64::INFINITY;
        for j in 0..self.max_dim {
            h.apply_complex_into(&self.basis[j], &mut self.w);
            alpha.push(cdot(&self.basis[j], &self.w).re);
            // Two full Gram-Schmidt passes; the basis is short.
            for _ in 0..2 {
                for i in 0..=j {
                    let c = cdot(&self.basis[i], &self.w);
                    for (wk, bk) in self.w.iter_mut().zip(&self.basis[i]) {
                        *wk -= c * bk;
                    }
                }
            }
            let b = cnorm(&self.w);
            let m = j + 1;
            let coeffs = exp_tridiagonal(&alpha, &beta, dt);
            let invariant = b <= BREAKDOWN_TOL * (alpha.iter().fold(0.0f64, |s, a| s.max(a.abs())) + 1.0);
            let error = if invariant { 0.0 } else { b * coeffs[m - 1].norm() * norm };
            last_error = error;
            if error <= tol {
                psi.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
                for (c, v) in coeffs.iter().zip(&self.basis) {
                    let scaled = c * norm;
                    for (p, vk) in psi.iter_mut().zip(v) {
                        *p += scaled * vk;
                    }
                }
                return StepResult::Accepted { dim: m, error };
            }
            if m == self.max_dim {
                break;
            }
            beta.push(b);
            for (t, wk) in self.basis[j + 1].iter_mut().zip(&self.w) {
                *t = wk / b;
            }
        }
        StepResult::Rejected { error: last_error }
    }
}

/// `exp(-i T dt) e1` for the symmetric tridiagonal `T` with diagonal `alpha`
/// and off-diagonal `beta` (`beta.len() == alpha.len() - 1`).
fn exp_tridiagonal(alpha: &[f64], beta: &[f64], dt: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    (0..m)
        .map(|k| {
            (0..m)
                .map(|j| {
                    let phase = Complex64::from_polar(1.0, -eig.eigenvalues[j] * dt);
                    phase * (eig.eigenvectors[(k, j)] * eig.eigenvectors[(0, j)])
                })
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_energies, ModelParams};
    use crate::spectral::dense_eigenpairs;

    #[test]
    fn matches_dense_exponential() {
        let table = sample_energies(&ModelParams::new(6, 3, 0.0).unwrap()).unwrap();
        let h = HamiltonianView::new(&table, 0.9).unwrap();
        let (values, vectors) = dense_eigenpairs(&h).unwrap();
        let dim = table.len();
        let mut psi: Vec<Complex64> = (0..dim).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let norm = cnorm(&psi);
        psi.iter_mut().for_each(|x| *x /= norm);
        let dt = 0.5 / h.gershgorin_bound();
        // Oracle: spectral decomposition of the full matrix.
        let mut expected = vec![Complex64::new(0.0, 0.0); dim];
        for (lambda, v) in values.iter().zip(&vectors) {
            let overlap: Complex64 = v.iter().zip(&psi).map(|(a, b)| a * b).sum();
            let phase = Complex64::from_polar(1.0, -lambda * dt) * overlap;
            for (e, a) in expected.iter_mut().zip(v) {
                *e += phase * a;
            }
        }
        let mut stepper = KrylovStepper::new(dim, 30);
        assert!(matches!(stepper.step(&h, &mut psi, dt, 1e-12), StepResult::Accepted { .. }));
        let diff: f64 = psi.iter().zip(&expected).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(diff < 1e-11, "{diff}");
        assert!((cnorm(&psi) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn eigenvector_only_picks_up_a_phase() {
        let table = sample_energies(&ModelParams::new(5, 1, 0.0).unwrap()).unwrap();
        let h = HamiltonianView::new(&table, 0.4).unwrap();
        let (values, vectors) = dense_eigenpairs(&h).unwrap();
        let mut psi: Vec<Complex64> = vectors[0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut stepper = KrylovStepper::new(table.len(), 10);
        let dt = 0.01;
        assert!(matches!(stepper.step(&h, &mut psi, dt, 1e-12), StepResult::Accepted { .. }));
        let phase = Complex64::from_polar(1.0, -values[0] * dt);
        for (p, v) in psi.iter().zip(&vectors[0]) {
            assert!((p - phase * v).norm() < 1e-10);
        }
    }

    #[test]
    fn too_long_a_step_is_rejected() {
        let table = sample_energies(&ModelParams::new(8, 2, 0.0).unwrap()).unwrap();
        let h = HamiltonianView::new(&table, 1.0).unwrap();
        let mut psi = vec![Complex64::new(0.0, 0.0); table.len()];
        psi[3] = Complex64::new(1.0, 0.0);
        let before = psi.clone();
        let mut stepper = KrylovStepper::new(table.len(), 4);
        assert!(matches!(stepper.step(&h, &mut psi, 50.0, 1e-10), StepResult::Rejected { .. }));
        assert_eq!(psi, before);
    }
}

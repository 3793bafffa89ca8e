//! Matrix-free application of the transverse-field Hamiltonian and
//! extraction of its lowest eigenpairs.

mod dense;
pub mod kernels;
mod lanczos;
mod operator;

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dense::{dense_eigenpairs, dense_spectrum, dense_spectrum_with_cap, DEFAULT_DENSE_CAP};
pub use lanczos::{
    lanczos, LanczosOptions, StartVector, DEFAULT_BASIS_BUDGET_BYTES, DEFAULT_MAX_BASIS, DEFAULT_MAX_MATVECS,
    DEFAULT_TOL,
};
pub use operator::{DenseSymmetric, HamiltonianView, SymmetricOperator};

/// Magic bytes of the eigenvector sidecar file.
pub const VECTORS_MAGIC: [u8; 8] = *b"QREMVEC\0";
pub const VECTORS_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("transverse field must be finite and non-negative, got {0}")]
    InvalidGamma(f64),
    #[error("vector length {got} does not match operator dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("requested {k} eigenpairs of a {dim}-dimensional operator")]
    InvalidK { k: usize, dim: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("Krylov basis needs {needed} vectors but the memory budget allows {allowed}")]
    BasisCapacity { needed: usize, allowed: usize },
    #[error("start vector is zero or not finite")]
    DegenerateStart,
    #[error("Lanczos did not converge after {} matrix-vector products (best residuals {:?})", .0.iterations, .0.residual_norms)]
    NotConverged(Box<SpectrumResult>),
    #[error("dense diagonalisation refused: n = {n} exceeds cap {cap}")]
    DenseTooLarge { n: u32, cap: u32 },
    #[error("dense eigensolver failed: {0}")]
    Dense(String),
    #[error("not an eigenvector file (bad magic)")]
    BadMagic,
    #[error("unsupported eigenvector file version {0}")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = SpectralError> = std::result::Result<T, E>;

/// Index range `[start, end)` of eigenvalues closer together than the
/// degeneracy tolerance; their relative order is not meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub start: usize,
    pub end: usize,
}

/// Lowest eigenvalues with convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub residual_norms: Vec<f64>,
    /// Matrix-vector products spent.
    pub iterations: usize,
    pub restarts: usize,
    pub norm_estimate: f64,
    pub converged: bool,
    pub clusters: Vec<Cluster>,
}

impl SpectrumResult {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        eigenvalues: Vec<f64>,
        eigenvectors: Option<Vec<Vec<f64>>>,
        residual_norms: Vec<f64>,
        iterations: usize,
        restarts: usize,
        norm_estimate: f64,
        tol: f64,
        converged: bool,
    ) -> Self {
        let clusters = find_clusters(&eigenvalues, 10.0 * tol * norm_estimate);
        Self { eigenvalues, eigenvectors, residual_norms, iterations, restarts, norm_estimate, converged, clusters }
    }

    pub fn gap(&self) -> Option<f64> {
        match self.eigenvalues.as_slice() {
            [a, b, ..] => Some(b - a),
            _ => None,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residual_norms.iter().copied().fold(0.0, f64::max)
    }

    /// Binary sidecar: magic, version (u32), count (u32), dim (u64), then
    /// the vectors back to back as little-endian `f64`.
    pub fn write_vectors<W: Write>(&self, mut out: W) -> Result<()> {
        let vectors = self.eigenvectors.as_deref().unwrap_or(&[]);
        let dim = vectors.first().map_or(0, Vec::len);
        out.write_all(&VECTORS_MAGIC)?;
        out.write_all(&VECTORS_FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&(vectors.len() as u32).to_le_bytes())?;
        out.write_all(&(dim as u64).to_le_bytes())?;
        for v in vectors {
            for x in v {
                out.write_all(&x.to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_vectors<R: Read>(mut input: R) -> Result<Vec<Vec<f64>>> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if magic != VECTORS_MAGIC {
            return Err(SpectralError::BadMagic);
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != VECTORS_FORMAT_VERSION {
            return Err(SpectralError::UnsupportedVersion(version));
        }
        input.read_exact(&mut word)?;
        let count = u32::from_le_bytes(word) as usize;
        let mut dim = [0u8; 8];
        input.read_exact(&mut dim)?;
        let dim = u64::from_le_bytes(dim) as usize;
        let mut vectors = Vec::with_capacity(count);
        let mut buf = vec![0u8; dim * 8];
        for _ in 0..count {
            input.read_exact(&mut buf)?;
            vectors.push(buf.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect());
        }
        Ok(vectors)
    }
}

fn find_clusters(values: &[f64], tol: f64) -> Vec<Cluster> {
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            if i - start > 1 {
                clusters.push(Cluster { start, end: i });
            }
            start = i;
        }
    }
    clusters
}

/// Lowest `k` eigenpairs of `h` to relative tolerance `tol`, starting from a
/// random vector keyed on the table seed and the field.
pub fn lowest_eigenpairs(h: &HamiltonianView<'_>, k: usize, tol: f64) -> Result<SpectrumResult> {
    let opts = LanczosOptions::new(k, StartVector::keyed(h.table().seed(), h.gamma())).tol(tol);
    solve(h, &opts)
}

/// Lowest eigenpairs of `h` with explicit solver options. At zero field the
/// operator is diagonal and the answer is read off the sorted table.
pub fn solve(h: &HamiltonianView<'_>, opts: &LanczosOptions) -> Result<SpectrumResult> {
    if h.gamma() == 0.0 {
        return diagonal_spectrum(h, opts);
    }
    lanczos(h, opts)
}

fn diagonal_spectrum(h: &HamiltonianView<'_>, opts: &LanczosOptions) -> Result<SpectrumResult> {
    let energies = h.table().energies();
    let dim = energies.len();
    if opts.k == 0 || opts.k > dim {
        return Err(SpectralError::InvalidK { k: opts.k, dim });
    }
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(SpectralError::InvalidTolerance(opts.tol));
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)));
    order.truncate(opts.k);
    let eigenvalues = order.iter().map(|&i| energies[i]).collect();
    let eigenvectors = opts.want_vectors.then(|| {
        order
            .iter()
            .map(|&i| {
                let mut v = vec![0.0; dim];
                v[i] = 1.0;
                v
            })
            .collect()
    });
    Ok(SpectrumResult::new(eigenvalues, eigenvectors, vec![0.0; opts.k], 0, 0, h.gershgorin_bound(), opts.tol, true))
}

#[cfg(test)]
mod tests {
    use super::kernels::dot;
    use super::*;
    use crate::model::{sample_energies, EnergyTable, ModelParams};

    fn random_table(n: u32, seed: u64) -> EnergyTable {
        sample_energies(&ModelParams::new(n, seed, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn apply_first_column_of_single_spin() {
        let table = EnergyTable::from_energies(1, 0, vec![0.4, -0.9]).unwrap();
        let h = HamiltonianView::new(&table, 0.25).unwrap();
        assert_eq!(h.apply(&[1.0, 0.0]).unwrap(), vec![0.4, 0.25]);
    }

    #[test]
    fn apply_pure_hypercube_adjacency() {
        let table = EnergyTable::from_energies(2, 0, vec![0.0; 4]).unwrap();
        let h = HamiltonianView::new(&table, 1.0).unwrap();
        assert_eq!(h.apply(&[1.0, 0.0, 0.0, 0.0]).unwrap(), vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn apply_rejects_wrong_length() {
        let table = random_table(3, 0);
        let h = HamiltonianView::new(&table, 1.0).unwrap();
        assert!(matches!(h.apply(&[0.0; 7]), Err(SpectralError::DimensionMismatch { expected: 8, got: 7 })));
        assert!(matches!(HamiltonianView::new(&table, -1.0), Err(SpectralError::InvalidGamma(_))));
    }

    #[test]
    fn complex_apply_acts_componentwise() {
        use num_complex::Complex64;
        let table = random_table(4, 2);
        let h = HamiltonianView::new(&table, 0.6).unwrap();
        let re: Vec<f64> = (0..16).map(|i| (i as f64).sin()).collect();
        let im: Vec<f64> = (0..16).map(|i| (i as f64).cos()).collect();
        let z: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let hz = h.apply_complex(&z).unwrap();
        let hre = h.apply(&re).unwrap();
        let him = h.apply(&im).unwrap();
        for i in 0..16 {
            assert_eq!(hz[i].re, hre[i]);
            assert_eq!(hz[i].im, him[i]);
        }
    }

    #[test]
    fn single_spin_analytic_pair() {
        let table = EnergyTable::from_energies(1, 0, vec![-1.0, 1.0]).unwrap();
        let h = HamiltonianView::new(&table, 1.0).unwrap();
        let res = lowest_eigenpairs(&h, 2, 1e-12).unwrap();
        assert!((res.eigenvalues[0] + 2f64.sqrt()).abs() < 1e-12);
        assert!((res.eigenvalues[1] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_field_returns_sorted_table() {
        let table = random_table(9, 4);
        let h = HamiltonianView::new(&table, 0.0).unwrap();
        let res = lowest_eigenpairs(&h, 3, DEFAULT_TOL).unwrap();
        assert_eq!(res.eigenvalues, table.lowest_energies(3));
    }

    #[test]
    fn matches_dense_oracle_at_ten_spins() {
        let table = random_table(10, 17);
        let h = HamiltonianView::new(&table, 0.7).unwrap();
        let res = lowest_eigenpairs(&h, 4, DEFAULT_TOL).unwrap();
        let dense = dense_spectrum(&h).unwrap();
        for (a, b) in res.eigenvalues.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn dense_small_examples() {
        let table = EnergyTable::from_energies(1, 0, vec![0.0, 0.0]).unwrap();
        let values = dense_spectrum(&HamiltonianView::new(&table, 1.0).unwrap()).unwrap();
        assert!((values[0] + 1.0).abs() < 1e-14 && (values[1] - 1.0).abs() < 1e-14);

        let table = EnergyTable::from_energies(2, 0, vec![0.0; 4]).unwrap();
        let values = dense_spectrum(&HamiltonianView::new(&table, 1.0).unwrap()).unwrap();
        for (a, b) in values.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn dense_trace_identity_and_cap() {
        let table = random_table(8, 5);
        let h = HamiltonianView::new(&table, 0.9).unwrap();
        let values = dense_spectrum(&h).unwrap();
        let trace: f64 = table.energies().iter().sum();
        let total: f64 = values.iter().sum();
        assert!((total - trace).abs() <= 1e-9 * table.energies().iter().map(|e| e.abs()).sum::<f64>());
        assert!(matches!(dense_spectrum_with_cap(&h, 6), Err(SpectralError::DenseTooLarge { n: 8, cap: 6 })));
    }

    #[test]
    fn eigenvectors_orthonormal_with_small_residuals() {
        let table = random_table(8, 9);
        let h = HamiltonianView::new(&table, 0.8).unwrap();
        let opts = LanczosOptions::new(4, StartVector::keyed(9, 0.8)).with_vectors(true);
        let res = solve(&h, &opts).unwrap();
        let vecs = res.eigenvectors.as_ref().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&vecs[i], &vecs[j]) - expected).abs() < 1e-8);
            }
            let hv = h.apply(&vecs[i]).unwrap();
            let r: f64 = hv.iter().zip(&vecs[i]).map(|(a, b)| (a - res.eigenvalues[i] * b).powi(2)).sum::<f64>().sqrt();
            assert!(r <= DEFAULT_TOL * (res.eigenvalues[i].abs() + res.norm_estimate) * 10.0, "residual {r}");
        }
    }

    #[test]
    fn clusters_flag_near_degenerate_values() {
        let clusters = find_clusters(&[0.0, 1e-12, 1.0, 2.0, 2.0, 2.0], 1e-9);
        assert_eq!(clusters, vec![Cluster { start: 0, end: 2 }, Cluster { start: 3, end: 6 }]);
        assert!(find_clusters(&[0.0, 1.0], 1e-9).is_empty());
    }

    #[test]
    fn json_omits_vectors_and_sidecar_round_trips() {
        let table = random_table(5, 1);
        let h = HamiltonianView::new(&table, 0.5).unwrap();
        let res = solve(&h, &LanczosOptions::new(2, StartVector::keyed(1, 0.5)).with_vectors(true)).unwrap();
        let json = serde_json::to_string(&res).unwrap();
        assert!(!json.contains("eigenvectors"));
        let back: SpectrumResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back.eigenvalues, res.eigenvalues);
        let mut bytes = Vec::new();
        res.write_vectors(&mut bytes).unwrap();
        assert_eq!(SpectrumResult::read_vectors(bytes.as_slice()).unwrap(), res.eigenvectors.unwrap());
    }
}

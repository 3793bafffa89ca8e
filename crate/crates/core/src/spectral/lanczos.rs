//! Thick-restart Lanczos for the lowest eigenpairs of a symmetric operator.
//!
//! Every new Krylov vector is orthogonalised against the whole retained
//! basis (classical Gram–Schmidt with a conditional second pass), and the
//! projected matrix is assembled from the actual inner products
//! `<v_i, A v_j>`, so after a restart it is the arrowhead-plus-tridiagonal
//! matrix of the retained Ritz vectors without any special bookkeeping.
//! When the basis reaches its cap, the lowest Ritz vectors are kept together
//! with the current residual direction and the iteration continues.

use nalgebra::{DMatrix, SymmetricEigen};

use super::kernels::{axpy, dot, norm, scale};
use super::operator::SymmetricOperator;
use super::{Result, SpectralError, SpectrumResult};
use crate::rng::CounterStream;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_BASIS: usize = 400;
/// Memory allowed for the stored Krylov basis (256 MiB).
pub const DEFAULT_BASIS_BUDGET_BYTES: u64 = 1 << 28;
pub const DEFAULT_MAX_MATVECS: usize = 20_000;

/// Relative size of the residual below which the Krylov space is treated as
/// invariant and a fresh direction is injected.
const INVARIANT_TOL: f64 = 1e-12;
/// Weight of the random component mixed into warm starts.
const WARM_NOISE: f64 = 0.05;
const MIN_CHECK_INTERVAL: usize = 5;

/// How the first Krylov vector is chosen.
#[derive(Debug, Clone)]
pub enum StartVector {
    /// Deterministic pseudo-random unit vector drawn from `stream`.
    Random(CounterStream),
    /// Sum of previously converged vectors plus a small random component.
    Warm { vectors: Vec<Vec<f64>>, stream: CounterStream },
}

impl StartVector {
    /// Random start keyed on a disorder seed and a field value.
    pub fn keyed(seed: u64, gamma: f64) -> Self {
        StartVector::Random(CounterStream::keyed(seed, gamma.to_bits()))
    }
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    pub k: usize,
    /// Relative residual tolerance: `||A y - theta y|| <= tol (|theta| + ||A||_est)`.
    pub tol: f64,
    pub max_basis: usize,
    pub basis_budget_bytes: u64,
    pub max_matvecs: usize,
    pub want_vectors: bool,
    pub start: StartVector,
}

impl LanczosOptions {
    pub fn new(k: usize, start: StartVector) -> Self {
        Self {
            k,
            tol: DEFAULT_TOL,
            max_basis: DEFAULT_MAX_BASIS,
            basis_budget_bytes: DEFAULT_BASIS_BUDGET_BYTES,
            max_matvecs: DEFAULT_MAX_MATVECS,
            want_vectors: false,
            start,
        }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_vectors(mut self, want: bool) -> Self {
        self.want_vectors = want;
        self
    }

    pub fn max_basis(mut self, max_basis: usize) -> Self {
        self.max_basis = max_basis;
        self
    }

    pub fn max_matvecs(mut self, max_matvecs: usize) -> Self {
        self.max_matvecs = max_matvecs;
        self
    }
}

/// Krylov basis stored vector-major in one allocation.
struct Basis {
    dim: usize,
    data: Vec<f64>,
}

impl Basis {
    fn new(dim: usize, capacity: usize) -> Self {
        Self { dim, data: vec![0.0; dim * capacity] }
    }

    fn vec(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn vec_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// `coeffs = V[..len]^T w; w -= V[..len] coeffs`.
    fn project_out(&self, len: usize, w: &mut [f64], coeffs: &mut [f64]) {
        for (i, c) in coeffs.iter_mut().enumerate().take(len) {
            *c = dot(self.vec(i), w);
        }
        for (i, c) in coeffs.iter().enumerate().take(len) {
            axpy(-c, self.vec(i), w);
        }
    }

    /// Orthogonalise `w` against the first `len` vectors, twice if the first
    /// pass cancelled most of it. The total projection coefficients end up in
    /// `coeffs`; returns the norm of what is left.
    fn orthogonalize(&self, len: usize, w: &mut [f64], coeffs: &mut [f64], scratch: &mut [f64]) -> f64 {
        let before = norm(w);
        self.project_out(len, w, coeffs);
        let mut after = norm(w);
        let mut passes = 1;
        while after < 0.7 * before.max(f64::MIN_POSITIVE) && passes < 3 && after > 0.0 {
            let prev = after;
            self.project_out(len, w, &mut scratch[..len]);
            for (c, s) in coeffs.iter_mut().zip(scratch.iter()).take(len) {
                *c += s;
            }
            after = norm(w);
            passes += 1;
            if after >= 0.7 * prev {
                break;
            }
        }
        after
    }

    /// `V[..keep] = V[..len] * rot[:, ..keep]`, with `rot` column-major of
    /// leading dimension `len`.
    fn rotate(&mut self, len: usize, rot: &[f64], keep: usize) {
        const TILE: usize = 256;
        let dim = self.dim;
        let mut tmp = vec![0.0; keep * TILE];
        let mut start = 0;
        while start < dim {
            let width = TILE.min(dim - start);
            tmp.iter_mut().for_each(|x| *x = 0.0);
            for j in 0..len {
                let src = &self.data[j * dim + start..j * dim + start + width];
                for i in 0..keep {
                    let s = rot[i * len + j];
                    if s != 0.0 {
                        axpy(s, src, &mut tmp[i * TILE..i * TILE + width]);
                    }
                }
            }
            for i in 0..keep {
                self.data[i * dim + start..i * dim + start + width].copy_from_slice(&tmp[i * TILE..i * TILE + width]);
            }
            start += width;
        }
    }

    fn combine(&self, len: usize, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (j, c) in coeffs.iter().enumerate().take(len) {
            axpy(*c, self.vec(j), &mut out);
        }
        out
    }
}

struct Ritz {
    values: Vec<f64>,
    /// Column-major `len x len`, columns sorted by ascending value.
    vectors: Vec<f64>,
}

fn ritz_pairs(t: &[f64], ld: usize, len: usize) -> Ritz {
    let m = DMatrix::from_fn(len, len, |i, j| 0.5 * (t[i * ld + j] + t[j * ld + i]));
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = Vec::with_capacity(len * len);
    for &i in &order {
        vectors.extend(eig.eigenvectors.column(i).iter().copied());
    }
    Ritz { values, vectors }
}

/// Writes a deterministic unit vector orthogonal to the first `len` basis
/// vectors into `out`; returns false if none could be found.
fn fresh_direction(basis: &Basis, len: usize, stream: &CounterStream, draw: &mut u64, out: &mut [f64], scratch: &mut [f64]) -> bool {
    let dim = out.len();
    for _ in 0..4 {
        stream.fill_symmetric_uniform(*draw * dim as u64, out);
        *draw += 1;
        let mut coeffs = vec![0.0; len];
        let before = norm(out);
        let after = basis.orthogonalize(len, out, &mut coeffs, scratch);
        if after > 1e-8 * before {
            scale(1.0 / after, out);
            return true;
        }
    }
    false
}

/// Lowest `opts.k` eigenpairs of `op`.
pub fn lanczos<A: SymmetricOperator + ?Sized>(op: &A, opts: &LanczosOptions) -> Result<SpectrumResult> {
    let dim = op.dim();
    let k = opts.k;
    if k == 0 || k > dim {
        return Err(SpectralError::InvalidK { k, dim });
    }
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(SpectralError::InvalidTolerance(opts.tol));
    }
    let hnorm = op.norm_estimate().max(f64::MIN_POSITIVE);
    let budget_vectors = (opts.basis_budget_bytes / (8 * dim as u64)).min(usize::MAX as u64) as usize;
    let m_max = opts.max_basis.min(budget_vectors).min(dim);
    let m_needed = (k + 2).min(dim);
    if m_max < m_needed {
        return Err(SpectralError::BasisCapacity { needed: m_needed, allowed: m_max });
    }

    let mut basis = Basis::new(dim, m_max);
    let mut t = vec![0.0; m_max * m_max];
    let mut w = vec![0.0; dim];
    let mut coeffs = vec![0.0; m_max];
    let mut scratch = vec![0.0; m_max];
    let mut local = vec![0.0; m_max];

    let noise_stream = match &opts.start {
        StartVector::Random(stream) => *stream,
        StartVector::Warm { stream, .. } => *stream,
    };
    match &opts.start {
        StartVector::Random(stream) => {
            stream.fill_symmetric_uniform(0, basis.vec_mut(0));
        }
        StartVector::Warm { vectors, stream } => {
            let v0 = basis.vec_mut(0);
            stream.fill_symmetric_uniform(0, v0);
            let noise = norm(v0);
            if noise > 0.0 {
                scale(WARM_NOISE / noise, v0);
            }
            for v in vectors.iter().filter(|v| v.len() == dim) {
                let vn = norm(v);
                if vn > 0.0 {
                    axpy(1.0 / vn, v, v0);
                }
            }
        }
    }
    // Draw 0 seeded the start vector.
    let mut draw = 1u64;
    let start_norm = norm(basis.vec(0));
    if !(start_norm > 0.0 && start_norm.is_finite()) {
        return Err(SpectralError::DegenerateStart);
    }
    scale(1.0 / start_norm, basis.vec_mut(0));

    let mut len = 1usize;
    let mut matvecs = 0usize;
    let mut restarts = 0usize;
    let mut last_check = 0usize;

    loop {
        let j = len - 1;
        op.apply_into(basis.vec(j), &mut w);
        matvecs += 1;
        // Remove the couplings already known from earlier steps (the
        // tridiagonal link, or the arrow right after a restart) and the
        // diagonal term, then clean up against the whole basis.
        for i in 0..j {
            let c = t[j * m_max + i];
            local[i] = c;
            if c != 0.0 {
                axpy(-c, basis.vec(i), &mut w);
            }
        }
        local[j] = dot(basis.vec(j), &w);
        axpy(-local[j], basis.vec(j), &mut w);
        let beta = basis.orthogonalize(len, &mut w, &mut coeffs, &mut scratch);
        for i in 0..len {
            let h = coeffs[i] + local[i];
            t[i * m_max + j] = h;
            t[j * m_max + i] = h;
        }
        let invariant = beta <= INVARIANT_TOL * hnorm || len == dim;
        let full = len == m_max;
        let interval = MIN_CHECK_INTERVAL.max(len / 10);

        if len >= k && (full || invariant || len - last_check >= interval || matvecs >= opts.max_matvecs) {
            last_check = len;
            let ritz = ritz_pairs(&t, m_max, len);
            let residuals: Vec<f64> = (0..k).map(|i| beta * ritz.vectors[i * len + len - 1].abs()).collect();
            let converged = residuals
                .iter()
                .zip(&ritz.values)
                .all(|(r, theta)| *r <= opts.tol * (theta.abs() + hnorm));
            let exhausted = invariant && len == dim;
            if converged || exhausted || matvecs >= opts.max_matvecs {
                let result = finish(&basis, &ritz, len, k, residuals, matvecs, restarts, hnorm, opts, converged || exhausted);
                if result.converged {
                    return Ok(result);
                }
                return Err(SpectralError::NotConverged(Box::new(result)));
            }
            if full {
                let keep = ((m_max + k) / 2).min(m_max - 2).max(k);
                basis.rotate(len, &ritz.vectors, keep);
                t.iter_mut().for_each(|x| *x = 0.0);
                for i in 0..keep {
                    t[i * m_max + i] = ritz.values[i];
                }
                let next = keep;
                if invariant {
                    let mut fresh = vec![0.0; dim];
                    if !fresh_direction(&basis, keep, &noise_stream, &mut draw, &mut fresh, &mut scratch) {
                        return Err(SpectralError::DegenerateStart);
                    }
                    basis.vec_mut(next).copy_from_slice(&fresh);
                } else {
                    for i in 0..keep {
                        let c = beta * ritz.vectors[i * len + len - 1];
                        t[i * m_max + next] = c;
                        t[next * m_max + i] = c;
                    }
                    scale(1.0 / beta, &mut w);
                    basis.vec_mut(next).copy_from_slice(&w);
                }
                len = keep + 1;
                last_check = len;
                restarts += 1;
                continue;
            }
        }

        if invariant {
            let mut fresh = vec![0.0; dim];
            if !fresh_direction(&basis, len, &noise_stream, &mut draw, &mut fresh, &mut scratch) {
                return Err(SpectralError::DegenerateStart);
            }
            basis.vec_mut(len).copy_from_slice(&fresh);
        } else {
            scale(1.0 / beta, &mut w);
            basis.vec_mut(len).copy_from_slice(&w);
            t[len * m_max + len - 1] = beta;
            t[(len - 1) * m_max + len] = beta;
        }
        len += 1;
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    basis: &Basis,
    ritz: &Ritz,
    len: usize,
    k: usize,
    residuals: Vec<f64>,
    matvecs: usize,
    restarts: usize,
    hnorm: f64,
    opts: &LanczosOptions,
    converged: bool,
) -> SpectrumResult {
    let eigenvalues = ritz.values[..k].to_vec();
    let eigenvectors = opts.want_vectors.then(|| {
        (0..k)
            .map(|i| {
                let mut y = basis.combine(len, &ritz.vectors[i * len..(i + 1) * len]);
                let yn = norm(&y);
                scale(1.0 / yn, &mut y);
                y
            })
            .collect()
    });
    SpectrumResult::new(eigenvalues, eigenvectors, residuals, matvecs, restarts, hnorm, opts.tol, converged)
}

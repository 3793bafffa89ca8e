//! Quenched random-energy landscape over the `n`-bit hypercube.
//!
//! Configuration `a` is an integer in `[0, 2^n)`; bit `b` of `a` encodes the
//! z-projection of spin `b`, with bit value 0 meaning `+1` and 1 meaning `-1`.
//! Energies are extensive: `E_a ~ N(0, n/2)`, drawn i.i.d. from a counter
//! stream keyed on the seed so entry `a` depends only on `(seed, a)`.

use std::io::{self, Read, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::rng::CounterStream;

/// Largest supported spin count.
pub const MAX_SPINS: u32 = 30;

/// Default cap on the bytes a single energy table may occupy (1 GiB).
pub const DEFAULT_TABLE_BUDGET_BYTES: u64 = 1 << 30;

/// Magic bytes opening a binary energy-table file.
pub const TABLE_MAGIC: [u8; 8] = *b"QREMTBL\0";

/// Current binary energy-table format version.
pub const TABLE_FORMAT_VERSION: u32 = 1;

const GENERATION_BLOCK: usize = 1 << 12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("spin count {0} outside 1..={MAX_SPINS}")]
    InvalidSpinCount(u32),
    #[error("transverse field must be finite and non-negative, got {0}")]
    InvalidGamma(f64),
    #[error("table of 2^{n} energies needs {needed} bytes, budget is {budget} bytes")]
    Capacity { n: u32, needed: u64, budget: u64 },
    #[error("bit {bit} out of range for {n} spins")]
    BitOutOfRange { bit: u32, n: u32 },
    #[error("configuration index {index} out of range for {n} spins")]
    IndexOutOfRange { index: u64, n: u32 },
    #[error("energy table length {len} does not equal 2^{n}")]
    LengthMismatch { len: usize, n: u32 },
    #[error("not an energy-table file (bad magic)")]
    BadMagic,
    #[error("unsupported energy-table format version {0}")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

/// Size, disorder seed and transverse field of one instance.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub n: u32,
    pub seed: u64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(n: u32, seed: u64, gamma: f64) -> Result<Self> {
        let params = Self { n, seed, gamma };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        validate_spin_count(self.n)?;
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(ModelError::InvalidGamma(self.gamma));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }
}

pub(crate) fn validate_spin_count(n: u32) -> Result<()> {
    if n == 0 || n > MAX_SPINS {
        return Err(ModelError::InvalidSpinCount(n));
    }
    Ok(())
}

/// Bytes needed to hold one `f64` per configuration of `n` spins.
pub fn table_bytes(n: u32) -> u64 {
    (1u64 << n) * std::mem::size_of::<f64>() as u64
}

/// A classical configuration, i.e. a computational basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct Configuration(pub u64);

impl Configuration {
    pub fn index(self) -> u64 {
        self.0
    }

    /// Configuration obtained by flipping spin `bit`.
    pub fn neighbor(self, bit: u32, n: u32) -> Result<Configuration> {
        if bit >= n {
            return Err(ModelError::BitOutOfRange { bit, n });
        }
        if n < 64 && self.0 >> n != 0 {
            return Err(ModelError::IndexOutOfRange { index: self.0, n });
        }
        Ok(Configuration(self.0 ^ (1u64 << bit)))
    }

    /// z-projection of spin `bit`: `+1` for a clear bit, `-1` for a set one.
    pub fn spin(self, bit: u32) -> i8 {
        if (self.0 >> bit) & 1 == 0 {
            1
        } else {
            -1
        }
    }
}

/// The `2^n` quenched energies of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTable {
    n: u32,
    seed: u64,
    energies: Vec<f64>,
}

impl EnergyTable {
    /// Wraps explicit energies. `seed` is recorded but not used to check them.
    pub fn from_energies(n: u32, seed: u64, energies: Vec<f64>) -> Result<Self> {
        validate_spin_count(n)?;
        if energies.len() != 1usize << n {
            return Err(ModelError::LengthMismatch { len: energies.len(), n });
        }
        Ok(Self { n, seed, energies })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, config: Configuration) -> f64 {
        self.energies[config.0 as usize]
    }

    pub fn max_abs(&self) -> f64 {
        self.energies.iter().fold(0.0f64, |m, e| m.max(e.abs()))
    }

    /// Lowest energy and its configuration; ties go to the lowest index.
    pub fn ground_state(&self) -> (Configuration, f64) {
        ground_state_energy(self)
    }

    /// The `k` lowest energies in ascending order.
    pub fn lowest_energies(&self, k: usize) -> Vec<f64> {
        let mut sorted = self.energies.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.truncate(k);
        sorted
    }

    /// Writes the binary format: magic, version (u32), n (u32), seed (u64),
    /// then `2^n` little-endian `f64`.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&TABLE_MAGIC)?;
        out.write_all(&TABLE_FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&self.n.to_le_bytes())?;
        out.write_all(&self.seed.to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * GENERATION_BLOCK);
        for chunk in self.energies.chunks(GENERATION_BLOCK) {
            buf.clear();
            for e in chunk {
                buf.extend_from_slice(&e.to_le_bytes());
            }
            out.write_all(&buf)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if magic != TABLE_MAGIC {
            return Err(ModelError::BadMagic);
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != TABLE_FORMAT_VERSION {
            return Err(ModelError::UnsupportedVersion(version));
        }
        input.read_exact(&mut word)?;
        let n = u32::from_le_bytes(word);
        validate_spin_count(n)?;
        let mut seed = [0u8; 8];
        input.read_exact(&mut seed)?;
        let seed = u64::from_le_bytes(seed);
        let mut payload = vec![0u8; (1usize << n) * 8];
        input.read_exact(&mut payload)?;
        let energies = payload
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Self { n, seed, energies })
    }
}

/// Stream from which the energies of seed `seed` are drawn.
pub fn energy_stream(seed: u64) -> CounterStream {
    CounterStream::new(seed)
}

/// Regenerates the single energy `E_index` of sample `(n, seed)`.
pub fn energy_at(n: u32, seed: u64, index: u64) -> f64 {
    (n as f64 / 2.0).sqrt() * energy_stream(seed).gaussian_at(index)
}

/// Draws the energy table of `(params.n, params.seed)` under the default budget.
pub fn sample_energies(params: &ModelParams) -> Result<EnergyTable> {
    sample_energies_with_budget(params, DEFAULT_TABLE_BUDGET_BYTES)
}

pub fn sample_energies_with_budget(params: &ModelParams, budget_bytes: u64) -> Result<EnergyTable> {
    params.validate()?;
    let needed = table_bytes(params.n);
    if needed > budget_bytes {
        return Err(ModelError::Capacity { n: params.n, needed, budget: budget_bytes });
    }
    let scale = (params.n as f64 / 2.0).sqrt();
    let stream = energy_stream(params.seed);
    let mut energies = vec![0.0; params.dim()];
    energies
        .par_chunks_mut(GENERATION_BLOCK)
        .enumerate()
        .for_each(|(block, chunk)| {
            stream.fill_gaussian((block * GENERATION_BLOCK) as u64, chunk);
            for e in chunk.iter_mut() {
                *e *= scale;
            }
        });
    Ok(EnergyTable { n: params.n, seed: params.seed, energies })
}

/// Argmin and min of the table, lowest index on ties.
pub fn ground_state_energy(table: &EnergyTable) -> (Configuration, f64) {
    let mut best = 0usize;
    for (i, &e) in table.energies.iter().enumerate().skip(1) {
        if e < table.energies[best] {
            best = i;
        }
    }
    (Configuration(best as u64), table.energies[best])
}

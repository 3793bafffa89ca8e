//! Leading perturbative corrections to the extensive levels, expanded around
//! zero field (classical levels) and around infinite field (paramagnet).

use super::{Result, TheoryError};

/// Intensive energy of a classical level `eps` after switching on the
/// field: `eps + gamma^2 / (n eps)`.
pub fn perturbed_energy_classical(eps: f64, gamma: f64, n: u32) -> Result<f64> {
    if eps == 0.0 || !eps.is_finite() {
        return Err(TheoryError::Singular("classical level with zero energy density"));
    }
    check_spins(n)?;
    Ok(eps + gamma * gamma / (n as f64 * eps))
}

/// Intensive ground-state energy of the paramagnet branch:
/// `-gamma - 1 / (2 n gamma)`.
pub fn perturbed_energy_quantum(gamma: f64, n: u32) -> Result<f64> {
    quantum_level(0, gamma, n)
}

/// Paramagnet level with `flips` spins anti-aligned with the field:
/// `-gamma + 2 gamma flips / n - 1 / (2 n gamma)`.
pub fn quantum_level(flips: u32, gamma: f64, n: u32) -> Result<f64> {
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(TheoryError::Singular("paramagnet expansion at zero field"));
    }
    check_spins(n)?;
    if flips > n {
        return Err(TheoryError::InvalidSpinCount(n));
    }
    let n = n as f64;
    Ok(-gamma + 2.0 * gamma * flips as f64 / n - 1.0 / (2.0 * n * gamma))
}

fn check_spins(n: u32) -> Result<()> {
    if n == 0 {
        return Err(TheoryError::InvalidSpinCount(n));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_branch() {
        assert_eq!(perturbed_energy_classical(-0.7, 0.0, 12).unwrap(), -0.7);
        let value = perturbed_energy_classical(-0.8326, 0.3, 20).unwrap();
        assert!((value - (-0.8326 + 0.09 / (20.0 * -0.8326))).abs() < 1e-15);
        assert!((value + 0.838_004_756_185).abs() < 1e-11);
        assert!(perturbed_energy_classical(0.0, 0.3, 20).is_err());
    }

    #[test]
    fn quantum_branch() {
        assert!((perturbed_energy_quantum(2.0, 20).unwrap() + 2.0125).abs() < 1e-15);
        for &g in &[10.0, 100.0, 1e4] {
            let shifted = perturbed_energy_quantum(g, 20).unwrap() + g;
            assert!((shifted + 1.0 / (40.0 * g)).abs() <= 1e-15 * g);
        }
        assert!(perturbed_energy_quantum(0.0, 20).is_err());
        assert!((quantum_level(1, 2.0, 20).unwrap() - (-2.0 + 0.2 - 0.0125)).abs() < 1e-15);
    }

    #[test]
    fn branches_meet_at_the_transition_to_order_one_over_n() {
        let e0 = -std::f64::consts::LN_2.sqrt();
        let gamma = -e0;
        for n in [8u32, 12, 16, 20, 24] {
            let diff = perturbed_energy_classical(e0, gamma, n).unwrap() - perturbed_energy_quantum(gamma, n).unwrap();
            assert!(diff.abs() <= 3.0 / n as f64);
        }
    }
}

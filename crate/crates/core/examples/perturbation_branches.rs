//! Level fan of one sample against the perturbative branches: classical
//! levels `eps + gamma^2/(n eps)` at weak field and the paramagnet ladder
//! `-gamma + 2 gamma m/n - 1/(2 n gamma)` at strong field, whose one-flip
//! level is n-fold degenerate up to disorder splitting.
//!
//! cargo run --release --example perturbation_branches -- 12 0

use qrem::model::{sample_energies, ModelParams};
use qrem::spectral::{lowest_eigenpairs, HamiltonianView};
use qrem::theory::{perturbed_energy_classical, perturbed_energy_quantum, quantum_level};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().map_or(12, |a| a.parse().expect("n"));
    let seed: u64 = args.next().map_or(0, |a| a.parse().expect("seed"));
    let table = sample_energies(&ModelParams::new(n, seed, 0.0).unwrap()).unwrap();
    let nf = n as f64;
    let eps0 = table.ground_state().1 / nf;
    println!("gamma   lambda0/n   classical   quantum    lambda1/n   lambda_n/n  one-flip paramagnet");
    for gamma in [0.1, 0.2, 0.3, 0.5, 0.8, 1.2, 1.6, 2.0, 3.0] {
        let h = HamiltonianView::new(&table, gamma).unwrap();
        let r = lowest_eigenpairs(&h, n as usize + 1, 1e-10).unwrap();
        println!(
            "{gamma:.2}   {:+.6}   {:+.6}   {:+.6}   {:+.6}   {:+.6}   {:+.6}",
            r.eigenvalues[0] / nf,
            perturbed_energy_classical(eps0, gamma, n).unwrap(),
            perturbed_energy_quantum(gamma, n).unwrap(),
            r.eigenvalues[1] / nf,
            r.eigenvalues[n as usize] / nf,
            quantum_level(1, gamma, n).unwrap(),
        );
    }
    println!("the two branches cross near gamma = |E0|/n = {:.4}", -eps0);
}

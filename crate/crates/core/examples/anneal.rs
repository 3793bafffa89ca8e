//! Linear-schedule annealing of one sample over a geometric ladder of
//! total times; the time to reach success 1/2 is compared with `1/gap^2`.
//!
//! cargo run --release --example anneal -- 8 2

use qrem::dynamics::{evolve, success_curve, Schedule, StepControl};
use qrem::model::{sample_energies, ModelParams};
use qrem::sweep::{find_min_gap, MinGapConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().map_or(8, |a| a.parse().expect("n"));
    let seed: u64 = args.next().map_or(2, |a| a.parse().expect("seed"));
    let table = sample_energies(&ModelParams::new(n, seed, 0.0).unwrap()).unwrap();
    let record = find_min_gap(&table, &MinGapConfig::default()).unwrap();
    println!("n = {n}, seed = {seed}: min gap {:.4} at gamma {:.4}, 1/gap^2 = {:.1}", record.min_gap, record.gamma_star, record.tau_estimate);

    let taus: Vec<f64> = (0..=11).map(|i| 10f64.powf(0.25 * i as f64)).collect();
    let control = StepControl::default();
    let curve = success_curve(&table, &taus, Schedule::linear, &control).unwrap();
    for o in &curve.outcomes {
        println!("tau {:>8.2}  success {:.6}  steps {:>6}  norm error {:.1e}", o.tau, o.success_probability, o.steps, o.norm_error);
    }
    println!("monotone: {}, tau_1/2 = {:?}", curve.is_monotone(), curve.tau_half);

    // A sudden quench leaves the paramagnet state in place, so success is
    // its overlap with the classical ground configuration, 2^-n here.
    let quench = evolve(&table, &Schedule::linear(1e-9).unwrap(), &control).unwrap();
    println!("sudden quench: success {:.3e}, initial overlap {:.3e}", quench.success_probability, quench.initial_success);
}

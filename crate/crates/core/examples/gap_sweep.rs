//! Gap curve of one sample on a field grid, written as CSV to stdout.
//!
//! cargo run --release --example gap_sweep -- 10 4 > curve.csv

use qrem::model::{sample_energies, ModelParams};
use qrem::sweep::{gap_sweep, SweepConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().map_or(10, |a| a.parse().expect("n"));
    let seed: u64 = args.next().map_or(4, |a| a.parse().expect("seed"));

    let table = sample_energies(&ModelParams::new(n, seed, 0.0).unwrap()).unwrap();
    let curve = gap_sweep(&table, &SweepConfig::new(0.0, 2.0, 81).k(4)).unwrap();
    let low = curve.min_point().unwrap();
    eprintln!(
        "smallest grid gap {:.5} at gamma = {:.4}; E0/n = {:.4}; Lipschitz {}",
        low.gap,
        low.gamma,
        table.ground_state().1 / n as f64,
        if curve.is_lipschitz() { "ok" } else { "VIOLATED" }
    );
    curve.write_csv(&[format!("n = {n}, seed = {seed}")], std::io::stdout().lock()).unwrap();
}

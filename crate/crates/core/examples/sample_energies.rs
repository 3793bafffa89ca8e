//! Draws one disorder sample, checks its statistics and round-trips it
//! through the binary table format.
//!
//! cargo run --release --example sample_energies -- 16 7

use qrem::model::{energy_at, sample_energies, EnergyTable, ModelParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().map_or(16, |a| a.parse().expect("n"));
    let seed: u64 = args.next().map_or(7, |a| a.parse().expect("seed"));

    let table = sample_energies(&ModelParams::new(n, seed, 0.0).unwrap()).unwrap();
    let e = table.energies();
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / e.len() as f64;
    let (ground, e0) = table.ground_state();
    println!("n = {n}, seed = {seed}, 2^n = {}", table.len());
    println!("mean {mean:+.4}   variance {var:.4} (n/2 = {})", n as f64 / 2.0);
    println!("ground configuration {:0width$b}, E0 = {e0:.6}, E0/n = {:.4}", ground.index(), e0 / n as f64, width = n as usize);

    // Any single energy can be regenerated without the table.
    assert_eq!(energy_at(n, seed, ground.index()), e0);

    let mut bytes = Vec::new();
    table.write_binary(&mut bytes).unwrap();
    let back = EnergyTable::read_binary(bytes.as_slice()).unwrap();
    assert_eq!(back.energies(), table.energies());
    println!("binary table: {} bytes, re-read bit-exactly", bytes.len());
}

//! Lowest eigenvalues of one sample at one field, matrix-free, compared
//! with dense diagonalisation when the size allows it.
//!
//! cargo run --release --example spectrum -- 12 3 0.7

use qrem::model::{sample_energies, ModelParams};
use qrem::spectral::{dense_spectrum, lowest_eigenpairs, HamiltonianView};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().map_or(12, |a| a.parse().expect("n"));
    let seed: u64 = args.next().map_or(3, |a| a.parse().expect("seed"));
    let gamma: f64 = args.next().map_or(0.7, |a| a.parse().expect("gamma"));

    let table = sample_energies(&ModelParams::new(n, seed, 0.0).unwrap()).unwrap();
    let h = HamiltonianView::new(&table, gamma).unwrap();
    let start = std::time::Instant::now();
    let result = lowest_eigenpairs(&h, 6, 1e-10).unwrap();
    println!(
        "n = {n}, gamma = {gamma}: {} mat-vecs, {} restarts, {:.2?}",
        result.iterations,
        result.restarts,
        start.elapsed()
    );
    let dense = (n <= 12).then(|| dense_spectrum(&h).unwrap());
    for (i, (v, r)) in result.eigenvalues.iter().zip(&result.residual_norms).enumerate() {
        match &dense {
            Some(d) => println!("  lambda{i} = {v:+.12}  residual {r:.1e}  dense diff {:.1e}", (v - d[i]).abs()),
            None => println!("  lambda{i} = {v:+.12}  residual {r:.1e}"),
        }
    }
    println!("variational bounds: lambda0 <= min E = {:.6}, lambda0 <= -gamma n = {:.6}", table.ground_state().1, -gamma * n as f64);
}

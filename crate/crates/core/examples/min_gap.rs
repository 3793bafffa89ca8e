//! Minimal gap of the transition for a few samples, against the
//! two-level prediction `2 |E0| 2^{-n/2}` at `gamma = |E0| / n`.
//!
//! cargo run --release --example min_gap -- 12 10

use qrem::model::{sample_energies, ModelParams};
use qrem::sweep::{find_min_gap, gap_closing_width, MinGapConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().map_or(12, |a| a.parse().expect("n"));
    let seeds: u64 = args.next().map_or(10, |a| a.parse().expect("seed count"));

    let config = MinGapConfig::default();
    println!("seed  gamma*    |E0|/n    min gap    predicted  ratio  width(2x)");
    for seed in 0..seeds {
        let table = sample_energies(&ModelParams::new(n, seed, 0.0).unwrap()).unwrap();
        let r = find_min_gap(&table, &config).unwrap();
        let width = gap_closing_width(&table, &r, 2.0, &config).unwrap();
        println!(
            "{seed:>4}  {:.5}  {:.5}  {:.3e}  {:.3e}  {:.3}  {:.4}{}",
            r.gamma_star,
            r.predicted_gamma,
            r.min_gap,
            r.prediction,
            r.ratio(),
            width.width,
            if r.edge_limited { "  (edge)" } else { "" }
        );
    }
}

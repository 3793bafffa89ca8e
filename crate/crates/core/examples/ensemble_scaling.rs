//! Median minimal gap over an ensemble at several sizes and the fitted
//! exponential rate, next to `-(ln 2)/2`.
//!
//! cargo run --release --example ensemble_scaling -- 20 8 10 12 14

use qrem::sweep::{ensemble_run, fit_log_gap_slope, EnsembleConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map_or(20, |a| a.parse().expect("seed count"));
    let mut sizes: Vec<u32> = args.map(|a| a.parse().expect("size")).collect();
    if sizes.is_empty() {
        sizes = vec![8, 10, 12, 14];
    }
    let seed_list: Vec<u64> = (0..seeds).collect();
    let config = EnsembleConfig::default();
    let mut summaries = Vec::new();
    for &n in &sizes {
        let start = std::time::Instant::now();
        let s = ensemble_run(n, &seed_list, &config).unwrap();
        println!(
            "n = {n:>2}: median gap {:.4e}, median ratio {:.3}, max/min {:.2}, located within 10%: {:.0}%  ({:.1?})",
            s.median_gap,
            s.median_ratio,
            s.dispersion(),
            100.0 * s.location_fraction(0.1),
            start.elapsed()
        );
        for f in &s.failures {
            println!("   seed {} failed: {}", f.seed, f.error);
        }
        summaries.push(s);
    }
    let fit = fit_log_gap_slope(&summaries).unwrap();
    println!("d ln(median gap) / dn = {:.4}   (-(ln 2)/2 = {:.4})", fit.slope, -0.5 * std::f64::consts::LN_2);
}

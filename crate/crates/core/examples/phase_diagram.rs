//! Mean-field phase diagram in the (T, gamma) plane, printed as a coarse
//! character map: `F` frozen, `U` unfrozen classical, `.` paramagnet.
//!
//! cargo run --release --example phase_diagram

use qrem::numeric::Grid;
use qrem::theory::{critical_temperature, phase_diagram, transition_gamma, Phase};

fn main() {
    let grid = phase_diagram(&Grid::new(0.0, 1.2, 25).unwrap(), &Grid::new(0.0, 1.6, 64).unwrap()).unwrap();
    // Highest temperature on top.
    for t in (0..grid.temperatures.len()).rev() {
        let row: String = (0..grid.gammas.len())
            .map(|g| match grid.at(t, g).phase {
                Phase::FrozenClassical => 'F',
                Phase::UnfrozenClassical => 'U',
                Phase::QuantumParamagnet => '.',
            })
            .collect();
        println!("T = {:.2} |{row}", grid.temperatures[t]);
    }
    println!("           gamma 0 .. 1.6");
    println!("T_c = {:.6}, gamma_c(0) = {:.10}, sqrt(ln 2) = {:.10}", critical_temperature(), transition_gamma(0.0).unwrap(), std::f64::consts::LN_2.sqrt());
    for t in [0.2, 0.6, 1.0] {
        println!("gamma_c({t}) = {:.6}", transition_gamma(t).unwrap());
    }
}

pub mod cli;
pub mod dynamics;
pub mod model;
pub mod numeric;
pub mod rng;
pub mod spectral;
pub mod sweep;
pub mod theory;

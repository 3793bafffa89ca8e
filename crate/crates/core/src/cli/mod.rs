//! Command-line front end: every pipeline as a subcommand, driven by flags
//! or a config file, with versioned machine-readable artifacts.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
//! 3 capacity limit, 4 numerical failure.

mod config;
mod output;
mod run;

use std::ffi::OsString;
use std::fmt::Display;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

pub use config::{Command, Format, PartialConfig, RunConfig};
pub use output::{read_artifact, read_header, Artifact, Header, SCHEMA_VERSION, TOOL_NAME};
pub use run::run;

use crate::dynamics::DynamicsError;
use crate::model::ModelError;
use crate::spectral::SpectralError;
use crate::sweep::SweepError;
use crate::theory::TheoryError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Capacity(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub(crate) fn io(context: impl Display, e: impl Display) -> Self {
        CliError::Io(format!("cli: {context}: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    Validation,
    Capacity,
    Numerical,
    Io,
}

/// Sorts a module error into an exit-code class.
pub(crate) trait Classify: Display {
    const MODULE: &'static str;
    fn kind(&self) -> Kind;

    /// `module (context): message`
    fn into_cli(self, context: &str) -> CliError
    where
        Self: Sized,
    {
        let msg = format!("{} ({context}): {self}", Self::MODULE);
        match self.kind() {
            Kind::Validation => CliError::Validation(msg),
            Kind::Capacity => CliError::Capacity(msg),
            Kind::Numerical => CliError::Numerical(msg),
            Kind::Io => CliError::Io(msg),
        }
    }
}

impl Classify for ModelError {
    const MODULE: &'static str = "model-core";
    fn kind(&self) -> Kind {
        match self {
            ModelError::Capacity { .. } => Kind::Capacity,
            ModelError::Io(_) => Kind::Io,
            _ => Kind::Validation,
        }
    }
}

impl Classify for SpectralError {
    const MODULE: &'static str = "spectral";
    fn kind(&self) -> Kind {
        match self {
            SpectralError::BasisCapacity { .. } | SpectralError::DenseTooLarge { .. } => Kind::Capacity,
            SpectralError::NotConverged(_) | SpectralError::DegenerateStart | SpectralError::Dense(_) => Kind::Numerical,
            SpectralError::Io(_) => Kind::Io,
            _ => Kind::Validation,
        }
    }
}

impl Classify for TheoryError {
    const MODULE: &'static str = "theory";
    fn kind(&self) -> Kind {
        match self {
            TheoryError::NoTransition { .. } | TheoryError::Singular(_) | TheoryError::NonPositiveGap(_) => Kind::Numerical,
            _ => Kind::Validation,
        }
    }
}

impl Classify for SweepError {
    const MODULE: &'static str = "sweep";
    fn kind(&self) -> Kind {
        match self {
            SweepError::InvalidRange { .. } | SweepError::TooFewSteps(_) | SweepError::EmptySeeds => Kind::Validation,
            SweepError::NonPositiveGap { .. } | SweepError::BracketFailure { .. } | SweepError::TooFewSizes => Kind::Numerical,
            SweepError::Spectral { source, .. } => source.kind(),
            SweepError::Model(e) => e.kind(),
            SweepError::Theory(e) => e.kind(),
            SweepError::Io(_) => Kind::Io,
        }
    }
}

impl Classify for DynamicsError {
    const MODULE: &'static str = "dynamics";
    fn kind(&self) -> Kind {
        match self {
            DynamicsError::TooManySpins(_) => Kind::Capacity,
            DynamicsError::Preparation(e) => e.kind(),
            DynamicsError::StepRejected { .. } | DynamicsError::NormDrift { .. } => Kind::Numerical,
            _ => Kind::Validation,
        }
    }
}

/// `qrem <command> [flags]`
#[derive(Debug, Parser)]
#[command(name = "qrem", version, about = "Quantum random energy model: spectra, minimal gaps, annealing and phase diagram")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML or JSON config file; its values win over flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: PartialConfig,
}

impl Cli {
    /// Merged, validated configuration.
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let flags = PartialConfig { command: Some(self.command), ..self.flags };
        let merged = match &self.config {
            Some(path) => PartialConfig::from_file(path)?.over(flags),
            None => flags,
        };
        merged.resolve()
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
/// Errors are reported on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.resolve().and_then(|config| run(&config)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_class() {
        let capacity = ModelError::Capacity { n: 30, needed: 1 << 33, budget: 1 << 30 }.into_cli("n=30");
        assert_eq!(capacity.exit_code(), 3);
        assert!(capacity.to_string().starts_with("model-core (n=30)"));
        let nested = SweepError::Spectral { gamma: 0.5, source: SpectralError::DegenerateStart }.into_cli("seed=1");
        assert_eq!(nested.exit_code(), 4);
        assert_eq!(DynamicsError::TooManySpins(20).into_cli("").exit_code(), 3);
        assert_eq!(TheoryError::InvalidTemperature(-1.0).into_cli("").exit_code(), 2);
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from(["qrem", "min-gap", "--n", "12", "--seeds", "0..9"]).unwrap();
        let config = cli.resolve().unwrap();
        assert_eq!(config.command, Command::MinGap);
        assert_eq!(config.seeds.len(), 10);
        let cli = Cli::try_parse_from(["qrem", "theory", "--phase-diagram", "--t-grid", "0:1.2:60"]).unwrap();
        let config = cli.resolve().unwrap();
        assert!(config.phase_diagram);
        assert_eq!(config.format, Format::Csv);
        assert!(Cli::try_parse_from(["qrem", "sample", "--seed", "1", "--seeds", "2,3"]).is_err());
    }

    #[test]
    fn invalid_n_exits_with_two() {
        assert_eq!(main_with_args(["qrem", "sample", "--n", "0"]), 2);
    }
}

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};

use super::CliError;
use crate::dynamics::Profile;
use crate::numeric::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sample,
    Spectrum,
    Sweep,
    MinGap,
    Ensemble,
    Anneal,
    Theory,
    PhaseDiagram,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::MinGap => "min-gap",
            Command::Ensemble => "ensemble",
            Command::Anneal => "anneal",
            Command::Theory => "theory",
            Command::PhaseDiagram => "phase-diagram",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Jsonl,
    Csv,
    Binary,
}

/// Effective configuration of one run. Embedded in every artifact header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub n: Option<u32>,
    /// Several sizes for `ensemble`, fitted together.
    pub sizes: Option<Vec<u32>>,
    pub seeds: Vec<u64>,
    pub gamma: Option<f64>,
    pub gamma_grid: Option<Grid>,
    pub k: usize,
    pub tol: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub keep_going: bool,
    pub bracket: Option<(f64, f64)>,
    pub gamma_tol: f64,
    pub taus: Option<Vec<f64>>,
    pub gamma_max: Option<f64>,
    pub profile: Profile,
    pub dt_control: f64,
    pub temperature: Option<f64>,
    pub t_grid: Option<Grid>,
    pub phase_diagram: bool,
}

/// Alias so clap takes a whole list from one `--seeds` value.
pub type SeedList = Vec<u64>;

/// Configuration as given by one source; unset fields defer to the other
/// source or to the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct PartialConfig {
    #[arg(skip)]
    #[serde(default)]
    pub command: Option<Command>,
    /// Number of spins.
    #[arg(long)]
    #[serde(default)]
    pub n: Option<u32>,
    /// Comma-separated sizes for `ensemble`.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub sizes: Option<Vec<u32>>,
    /// Single disorder seed.
    #[arg(long, conflicts_with = "seeds")]
    #[serde(default)]
    pub seed: Option<u64>,
    /// Seed list `a,b,c` or inclusive range `a..b`.
    #[arg(long, value_parser = parse_seeds)]
    #[serde(default, deserialize_with = "seeds_from_file")]
    pub seeds: Option<SeedList>,
    #[arg(long)]
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Field grid `start:end:count`.
    #[arg(long)]
    #[serde(default, deserialize_with = "grid_from_file")]
    pub gamma_grid: Option<Grid>,
    #[arg(long)]
    #[serde(default)]
    pub k: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub tol: Option<f64>,
    #[arg(long, short)]
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(default)]
    pub format: Option<Format>,
    #[arg(long)]
    #[serde(default)]
    pub threads: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default)]
    pub keep_going: Option<bool>,
    /// Minimum-gap search interval `lo:hi`.
    #[arg(long, value_parser = parse_bracket)]
    #[serde(default)]
    pub bracket: Option<(f64, f64)>,
    #[arg(long)]
    #[serde(default)]
    pub gamma_tol: Option<f64>,
    /// Comma-separated annealing times.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub taus: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(default)]
    pub gamma_max: Option<f64>,
    #[arg(long, value_parser = parse_profile)]
    #[serde(default)]
    pub profile: Option<Profile>,
    #[arg(long)]
    #[serde(default)]
    pub dt_control: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub temperature: Option<f64>,
    /// Temperature grid `start:end:count`.
    #[arg(long)]
    #[serde(default, deserialize_with = "grid_from_file")]
    pub t_grid: Option<Grid>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default)]
    pub phase_diagram: Option<bool>,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("bad seed range `{s}`: {e}"))?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|e| format!("bad seed range `{s}`: {e}"))?;
        if b < a {
            return Err(format!("empty seed range `{s}`"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|p| p.trim().parse::<u64>().map_err(|e| format!("bad seed `{p}`: {e}"))).collect()
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let a = a.trim().parse().map_err(|e| format!("bad bracket `{s}`: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("bad bracket `{s}`: {e}"))?;
    Ok((a, b))
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    match s {
        "linear" => Ok(Profile::Linear),
        other => Err(format!("unknown schedule profile `{other}`")),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SeedsInFile {
    List(Vec<u64>),
    Text(String),
}

fn seeds_from_file<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<u64>>, D::Error> {
    match Option::<SeedsInFile>::deserialize(d)? {
        None => Ok(None),
        Some(SeedsInFile::List(v)) => Ok(Some(v)),
        Some(SeedsInFile::Text(s)) => parse_seeds(&s).map(Some).map_err(serde::de::Error::custom),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GridInFile {
    Struct(Grid),
    Text(String),
}

fn grid_from_file<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Grid>, D::Error> {
    match Option::<GridInFile>::deserialize(d)? {
        None => Ok(None),
        Some(GridInFile::Struct(g)) => Ok(Some(g)),
        Some(GridInFile::Text(s)) => s.parse().map(Some).map_err(serde::de::Error::custom),
    }
}

impl PartialConfig {
    /// Reads a JSON or TOML config file (by extension; TOML otherwise).
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cli: cannot read config {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if is_json {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Validation(format!("cli: invalid config {}: {e}", path.display())))
    }

    /// Field-wise merge in which `self` wins.
    pub fn over(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            command: self.command.or(other.command),
            n: self.n.or(other.n),
            sizes: self.sizes.or(other.sizes),
            // A seed set in either form counts as one setting.
            seed: if self.seeds.is_some() { None } else { self.seed.or(other.seed) },
            seeds: if self.seed.is_some() { None } else { self.seeds.or(other.seeds) },
            gamma: self.gamma.or(other.gamma),
            gamma_grid: self.gamma_grid.or(other.gamma_grid),
            k: self.k.or(other.k),
            tol: self.tol.or(other.tol),
            output: self.output.or(other.output),
            format: self.format.or(other.format),
            threads: self.threads.or(other.threads),
            keep_going: self.keep_going.or(other.keep_going),
            bracket: self.bracket.or(other.bracket),
            gamma_tol: self.gamma_tol.or(other.gamma_tol),
            taus: self.taus.or(other.taus),
            gamma_max: self.gamma_max.or(other.gamma_max),
            profile: self.profile.or(other.profile),
            dt_control: self.dt_control.or(other.dt_control),
            temperature: self.temperature.or(other.temperature),
            t_grid: self.t_grid.or(other.t_grid),
            phase_diagram: self.phase_diagram.or(other.phase_diagram),
        }
    }

    /// Fills defaults and checks ranges.
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let command = self.command.ok_or_else(|| CliError::Validation("cli: no subcommand given".into()))?;
        let seeds = match (self.seed, self.seeds) {
            (Some(s), _) => vec![s],
            (None, Some(list)) => list,
            (None, None) => vec![0],
        };
        let default_format = match command {
            Command::Sample => Format::Binary,
            Command::Sweep | Command::PhaseDiagram => Format::Csv,
            Command::MinGap => Format::Jsonl,
            Command::Theory if self.phase_diagram == Some(true) => Format::Csv,
            _ => Format::Json,
        };
        let config = RunConfig {
            command,
            n: self.n,
            sizes: self.sizes,
            seeds,
            gamma: self.gamma,
            gamma_grid: self.gamma_grid,
            k: self.k.unwrap_or(2),
            tol: self.tol.unwrap_or(crate::spectral::DEFAULT_TOL),
            output: self.output,
            format: self.format.unwrap_or(default_format),
            threads: self.threads,
            keep_going: self.keep_going.unwrap_or(false),
            bracket: self.bracket,
            gamma_tol: self.gamma_tol.unwrap_or(crate::sweep::DEFAULT_GAMMA_TOL),
            taus: self.taus,
            gamma_max: self.gamma_max,
            profile: self.profile.unwrap_or(Profile::Linear),
            dt_control: self.dt_control.unwrap_or(crate::dynamics::DEFAULT_DT_CONTROL),
            temperature: self.temperature,
            t_grid: self.t_grid,
            phase_diagram: self.phase_diagram.unwrap_or(false),
        };
        config.validate()?;
        Ok(config)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Validation(format!("cli ({}): {msg}", self.command.as_str())));
        let needs_n = !matches!(self.command, Command::Theory | Command::PhaseDiagram)
            && !(self.command == Command::Ensemble && self.sizes.is_some());
        if needs_n && self.n.is_none() {
            return bad("--n is required".into());
        }
        let mut sizes: Vec<u32> = self.n.into_iter().collect();
        sizes.extend(self.sizes.iter().flatten());
        for &n in &sizes {
            if n == 0 || n > crate::model::MAX_SPINS {
                return bad(format!("n = {n} outside 1..={}", crate::model::MAX_SPINS));
            }
        }
        if self.seeds.is_empty() {
            return bad("seed list is empty".into());
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("tol = {} must be positive", self.tol));
        }
        if !(self.gamma_tol.is_finite() && self.gamma_tol > 0.0) {
            return bad(format!("gamma-tol = {} must be positive", self.gamma_tol));
        }
        if !(self.dt_control.is_finite() && self.dt_control > 0.0) {
            return bad(format!("dt-control = {} must be positive", self.dt_control));
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        for g in [self.gamma, self.gamma_max, self.temperature].into_iter().flatten() {
            if !(g.is_finite() && g >= 0.0) {
                return bad(format!("field or temperature {g} must be finite and non-negative"));
            }
        }
        for grid in [self.gamma_grid, self.t_grid].into_iter().flatten() {
            if grid.validate().is_err() || grid.start < 0.0 {
                return bad(format!("grid {}:{}:{} is invalid", grid.start, grid.end, grid.count));
            }
        }
        if let Some((lo, hi)) = self.bracket {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
                return bad(format!("bracket {lo}:{hi} is invalid"));
            }
        }
        if let Some(taus) = &self.taus {
            if taus.is_empty() || taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) || taus.windows(2).any(|w| w[1] < w[0]) {
                return bad("taus must be positive and sorted".into());
            }
        }
        let allowed: &[Format] = match self.command {
            Command::Sample => &[Format::Binary, Format::Json, Format::Jsonl, Format::Csv],
            Command::Theory if self.phase_diagram => &[Format::Csv, Format::Json, Format::Jsonl],
            Command::PhaseDiagram => &[Format::Csv, Format::Json, Format::Jsonl],
            _ => &[Format::Json, Format::Jsonl, Format::Csv],
        };
        if !allowed.contains(&self.format) {
            return bad(format!("format {:?} is not available", self.format));
        }
        if self.format == Format::Binary && self.output.is_none() {
            return bad("binary output needs --output".into());
        }
        if self.format == Format::Binary && self.seeds.len() != 1 {
            return bad("binary output holds one table; give a single seed".into());
        }
        match self.command {
            Command::Spectrum if self.gamma.is_none() => bad("--gamma is required".into()),
            Command::Sweep if self.gamma_grid.is_none() => bad("--gamma-grid is required".into()),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seeds("0..9").unwrap(), (0..=9).collect::<Vec<_>>());
        assert_eq!(parse_seeds("3,1,4").unwrap(), vec![3, 1, 4]);
        assert!(parse_seeds("5..2").is_err());
    }

    #[test]
    fn file_wins_and_defaults_fill_in() {
        let flags = PartialConfig { command: Some(Command::MinGap), n: Some(12), seed: Some(4), tol: Some(1e-9), ..Default::default() };
        let file: PartialConfig = toml::from_str("n = 10\nseeds = \"0..2\"\ngamma_grid = \"0:1:3\"").unwrap();
        let config = file.over(flags).resolve().unwrap();
        assert_eq!(config.n, Some(10));
        assert_eq!(config.seeds, vec![0, 1, 2]);
        assert_eq!(config.tol, 1e-9);
        assert_eq!(config.format, Format::Jsonl);
        assert_eq!(config.gamma_grid, Some(Grid { start: 0.0, end: 1.0, count: 3 }));
    }

    #[test]
    fn json_config_and_unknown_fields() {
        let file: PartialConfig = serde_json::from_str(r#"{"n": 8, "seeds": [1, 2], "format": "csv"}"#).unwrap();
        assert_eq!(file.seeds, Some(vec![1, 2]));
        assert_eq!(file.format, Some(Format::Csv));
        assert!(serde_json::from_str::<PartialConfig>(r#"{"spins": 8}"#).is_err());
    }

    #[test]
    fn validation_messages() {
        let base = PartialConfig { command: Some(Command::MinGap), ..Default::default() };
        let err = PartialConfig { n: Some(0), ..base.clone() }.resolve().unwrap_err();
        assert!(matches!(&err, CliError::Validation(m) if m.contains("n = 0")));
        assert!(base.clone().resolve().is_err());
        let spectrum = PartialConfig { command: Some(Command::Spectrum), n: Some(4), ..Default::default() };
        assert!(spectrum.resolve().is_err());
        let theory = PartialConfig { command: Some(Command::Theory), ..Default::default() };
        assert_eq!(theory.resolve().unwrap().format, Format::Json);
    }

    #[test]
    fn round_trips_through_json() {
        let config = PartialConfig {
            command: Some(Command::Anneal),
            n: Some(8),
            taus: Some(vec![1.0, 10.0]),
            gamma_max: Some(2.5),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        let text = serde_json::to_string(&config).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), config);
    }
}

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Command, Format, RunConfig};
use super::output::{csv_document, emit, json_document, jsonl_document, sidecar_path, Header};
use super::{Classify, CliError};
use crate::dynamics::{self, Schedule, StepControl, SuccessCurve, MAX_DYNAMICS_SPINS};
use crate::model::{sample_energies, table_bytes, EnergyTable, ModelParams, DEFAULT_TABLE_BUDGET_BYTES};
use crate::numeric::Grid;
use crate::spectral::{lowest_eigenpairs, HamiltonianView, SpectrumResult};
use crate::sweep::{self, EnsembleSummary, LinearFit, MinGapConfig, MinGapRecord, SeedFailure, SweepConfig};
use crate::theory::{self, GapPrediction, PhaseGrid};

/// Default annealing times: `10^0, 10^0.5, ..., 10^3`.
const DEFAULT_TAUS: [f64; 7] = [1.0, 3.1622776601683795, 10.0, 31.622776601683793, 100.0, 316.22776601683796, 1000.0];
const DEFAULT_T_GRID: Grid = Grid { start: 0.0, end: 1.2, count: 60 };
const DEFAULT_GAMMA_GRID: Grid = Grid { start: 0.0, end: 1.6, count: 80 };

/// Runs one validated configuration and writes its artifact.
pub fn run(config: &RunConfig) -> Result<(), CliError> {
    config.validate()?;
    check_capacity(config)?;
    match config.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Validation(format!("cli: cannot build a pool of {threads} threads: {e}")))?;
            pool.install(|| dispatch(config))
        }
        None => dispatch(config),
    }
}

fn check_capacity(config: &RunConfig) -> Result<(), CliError> {
    let cmd = config.command.as_str();
    for &n in config.n.iter().chain(config.sizes.iter().flatten()) {
        if config.command == Command::Anneal && n > MAX_DYNAMICS_SPINS {
            return Err(CliError::Capacity(format!("dynamics ({cmd}): n = {n} exceeds the state-vector cap {MAX_DYNAMICS_SPINS}")));
        }
        let needed = table_bytes(n);
        if needed > DEFAULT_TABLE_BUDGET_BYTES {
            return Err(CliError::Capacity(format!(
                "model-core ({cmd}): n = {n} needs {needed} bytes per energy table, budget is {DEFAULT_TABLE_BUDGET_BYTES}"
            )));
        }
    }
    Ok(())
}

fn dispatch(config: &RunConfig) -> Result<(), CliError> {
    let header = Header::new(config);
    let bytes = match config.command {
        Command::Sample => return sample(config, &header),
        Command::Spectrum => spectrum(config, &header)?,
        Command::Sweep => sweep_curves(config, &header)?,
        Command::MinGap => min_gap(config, &header)?,
        Command::Ensemble => ensemble(config, &header)?,
        Command::Anneal => anneal(config, &header)?,
        Command::Theory if !config.phase_diagram => theory_report(config, &header)?,
        Command::Theory | Command::PhaseDiagram => phase(config, &header)?,
    };
    emit(config.output.as_deref(), &bytes)
}

fn context(config: &RunConfig, n: u32, seed: u64) -> String {
    format!("{} n={n} seed={seed}", config.command.as_str())
}

fn table(config: &RunConfig, n: u32, seed: u64) -> Result<EnergyTable, CliError> {
    let ctx = context(config, n, seed);
    let params = ModelParams::new(n, seed, 0.0).map_err(|e| e.into_cli(&ctx))?;
    sample_energies(&params).map_err(|e| e.into_cli(&ctx))
}

/// Runs `job` for every seed in parallel, in seed order. Without
/// `keep_going` the first failure (by seed order) ends the run; with it,
/// failures are reported on stderr and returned alongside the results.
fn per_seed<T, F>(config: &RunConfig, job: F) -> Result<(Vec<T>, Vec<SeedFailure>), CliError>
where
    T: Send,
    F: Fn(u64) -> Result<T, CliError> + Sync,
{
    let outcomes: Vec<(u64, Result<T, CliError>)> = config.seeds.par_iter().map(|&s| (s, job(s))).collect();
    let (mut done, mut failed) = (Vec::new(), Vec::new());
    for (seed, outcome) in outcomes {
        match outcome {
            Ok(v) => done.push(v),
            Err(e) if !config.keep_going => return Err(e),
            Err(e) => {
                eprintln!("warning: {e}");
                failed.push(SeedFailure { seed, error: e.to_string() });
            }
        }
    }
    Ok((done, failed))
}

#[derive(Serialize, Deserialize)]
struct WithFailures<T> {
    results: Vec<T>,
    failures: Vec<SeedFailure>,
}

/// json: results plus failures; jsonl: one result per line; csv: `row`
/// lines under `columns`.
fn tabulate<T: Serialize>(
    config: &RunConfig,
    header: &Header,
    results: Vec<T>,
    failures: Vec<SeedFailure>,
    columns: &str,
    row: impl Fn(&T, &mut String),
) -> Result<Vec<u8>, CliError> {
    match config.format {
        Format::Json => json_document(header, &WithFailures { results, failures }),
        Format::Jsonl => jsonl_document(header, &results),
        _ => {
            let mut body = String::new();
            for r in &results {
                row(r, &mut body);
            }
            csv_document(header, columns, body.as_bytes())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SampleData {
    n: u32,
    seed: u64,
    ground_index: u64,
    ground_energy: f64,
    energies: Vec<f64>,
}

fn sample(config: &RunConfig, header: &Header) -> Result<(), CliError> {
    let n = config.n.expect("validated");
    if config.format == Format::Binary {
        let seed = config.seeds[0];
        let t = table(config, n, seed)?;
        let mut bytes = Vec::with_capacity(t.len() * 8 + 32);
        t.write_binary(&mut bytes).map_err(|e| e.into_cli(&context(config, n, seed)))?;
        let path = config.output.as_deref().expect("validated");
        emit(Some(path), &bytes)?;
        return emit(Some(&sidecar_path(path)), &json_document(header, &serde_json::Value::Null)?);
    }
    let (results, failures) = per_seed(config, |seed| {
        let t = table(config, n, seed)?;
        let (ground, e0) = t.ground_state();
        Ok(SampleData { n, seed, ground_index: ground.index(), ground_energy: e0, energies: t.energies().to_vec() })
    })?;
    let bytes = tabulate(config, header, results, failures, "seed,index,energy", |s, out| {
        for (i, e) in s.energies.iter().enumerate() {
            let _ = writeln!(out, "{},{i},{e:?}", s.seed);
        }
    })?;
    emit(config.output.as_deref(), &bytes)
}

#[derive(Serialize, Deserialize)]
struct SpectrumRecord {
    n: u32,
    seed: u64,
    gamma: f64,
    result: SpectrumResult,
}

fn spectrum(config: &RunConfig, header: &Header) -> Result<Vec<u8>, CliError> {
    let (n, gamma) = (config.n.expect("validated"), config.gamma.expect("validated"));
    let (results, failures) = per_seed(config, |seed| {
        let t = table(config, n, seed)?;
        let ctx = format!("{} gamma={gamma}", context(config, n, seed));
        let h = HamiltonianView::new(&t, gamma).map_err(|e| e.into_cli(&ctx))?;
        let result = lowest_eigenpairs(&h, config.k, config.tol).map_err(|e| e.into_cli(&ctx))?;
        Ok(SpectrumRecord { n, seed, gamma, result })
    })?;
    tabulate(config, header, results, failures, "seed,gamma,index,eigenvalue,residual", |r, out| {
        for (i, (v, res)) in r.result.eigenvalues.iter().zip(&r.result.residual_norms).enumerate() {
            let _ = writeln!(out, "{},{:?},{i},{v:?},{res:e}", r.seed, r.gamma);
        }
    })
}

fn sweep_curves(config: &RunConfig, header: &Header) -> Result<Vec<u8>, CliError> {
    let n = config.n.expect("validated");
    let grid = config.gamma_grid.expect("validated");
    let sweep_config = SweepConfig::new(grid.start, grid.end, grid.count).k(config.k).tol(config.tol);
    let (results, failures) = per_seed(config, |seed| {
        let t = table(config, n, seed)?;
        sweep::gap_sweep(&t, &sweep_config).map_err(|e| e.into_cli(&context(config, n, seed)))
    })?;
    tabulate(config, header, results, failures, &sweep::GapCurve::csv_header(config.k), |c, out| {
        let mut buf = Vec::new();
        let _ = c.write_csv_rows(&mut buf);
        out.push_str(&String::from_utf8_lossy(&buf));
    })
}

fn min_gap_config(config: &RunConfig) -> MinGapConfig {
    MinGapConfig { bracket: config.bracket, gamma_tol: config.gamma_tol, tol: config.tol, ..MinGapConfig::default() }
}

const MIN_GAP_COLUMNS: &str = "n,seed,gamma_star,min_gap,e_classical,ground_index,prediction,predicted_gamma,tau_estimate,edge_limited,expansions,evaluations";

fn min_gap_row(r: &MinGapRecord, out: &mut String) {
    let _ = writeln!(
        out,
        "{},{},{:?},{:?},{:?},{},{:?},{:?},{:?},{},{},{}",
        r.n, r.seed, r.gamma_star, r.min_gap, r.e_classical, r.ground_index, r.prediction, r.predicted_gamma, r.tau_estimate,
        r.edge_limited, r.expansions, r.evaluations
    );
}

fn min_gap_records(config: &RunConfig, n: u32) -> Result<(Vec<MinGapRecord>, Vec<SeedFailure>), CliError> {
    let search = min_gap_config(config);
    per_seed(config, |seed| {
        let t = table(config, n, seed)?;
        sweep::find_min_gap(&t, &search).map_err(|e| e.into_cli(&context(config, n, seed)))
    })
}

fn min_gap(config: &RunConfig, header: &Header) -> Result<Vec<u8>, CliError> {
    let (results, failures) = min_gap_records(config, config.n.expect("validated"))?;
    tabulate(config, header, results, failures, MIN_GAP_COLUMNS, min_gap_row)
}

#[derive(Serialize, Deserialize)]
struct EnsembleData {
    summaries: Vec<EnsembleSummary>,
    fit: Option<LinearFit>,
}

fn ensemble(config: &RunConfig, header: &Header) -> Result<Vec<u8>, CliError> {
    let mut sizes: Vec<u32> = config.n.into_iter().chain(config.sizes.iter().flatten().copied()).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut summaries = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let (records, failures) = min_gap_records(config, n)?;
        summaries.push(EnsembleSummary::from_records(n, config.seeds.clone(), records, failures));
    }
    let fit = if sizes.len() >= 2 {
        Some(sweep::fit_log_gap_slope(&summaries).map_err(|e| e.into_cli(config.command.as_str()))?)
    } else {
        None
    };
    match config.format {
        Format::Json => json_document(header, &EnsembleData { summaries, fit }),
        Format::Jsonl => jsonl_document(header, &summaries),
        _ => {
            let mut body = String::new();
            if let Some(f) = &fit {
                let _ = writeln!(body, "# fit ln(median gap) = {:?} n + {:?} over {} sizes", f.slope, f.intercept, f.points);
            }
            for s in &summaries {
                let _ = writeln!(
                    body,
                    "{},{},{},{:?},{:?},{:?},{:?},{:?},{:?}",
                    s.n, s.records.len(), s.failures.len(), s.median_gap, s.mean_gap, s.min_gap, s.max_gap, s.median_ratio, s.mean_ratio
                );
            }
            csv_document(header, "n,records,failures,median_gap,mean_gap,min_gap,max_gap,median_ratio,mean_ratio", body.as_bytes())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct AnnealRecord {
    n: u32,
    seed: u64,
    gamma_max: f64,
    curve: SuccessCurve,
}

fn anneal(config: &RunConfig, header: &Header) -> Result<Vec<u8>, CliError> {
    let n = config.n.expect("validated");
    let taus = config.taus.clone().unwrap_or_else(|| DEFAULT_TAUS.to_vec());
    let gamma_max = config.gamma_max.unwrap_or_else(dynamics::default_gamma_max);
    let control = StepControl { dt_control: config.dt_control, ..StepControl::default() };
    let (results, failures) = per_seed(config, |seed| {
        let t = table(config, n, seed)?;
        let family = |tau: f64| Schedule::new(tau, gamma_max, config.profile);
        let curve = dynamics::success_curve(&t, &taus, family, &control).map_err(|e| e.into_cli(&context(config, n, seed)))?;
        Ok(AnnealRecord { n, seed, gamma_max, curve })
    })?;
    tabulate(
        config,
        header,
        results,
        failures,
        "seed,tau,success_probability,initial_success,norm_error,steps,rejected_steps,error_bound",
        |r, out| {
            for o in &r.curve.outcomes {
                let _ = writeln!(
                    out,
                    "{},{:?},{:?},{:?},{:e},{},{},{:e}",
                    r.seed, o.tau, o.success_probability, o.initial_success, o.norm_error, o.steps, o.rejected_steps, o.error_bound
                );
            }
        },
    )
}

#[derive(Serialize, Deserialize)]
struct TheoryReport {
    critical_temperature: f64,
    ground_energy_density: f64,
    transition_gamma_zero: f64,
    /// Present when a temperature is given.
    transition_gamma: Option<f64>,
    free_energy_rem: Option<f64>,
    samples: Vec<SamplePrediction>,
}

#[derive(Serialize, Deserialize)]
struct SamplePrediction {
    n: u32,
    seed: u64,
    e_classical: f64,
    ground_index: u64,
    prediction: GapPrediction,
    tau_estimate: f64,
    /// Intensive perturbative levels at `--gamma`, when given.
    classical_branch: Option<f64>,
    quantum_branch: Option<f64>,
}

fn theory_report(config: &RunConfig, header: &Header) -> Result<Vec<u8>, CliError> {
    let cmd = config.command.as_str();
    let transition_gamma_zero = theory::transition_gamma(0.0).map_err(|e| e.into_cli(cmd))?;
    let transition_gamma = config.temperature.map(theory::transition_gamma).transpose().map_err(|e| e.into_cli(cmd))?;
    let (samples, failures) = match config.n {
        Some(n) => per_seed(config, |seed| {
            let ctx = context(config, n, seed);
            let t = table(config, n, seed)?;
            let (ground, e0) = t.ground_state();
            let prediction = theory::min_gap_prediction(e0, n).map_err(|e| e.into_cli(&ctx))?;
            let tau_estimate = theory::annealing_time_estimate(prediction.min_gap).map_err(|e| e.into_cli(&ctx))?;
            let branches = config
                .gamma
                .map(|g| -> Result<(f64, f64), CliError> {
                    let classical = theory::perturbed_energy_classical(e0 / n as f64, g, n).map_err(|e| e.into_cli(&ctx))?;
                    let quantum = theory::perturbed_energy_quantum(g, n).map_err(|e| e.into_cli(&ctx))?;
                    Ok((classical, quantum))
                })
                .transpose()?;
            Ok(SamplePrediction {
                n,
                seed,
                e_classical: e0,
                ground_index: ground.index(),
                prediction,
                tau_estimate,
                classical_branch: branches.map(|b| b.0),
                quantum_branch: branches.map(|b| b.1),
            })
        })?,
        None => (Vec::new(), Vec::new()),
    };
    let report = TheoryReport {
        critical_temperature: theory::critical_temperature(),
        ground_energy_density: theory::ground_energy_density(),
        transition_gamma_zero,
        transition_gamma,
        free_energy_rem: config.temperature.map(theory::free_energy_rem),
        samples,
    };
    match config.format {
        Format::Json => json_document(header, &WithFailures { results: vec![report], failures }),
        Format::Jsonl => jsonl_document(header, &[report]),
        _ => {
            let mut body = String::new();
            let _ = writeln!(body, "critical_temperature,{:?}", report.critical_temperature);
            let _ = writeln!(body, "ground_energy_density,{:?}", report.ground_energy_density);
            let _ = writeln!(body, "transition_gamma_zero,{:?}", report.transition_gamma_zero);
            if let (Some(t), Some(g)) = (config.temperature, report.transition_gamma) {
                let _ = writeln!(body, "transition_gamma_at_{t},{g:?}");
            }
            for s in &report.samples {
                let _ = writeln!(body, "min_gap_prediction_seed_{},{:?}", s.seed, s.prediction.min_gap);
            }
            csv_document(header, "quantity,value", body.as_bytes())
        }
    }
}

fn phase(config: &RunConfig, header: &Header) -> Result<Vec<u8>, CliError> {
    let temperatures = config.t_grid.unwrap_or(DEFAULT_T_GRID);
    let gammas = config.gamma_grid.unwrap_or(DEFAULT_GAMMA_GRID);
    let grid: PhaseGrid = theory::phase_diagram(&temperatures, &gammas).map_err(|e| e.into_cli(config.command.as_str()))?;
    match config.format {
        Format::Json => json_document(header, &grid),
        Format::Jsonl => jsonl_document(header, &grid.points),
        _ => {
            let mut body = String::new();
            for p in &grid.points {
                let _ = writeln!(body, "{:?},{:?},{},{:?}", p.temperature, p.gamma, p.phase.as_str(), p.free_energy_density);
            }
            csv_document(header, "temperature,gamma,phase,free_energy_density", body.as_bytes())
        }
    }
}

use std::path::Path;
use std::process::{Command, Output};

use clap::Parser;
use qrem::cli::{read_artifact, Cli, Format, RunConfig};
use qrem::model::EnergyTable;
use qrem::theory::Phase;

fn qrem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrem")).args(args).output().expect("spawn qrem")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Everything after the header line.
fn payload(text: &str) -> &str {
    text.split_once('\n').unwrap().1
}

#[test]
fn invalid_spin_count_is_a_validation_error() {
    let out = qrem(&["sample", "--n", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("n = 0"), "{err}");
    assert_eq!(qrem(&["spectrum", "--n", "6"]).status.code(), Some(2));
    assert_eq!(qrem(&["sweep", "--n", "6", "--gamma-grid", "1:0:3"]).status.code(), Some(2));
    assert_eq!(qrem(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn capacity_and_numerical_exit_codes() {
    let out = qrem(&["anneal", "--n", "20"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dynamics"));
    assert_eq!(qrem(&["sample", "--n", "30", "--format", "json"]).status.code(), Some(3));
    // No passage to the paramagnet inside any expanded bracket.
    let out = qrem(&["min-gap", "--n", "8", "--seeds", "0,1", "--bracket", "5:6"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep (min-gap n=8 seed=0)"));
    let kept = qrem(&["min-gap", "--n", "8", "--seeds", "0,1", "--bracket", "5:6", "--keep-going"]);
    let text = stdout(&kept);
    assert_eq!(read_artifact(&text).unwrap().records.len(), 0);
}

#[test]
fn min_gap_records_for_ten_seeds() {
    let text = stdout(&qrem(&["min-gap", "--n", "12", "--seeds", "0..9"]));
    let artifact = read_artifact(&text).unwrap();
    assert_eq!(artifact.format, Format::Jsonl);
    assert_eq!(artifact.records.len(), 10);
    for (seed, r) in artifact.records.iter().enumerate() {
        assert_eq!(r["seed"], seed as u64);
        assert_eq!(r["n"], 12);
        let gap = r["min_gap"].as_f64().unwrap();
        let prediction = r["prediction"].as_f64().unwrap();
        assert!(gap > 0.0 && gap <= r["bracket_gaps"][0].as_f64().unwrap().max(r["bracket_gaps"][1].as_f64().unwrap()));
        assert!(prediction > 0.0);
    }
    let flags = Cli::parse_from(["qrem", "min-gap", "--n", "12", "--seeds", "0..9"]).resolve().unwrap();
    assert_eq!(artifact.header.config, flags);
}

#[test]
fn phase_diagram_csv_has_one_boundary_per_row() {
    let text = stdout(&qrem(&["theory", "--phase-diagram", "--t-grid", "0:1.2:60", "--gamma-grid", "0:1.6:80"]));
    let artifact = read_artifact(&text).unwrap();
    assert_eq!(artifact.columns, vec!["temperature", "gamma", "phase", "free_energy_density"]);
    assert_eq!(artifact.rows.len(), 60 * 80);
    let classical = |label: &str| label != "quantum-paramagnet";
    for row in artifact.rows.chunks(80) {
        let switches = row.windows(2).filter(|w| classical(&w[0][2]) != classical(&w[1][2])).count();
        assert_eq!(switches, 1);
        assert!(classical(&row[0][2]) && !classical(&row[79][2]));
    }
    // Frozen classical phase at the lowest temperature, unfrozen at the top.
    assert_eq!(artifact.rows[0][2], serde_json::to_value(Phase::FrozenClassical).unwrap().as_str().unwrap());
    assert_eq!(artifact.rows[59 * 80][2], "unfrozen-classical");
    let same = stdout(&qrem(&["phase-diagram", "--t-grid", "0:1.2:60", "--gamma-grid", "0:1.6:80"]));
    assert_eq!(payload(&same), payload(&text));
}

#[test]
fn payload_does_not_depend_on_thread_count() {
    let args = ["min-gap", "--n", "10", "--seeds", "0..5"];
    let one = stdout(&qrem(&[&args[..], &["--threads", "1"]].concat()));
    let four = stdout(&qrem(&[&args[..], &["--threads", "4"]].concat()));
    assert_eq!(payload(&one), payload(&four));
    let one = stdout(&qrem(&["sweep", "--n", "9", "--seeds", "1,2", "--gamma-grid", "0:1.5:7", "--threads", "1"]));
    let three = stdout(&qrem(&["sweep", "--n", "9", "--seeds", "1,2", "--gamma-grid", "0:1.5:7", "--threads", "3"]));
    assert_eq!(payload(&one), payload(&three));
}

#[test]
fn every_artifact_reparses_with_its_config() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["sample", "--n", "5", "--seeds", "1,2", "--format", "csv"],
        vec!["sample", "--n", "5", "--format", "jsonl"],
        vec!["spectrum", "--n", "8", "--gamma", "0.6", "--k", "3"],
        vec!["spectrum", "--n", "8", "--gamma", "0.6", "--format", "csv"],
        vec!["sweep", "--n", "7", "--gamma-grid", "0:1:5", "--format", "json"],
        vec!["min-gap", "--n", "8", "--seeds", "3,4", "--format", "csv"],
        vec!["ensemble", "--sizes", "7,8", "--seeds", "0..3"],
        vec!["ensemble", "--n", "7", "--seeds", "0..3", "--format", "csv"],
        vec!["anneal", "--n", "5", "--taus", "1,4", "--format", "jsonl"],
        vec!["anneal", "--n", "5", "--taus", "1,4", "--format", "csv"],
        vec!["theory", "--n", "10", "--seeds", "0,1", "--gamma", "0.4", "--temperature", "0.3"],
        vec!["theory", "--format", "csv"],
        vec!["phase-diagram", "--t-grid", "0:1:4", "--gamma-grid", "0:1:5", "--format", "jsonl"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let path = dir.path().join(format!("out{i}"));
        let mut full = args.clone();
        full.extend(["--output", path.to_str().unwrap()]);
        let out = qrem(&full);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(&path).unwrap();
        let artifact = read_artifact(&text).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert_eq!(artifact.header.config.command.as_str(), args[0]);
        assert_eq!(artifact.header.config.output.as_deref(), Some(path.as_path()));
        assert!(artifact.records.len() + artifact.rows.len() > 0, "{args:?}");
        // Re-running the embedded config reproduces the payload.
        let config_path = dir.path().join(format!("config{i}.json"));
        std::fs::write(&config_path, serde_json::to_string(&artifact.header.config).unwrap()).unwrap();
        let again = qrem(&[args[0], "--config", config_path.to_str().unwrap()]);
        assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
        assert_eq!(std::fs::read_to_string(&path).unwrap(), text, "{args:?}");
    }
}

#[test]
fn binary_table_with_header_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.bin");
    let out = qrem(&["sample", "--n", "10", "--seed", "42", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let table = EnergyTable::read_binary(std::fs::File::open(&path).unwrap()).unwrap();
    let direct = qrem::model::sample_energies(&qrem::model::ModelParams::new(10, 42, 0.0).unwrap()).unwrap();
    assert_eq!(table.energies(), direct.energies());
    let sidecar = std::fs::read_to_string(sidecar(&path)).unwrap();
    let header = qrem::cli::read_header(&sidecar).unwrap();
    assert_eq!(header.config.seeds, vec![42]);
    assert_eq!(header.config.format, Format::Binary);
    assert_eq!(qrem(&["sample", "--n", "4", "--seeds", "1,2", "--output", path.to_str().unwrap()]).status.code(), Some(2));
}

fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

#[test]
fn config_file_wins_over_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "n = 6\nseeds = \"2..3\"\nformat = \"jsonl\"\n").unwrap();
    let text = stdout(&qrem(&["min-gap", "--n", "9", "--seed", "7", "--config", config.to_str().unwrap()]));
    let artifact = read_artifact(&text).unwrap();
    let effective: &RunConfig = &artifact.header.config;
    assert_eq!((effective.n, effective.seeds.clone()), (Some(6), vec![2, 3]));
    assert_eq!(artifact.records.len(), 2);
    std::fs::write(&config, "spins = 6\n").unwrap();
    assert_eq!(qrem(&["min-gap", "--config", config.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unknown_schema_major_is_rejected() {
    let text = stdout(&qrem(&["theory", "--format", "jsonl"]));
    let bumped = text.replacen("\"schema_version\":1", "\"schema_version\":2", 1);
    assert!(read_artifact(&text).is_ok());
    assert!(read_artifact(&bumped).is_err());
}

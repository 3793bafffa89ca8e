//! Artifact layout. Every artifact starts with a [`Header`]:
//!
//! - json: one document `{"header": .., "data": ..}`
//! - jsonl: a first line `{"header": ..}`, then one record per line
//! - csv: a first line `# <header json>`, then a column row and data rows
//! - binary: the energy-table file, with the header in `<path>.json`
//!
//! Files are written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{CliError, Format, RunConfig};

/// Incremented on every incompatible layout change.
pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "qrem";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema_version: u32,
    pub tool: String,
    pub code_version: String,
    pub config: RunConfig,
}

impl Header {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: TOOL_NAME.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
        }
    }

    fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string(self).map_err(|e| CliError::io("header", e))
    }
}

/// Parses a header, rejecting schema versions this build does not know.
fn header_from_value(value: Value) -> Result<Header, CliError> {
    let version = value.get("schema_version").and_then(Value::as_u64);
    match version {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => return Err(CliError::Validation(format!("cli: unsupported artifact schema version {v} (this build reads {SCHEMA_VERSION})"))),
        None => return Err(CliError::Validation("cli: artifact header has no schema_version".into())),
    }
    serde_json::from_value(value).map_err(|e| CliError::Validation(format!("cli: malformed artifact header: {e}")))
}

/// A parsed text artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub header: Header,
    pub format: Format,
    /// `data` of a json document, or one value per jsonl line.
    pub records: Vec<Value>,
    /// CSV column names and rows (empty otherwise).
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Header of any text artifact, or of a binary table's `.json` sidecar.
pub fn read_header(text: &str) -> Result<Header, CliError> {
    Ok(read_artifact(text)?.header)
}

pub fn read_artifact(text: &str) -> Result<Artifact, CliError> {
    let malformed = |e: &dyn std::fmt::Display| CliError::Validation(format!("cli: malformed artifact: {e}"));
    let first = text.lines().next().unwrap_or("");
    if let Some(json) = first.strip_prefix("# ") {
        let header = header_from_value(serde_json::from_str(json).map_err(|e| malformed(&e))?)?;
        let mut lines = text.lines().skip(1).filter(|l| !l.starts_with('#'));
        let columns: Vec<String> = lines.next().unwrap_or("").split(',').map(str::to_string).collect();
        let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
        if rows.iter().any(|r| r.len() != columns.len()) {
            return Err(malformed(&"ragged csv rows"));
        }
        return Ok(Artifact { header, format: Format::Csv, records: Vec::new(), columns, rows });
    }
    if let Ok(Value::Object(mut line)) = serde_json::from_str::<Value>(first) {
        if let Some(h) = line.remove("header") {
            if line.is_empty() {
                let header = header_from_value(h)?;
                let records = text
                    .lines()
                    .skip(1)
                    .map(|l| serde_json::from_str(l).map_err(|e| malformed(&e)))
                    .collect::<Result<_, _>>()?;
                return Ok(Artifact { header, format: Format::Jsonl, records, columns: Vec::new(), rows: Vec::new() });
            }
        }
    }
    let mut doc: Value = serde_json::from_str(text).map_err(|e| malformed(&e))?;
    let header = doc.get_mut("header").map(Value::take).ok_or_else(|| malformed(&"no header"))?;
    let header = header_from_value(header)?;
    let records = match doc.get_mut("data").map(Value::take) {
        Some(data) => vec![data],
        // A sidecar carries only the header.
        None => Vec::new(),
    };
    Ok(Artifact { header, format: Format::Json, records, columns: Vec::new(), rows: Vec::new() })
}

pub(crate) fn json_document<T: Serialize>(header: &Header, data: &T) -> Result<Vec<u8>, CliError> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        header: &'a Header,
        data: &'a T,
    }
    let mut out = serde_json::to_vec_pretty(&Doc { header, data }).map_err(|e| CliError::io("json", e))?;
    out.push(b'\n');
    Ok(out)
}

pub(crate) fn jsonl_document<T: Serialize>(header: &Header, records: &[T]) -> Result<Vec<u8>, CliError> {
    let mut out = format!("{{\"header\":{}}}\n", header.to_json()?).into_bytes();
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| CliError::io("jsonl", e))?;
        out.push(b'\n');
    }
    Ok(out)
}

pub(crate) fn csv_document(header: &Header, columns: &str, body: &[u8]) -> Result<Vec<u8>, CliError> {
    let mut out = format!("# {}\n{columns}\n", header.to_json()?).into_bytes();
    out.extend_from_slice(body);
    Ok(out)
}

pub(crate) fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// or to stdout if there is no path.
pub(crate) fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut stdout = std::io::stdout().lock();
        return match stdout.write_all(bytes).and_then(|_| stdout.flush()) {
            // A closed reader (`| head`) is not a failure of the run.
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("stdout", e)),
            _ => Ok(()),
        };
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let context = path.display();
    let mut builder = tempfile::Builder::new();
    // The default 0600 of temporary files is wrong for results.
    #[cfg(unix)]
    builder.permissions(std::os::unix::fs::PermissionsExt::from_mode(0o644));
    let mut tmp = builder.tempfile_in(dir).map_err(|e| CliError::io(&context, e))?;
    tmp.write_all(bytes).and_then(|_| tmp.as_file().sync_all()).map_err(|e| CliError::io(&context, e))?;
    tmp.persist(path).map_err(|e| CliError::io(&context, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::{Command, PartialConfig};

    fn header() -> Header {
        let config = PartialConfig { command: Some(Command::Theory), ..Default::default() }.resolve().unwrap();
        Header::new(&config)
    }

    #[test]
    fn every_layout_reparses() {
        let h = header();
        let json = json_document(&h, &vec![1.5, 2.5]).unwrap();
        let a = read_artifact(std::str::from_utf8(&json).unwrap()).unwrap();
        assert_eq!((a.header, a.format, a.records), (h.clone(), Format::Json, vec![serde_json::json!([1.5, 2.5])]));

        let jsonl = jsonl_document(&h, &[1, 2, 3]).unwrap();
        let a = read_artifact(std::str::from_utf8(&jsonl).unwrap()).unwrap();
        assert_eq!((a.format, a.records.len()), (Format::Jsonl, 3));

        let csv = csv_document(&h, "a,b", b"1,2\n3,4\n").unwrap();
        let a = read_artifact(std::str::from_utf8(&csv).unwrap()).unwrap();
        assert_eq!(a.columns, vec!["a", "b"]);
        assert_eq!(a.rows.len(), 2);
        assert_eq!(a.header, h);
    }

    #[test]
    fn unknown_major_version_is_rejected() {
        let mut value = serde_json::to_value(header()).unwrap();
        value["schema_version"] = (SCHEMA_VERSION + 1).into();
        let text = format!("{{\"header\":{value}}}\n");
        assert!(matches!(read_header(&text), Err(CliError::Validation(m)) if m.contains("schema version")));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        emit(Some(&path), b"first").unwrap();
        emit(Some(&path), b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert_eq!(sidecar_path(&path), dir.path().join("out.txt.json"));
    }
}

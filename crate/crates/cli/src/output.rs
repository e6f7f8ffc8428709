//! Where and how artifacts are written.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const OUT_DIR_VAR: &str = "ROTNS_OUT_DIR";

/// `--out` if given, else `$ROTNS_OUT_DIR/<default_name>`, else stdout.
pub fn resolve(out: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    match out {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(OUT_DIR_VAR)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(default_name)),
    }
}

fn open(path: &Path) -> Result<std::fs::File, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes `value` as pretty JSON and returns where it went.
pub fn write_json(value: &Value, out: Option<&Path>, default_name: &str) -> Result<Option<PathBuf>, CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    match resolve(out, default_name) {
        Some(p) => {
            open(&p)?.write_all(text.as_bytes())?;
            Ok(Some(p))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(None)
        }
    }
}

pub fn write_text(text: &str, path: &Path) -> Result<(), CliError> {
    open(path)?.write_all(text.as_bytes())?;
    Ok(())
}

/// Opens the destination of a streamed artifact.
pub fn writer(out: Option<&Path>, default_name: &str) -> Result<(Box<dyn Write>, Option<PathBuf>), CliError> {
    match resolve(out, default_name) {
        Some(p) => Ok((Box::new(std::io::BufWriter::new(open(&p)?)), Some(p))),
        None => Ok((Box::new(std::io::BufWriter::new(std::io::stdout())), None)),
    }
}

pub fn hash_value(v: &Value) -> String {
    hex::encode(Sha256::digest(v.to_string().as_bytes()))
}

/// Provenance block embedded in every artifact.
pub fn meta(command: &str, config_hash: &str, config: Value) -> Value {
    json!({
        "tool": "rotns",
        "cli_version": env!("CARGO_PKG_VERSION"),
        "core_version": rotns_core::VERSION,
        "command": command,
        "config_hash": config_hash,
        "config": config,
    })
}

/// CSV with a header row; numbers use the shortest round-trip form.
pub fn csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|x| format!("{x}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Plot series of an expansion or sweep report: `(t, r_0..r_N)` or
/// `(omega, fixed, envelope)`.
pub fn plot_data(report: &Value) -> String {
    if let Some(points) = report.get("points").and_then(Value::as_array) {
        let rows = points
            .iter()
            .map(|p| {
                ["omega", "fixed", "envelope"]
                    .iter()
                    .map(|k| p[k].as_f64().unwrap_or(f64::NAN))
                    .collect()
            })
            .collect::<Vec<Vec<f64>>>();
        return csv(&["omega".into(), "qbar_fixed".into(), "qbar_envelope".into()], &rows);
    }
    let series = report.get("series");
    let times: Vec<f64> = series
        .and_then(|s| s.get("t"))
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_f64).collect())
        .unwrap_or_default();
    let rem: Vec<Vec<f64>> = series
        .and_then(|s| s.get("remainder"))
        .and_then(Value::as_array)
        .map(|a| {
            a.iter()
                .map(|row| {
                    row.as_array()
                        .map(|r| r.iter().map(|x| x.as_f64().unwrap_or(f64::NAN)).collect())
                        .unwrap_or_default()
                })
                .collect()
        })
        .unwrap_or_default();
    let orders = report
        .get("orders")
        .and_then(Value::as_array)
        .map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((0..=orders).map(|n| format!("remainder_{n}")));
    let rows: Vec<Vec<f64>> = times
        .iter()
        .zip(&rem)
        .map(|(t, r)| std::iter::once(*t).chain(r.iter().copied()).collect())
        .collect();
    csv(&header, &rows)
}

//! Output files. Every file records the command and its resolved config so
//! the run can be repeated with `--config <file>`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SLITSIC_OUT_DIR";

/// Where a command writes: an explicit path, `<$SLITSIC_OUT_DIR>/<name>`, or
/// stdout.
pub fn destination(explicit: Option<&PathBuf>, default_name: &str) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return (p.as_os_str() != "-").then(|| p.clone());
    }
    std::env::var_os(OUT_DIR_ENV).map(|d| Path::new(&d).join(default_name))
}

fn emit(dest: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match dest {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            fs::write(path, bytes).map_err(|e| CliError::io(path, e))
        }
        None => io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

#[derive(Serialize)]
struct Document<'a, C, B> {
    command: &'a str,
    config: &'a C,
    #[serde(flatten)]
    body: &'a B,
}

/// Writes `{command, config, ..body}` as pretty JSON.
pub fn write_json<C: Serialize, B: Serialize>(
    dest: Option<&Path>,
    command: &str,
    config: &C,
    body: &B,
) -> CliResult<()> {
    let doc = Document {
        command,
        config,
        body,
    };
    let mut bytes = serde_json::to_vec_pretty(&doc)?;
    bytes.push(b'\n');
    emit(dest, &bytes)
}

/// Writes a CSV table preceded by `# command:` and `# config:` lines.
pub fn write_csv<C: Serialize>(
    dest: Option<&Path>,
    command: &str,
    config: &C,
    header: &[&str],
    rows: &[Vec<String>],
) -> CliResult<()> {
    let mut bytes = format!(
        "# command: {command}\n# config: {}\n",
        serde_json::to_string(config)?
    )
    .into_bytes();
    let mut w = csv::Writer::from_writer(&mut bytes);
    let csv_err = |e: csv::Error| CliError::io("<csv>", io::Error::other(e));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("<csv>", e))?;
    drop(w);
    emit(dest, &bytes)
}

/// Shortest representation that parses back to the same value, with `-0`
/// printed as `0`.
pub fn num(v: f64) -> String {
    format!("{}", v + 0.0)
}

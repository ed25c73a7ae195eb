use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use slitsic::sicsearch::{SolutionRecord, DEFAULT_DELTA_XI};

use super::IoArgs;
use crate::config::{parse_document, resolve, DeltaSpec, Design, Preset};
use crate::error::{CliError, CliResult};
use crate::output::{destination, write_json};

/// Turns a catalog entry (or a preset) into a detector design.
#[derive(Debug, Args, Serialize)]
pub struct DesignArgs {
    #[arg(long, value_enum, conflicts_with = "catalog")]
    preset: Option<Preset>,
    /// Catalog written by `search`.
    #[arg(long, value_name = "FILE")]
    catalog: Option<PathBuf>,
    /// Entry of the catalog, counted from zero.
    #[arg(long)]
    index: Option<usize>,
    /// Slit half-separation δ, or `balanced`.
    #[arg(long)]
    delta: Option<DeltaSpec>,
    /// Detector half-width Δξ.
    #[arg(long)]
    delta_xi: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    io: IoArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<PathBuf>,
    pub index: usize,
    pub delta: DeltaSpec,
    pub delta_xi: f64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            preset: None,
            catalog: None,
            index: 0,
            delta: DeltaSpec::Balanced,
            delta_xi: DEFAULT_DELTA_XI,
        }
    }
}

#[derive(Serialize)]
struct DesignDoc<'a> {
    design: &'a Design,
}

fn catalog_entry(path: &Path, index: usize) -> CliResult<SolutionRecord> {
    let doc = parse_document(path)?;
    let list = doc
        .get("solutions")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Config(format!("{}: not a catalog", path.display())))?;
    let entry = list.get(index).cloned().ok_or_else(|| {
        CliError::Config(format!("catalog has {} entries, asked for {index}", list.len()))
    })?;
    Ok(serde_json::from_value(entry)?)
}

pub fn run(args: &DesignArgs) -> CliResult<()> {
    let cfg: DesignConfig = resolve(args.io.config.as_deref(), "design", args)?;
    let sol = match (&cfg.preset, &cfg.catalog) {
        (Some(p), None) => Design::from_preset(*p)?.solution(),
        (None, Some(path)) => catalog_entry(path, cfg.index)?.solution(),
        _ => return Err(CliError::Config("give exactly one of --preset or --catalog".into())),
    };
    let delta = cfg.delta.value(Some(&sol))?;
    let design = Design::new(&sol, delta, cfg.delta_xi)?;
    let dest = destination(args.io.output.as_ref(), "design.json");
    write_json(dest.as_deref(), "design", &cfg, &DesignDoc { design: &design })
}

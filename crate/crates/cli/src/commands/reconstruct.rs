use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use slitsic::tomo::{mle_reconstruct, reconstruct_artificial, reconstruct_linear, MLE_MAX_ITERS, MLE_TOL};
use slitsic::{BlochState, CountRecord, ReconstructionReport};

use super::simulate::CountsDoc;
use super::IoArgs;
use crate::config::{design_from, parse_document, resolve, Preset};
use crate::error::{CliError, CliResult};
use crate::output::{destination, write_json};

/// State estimates from a counts file.
#[derive(Debug, Args, Serialize)]
pub struct ReconstructArgs {
    /// Counts file written by `simulate`.
    #[arg(long, value_name = "FILE")]
    counts: Option<PathBuf>,
    /// Design to check the counts against; defaults to the one they embed.
    #[arg(long, value_enum, conflicts_with = "design")]
    preset: Option<Preset>,
    #[arg(long, value_name = "FILE")]
    design: Option<PathBuf>,
    /// Also report linear inversion on counts rescaled to equal weights.
    #[arg(long)]
    artificial_balance: bool,
    #[arg(long)]
    max_iters: Option<usize>,
    /// MLE stopping threshold on the per-step change of the state.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    io: IoArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<PathBuf>,
    pub artificial_balance: bool,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        Self {
            counts: None,
            preset: None,
            design: None,
            artificial_balance: false,
            max_iters: MLE_MAX_ITERS,
            tol: MLE_TOL,
        }
    }
}

#[derive(Serialize)]
struct Report {
    counts: CountRecord,
    acceptance_fraction: f64,
    truth: [f64; 3],
    linear: ReconstructionReport,
    mle: ReconstructionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    artificial: Option<ReconstructionReport>,
}

pub fn run(args: &ReconstructArgs) -> CliResult<()> {
    let cfg: ReconstructConfig = resolve(args.io.config.as_deref(), "reconstruct", args)?;
    let path = cfg
        .counts
        .as_ref()
        .ok_or_else(|| CliError::Config("--counts is required".into()))?;
    let doc: CountsDoc = serde_json::from_value(parse_document(path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(d) = design_from(cfg.preset, cfg.design.as_ref())? {
        if d.layout != doc.design.layout || d.povm != doc.design.povm {
            return Err(CliError::Config(
                "counts were simulated for a different design".into(),
            ));
        }
    }
    if !doc.counts.is_consistent() {
        return Err(CliError::Config("counts do not add up to the photon total".into()));
    }
    let povm = &doc.design.povm;
    let truth = BlochState::new(doc.truth)?;
    let linear = reconstruct_linear(&doc.counts, povm)?.with_truth(&truth);
    let mle = mle_reconstruct(&doc.counts, povm, cfg.max_iters, cfg.tol)?
        .report()
        .with_truth(&truth);
    let artificial = if cfg.artificial_balance {
        Some(reconstruct_artificial(&doc.counts, povm)?.with_truth(&truth))
    } else {
        None
    };
    let report = Report {
        counts: doc.counts,
        acceptance_fraction: doc.counts.acceptance_fraction(),
        truth: doc.truth,
        linear,
        mle,
        artificial,
    };
    let dest = destination(args.io.output.as_ref(), "report.json");
    write_json(dest.as_deref(), "reconstruct", &cfg, &report)
}

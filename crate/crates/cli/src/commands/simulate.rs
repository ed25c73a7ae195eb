use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use slitsic::tomo::{simulate_counts, simulate_counts_multinomial};
use slitsic::CountRecord;

use super::IoArgs;
use crate::config::{require_design, parse_state, resolve, Design, Preset};
use crate::error::CliResult;
use crate::output::{destination, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SimMethod {
    /// Draw every photon position and bin it.
    Photons,
    /// One multinomial draw over the windows and the discard bin.
    Multinomial,
}

/// Photon counts of the four detectors for a given state.
#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, conflicts_with = "design")]
    preset: Option<Preset>,
    #[arg(long, value_name = "FILE")]
    design: Option<PathBuf>,
    /// Bloch vector `x,y,z`, `mixed`, `mode-one`, `mode-two` or `s1`..`s4`.
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    /// Photons reaching the detection plane, accepted or not.
    #[arg(long)]
    photons: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    method: Option<SimMethod>,
    #[command(flatten)]
    #[serde(skip)]
    io: IoArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<PathBuf>,
    pub state: String,
    pub photons: u64,
    pub seed: u64,
    pub method: SimMethod,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            preset: None,
            design: None,
            state: "mixed".into(),
            photons: 200_000_000,
            seed: 1,
            method: SimMethod::Photons,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountsDoc {
    pub design: Design,
    pub truth: [f64; 3],
    pub counts: CountRecord,
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let cfg: SimulateConfig = resolve(args.io.config.as_deref(), "simulate", args)?;
    let design = require_design(cfg.preset, cfg.design.as_ref())?;
    let rho = parse_state(&cfg.state, Some(&design.povm))?;
    let counts = match cfg.method {
        SimMethod::Photons => simulate_counts(&rho, &design.layout, cfg.photons, cfg.seed)?,
        SimMethod::Multinomial => {
            simulate_counts_multinomial(&rho, &design.layout, cfg.photons, cfg.seed)?
        }
    };
    let doc = CountsDoc {
        design,
        truth: rho.r,
        counts,
    };
    let dest = destination(args.io.output.as_ref(), "counts.json");
    write_json(dest.as_deref(), "simulate", &cfg, &doc)
}

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use slitsic::sicsearch::detector_positions;
use slitsic::wavefield::{bloch_of_w, w_of};
use slitsic::SlitConfig;

use super::IoArgs;
use crate::config::{design_from, resolve, DeltaSpec, Preset};
use crate::error::{CliError, CliResult};
use crate::output::{destination, num, write_csv};

/// Bloch vector of the measurement direction along one plane.
#[derive(Debug, Args, Serialize)]
pub struct BlochCurveArgs {
    #[arg(long, value_enum, conflicts_with = "design")]
    preset: Option<Preset>,
    #[arg(long, value_name = "FILE")]
    design: Option<PathBuf>,
    /// Slit half-separation δ, or `balanced`.
    #[arg(long)]
    delta: Option<DeltaSpec>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xi_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xi_max: Option<f64>,
    /// Number of evenly spaced rows, endpoints included.
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    io: IoArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlochCurveConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    pub xi_min: f64,
    pub xi_max: f64,
    pub samples: usize,
}

impl Default for BlochCurveConfig {
    fn default() -> Self {
        Self {
            preset: None,
            design: None,
            delta: None,
            zeta: None,
            xi_min: -10.0,
            xi_max: 10.0,
            samples: 2001,
        }
    }
}

pub const HEADER: [&str; 6] = ["xi", "w", "s_x", "s_y", "s_z", "detector"];

pub fn run(args: &BlochCurveArgs) -> CliResult<()> {
    let cfg: BlochCurveConfig = resolve(args.io.config.as_deref(), "bloch-curve", args)?;
    let design = design_from(cfg.preset, cfg.design.as_ref())?;
    let sol = design.as_ref().map(|d| d.solution());
    let zeta = cfg
        .zeta
        .or(sol.map(|s| s.zeta))
        .ok_or_else(|| CliError::Config("--zeta is required without a design".into()))?;
    let delta = match (&cfg.delta, &design) {
        (Some(d), _) => d.value(sol.as_ref())?,
        (None, Some(d)) => d.delta,
        (None, None) => return Err(CliError::Config("--delta is required without a design".into())),
    };
    let slit = SlitConfig::new(delta)?;
    if cfg.samples < 2 || !(cfg.xi_max > cfg.xi_min) {
        return Err(CliError::Config("need at least two samples over a nonempty range".into()));
    }
    if zeta < 0.0 {
        return Err(slitsic::Error::NegativeZeta(zeta).into());
    }

    let last = (cfg.samples - 1) as f64;
    let mut points: Vec<(f64, usize)> = (0..cfg.samples)
        .map(|i| {
            let t = i as f64;
            ((cfg.xi_min * (last - t) + cfg.xi_max * t) / last, 0)
        })
        .collect();
    if let Some(s) = sol.filter(|s| s.zeta == zeta) {
        let xi = detector_positions(&s, delta)?;
        points.extend(xi.iter().enumerate().map(|(k, &x)| (x, k + 1)));
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let rows: Vec<Vec<String>> = points
        .into_iter()
        .map(|(xi, det)| {
            let w = w_of(xi, zeta, &slit);
            let s = bloch_of_w(w, zeta);
            vec![num(xi), num(w), num(s.x), num(s.y), num(s.z), det.to_string()]
        })
        .collect();
    let dest = destination(args.io.output.as_ref(), "bloch_curve.csv");
    write_csv(dest.as_deref(), "bloch-curve", &cfg, &HEADER, &rows)
}

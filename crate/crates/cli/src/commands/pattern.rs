use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use slitsic::quad::uniform_grid;
use slitsic::sicsearch::detector_positions;
use slitsic::wavefield::{detection_pdf, intensity_envelope};
use slitsic::{PlanePoint, SlitConfig};

use super::IoArgs;
use crate::config::{design_from, parse_state, resolve, DeltaSpec, Preset};
use crate::error::{CliError, CliResult};
use crate::output::{destination, num, write_csv};

/// Intensity envelope and detection density across one plane.
#[derive(Debug, Args, Serialize)]
pub struct PatternArgs {
    #[arg(long, value_enum, conflicts_with = "design")]
    preset: Option<Preset>,
    /// Design file; supplies ζ, δ and the detector rows.
    #[arg(long, value_name = "FILE")]
    design: Option<PathBuf>,
    /// Slit half-separation δ (repeatable), or `balanced`.
    #[arg(long = "delta")]
    #[serde(rename = "deltas")]
    deltas: Vec<DeltaSpec>,
    #[arg(long)]
    zeta: Option<f64>,
    /// Bloch vector `x,y,z`, `mixed`, `mode-one`, `mode-two` or `s1`..`s4`.
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    xi_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xi_max: Option<f64>,
    #[arg(long)]
    spacing: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    io: IoArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<PathBuf>,
    pub deltas: Vec<DeltaSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    pub state: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_max: Option<f64>,
    pub spacing: f64,
}

impl Default for PatternConfig {
    fn default() -> Self {
        Self {
            preset: None,
            design: None,
            deltas: Vec::new(),
            zeta: None,
            state: "mixed".into(),
            xi_min: None,
            xi_max: None,
            spacing: 0.01,
        }
    }
}

pub const HEADER: [&str; 5] = ["delta", "xi", "detector", "envelope", "pdf"];

pub fn run(args: &PatternArgs) -> CliResult<()> {
    let cfg: PatternConfig = resolve(args.io.config.as_deref(), "pattern", args)?;
    let design = design_from(cfg.preset, cfg.design.as_ref())?;
    let sol = design.as_ref().map(|d| d.solution());
    let zeta = cfg
        .zeta
        .or(sol.map(|s| s.zeta))
        .ok_or_else(|| CliError::Config("--zeta is required without a design".into()))?;
    let deltas: Vec<f64> = if cfg.deltas.is_empty() {
        vec![design
            .as_ref()
            .ok_or_else(|| CliError::Config("--delta is required without a design".into()))?
            .delta]
    } else {
        cfg.deltas
            .iter()
            .map(|d| d.value(sol.as_ref()))
            .collect::<CliResult<_>>()?
    };
    let rho = parse_state(&cfg.state, design.as_ref().map(|d| &d.povm))?;
    if !(cfg.spacing > 0.0) {
        return Err(CliError::Config("spacing must be positive".into()));
    }

    let widest = deltas.iter().cloned().fold(0.0, f64::max);
    let half = 4.0 * ((1.0 + zeta * zeta) / 2.0).sqrt() + widest;
    let lo = cfg.xi_min.unwrap_or(-half);
    let hi = cfg.xi_max.unwrap_or(half);
    if !(hi > lo) {
        return Err(CliError::Config(format!("empty range [{lo}, {hi}]")));
    }
    let grid = uniform_grid(lo, hi, cfg.spacing);

    let mut rows = Vec::new();
    for &delta in &deltas {
        let slit = SlitConfig::new(delta)?;
        let mut points: Vec<(f64, usize)> = grid.iter().map(|&x| (x, 0)).collect();
        if let Some(s) = sol.filter(|s| s.zeta == zeta) {
            let xi = detector_positions(&s, delta)?;
            points.extend(xi.iter().enumerate().map(|(k, &x)| (x, k + 1)));
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        for (xi, det) in points {
            let p = PlanePoint::new(xi, zeta)?;
            rows.push(vec![
                num(delta),
                num(xi),
                det.to_string(),
                num(intensity_envelope(&p, &slit)),
                num(detection_pdf(&rho, &p, &slit)?),
            ]);
        }
    }
    let dest = destination(args.io.output.as_ref(), "pattern.csv");
    write_csv(dest.as_deref(), "pattern", &cfg, &HEADER, &rows)
}

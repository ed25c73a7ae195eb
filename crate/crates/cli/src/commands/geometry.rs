use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use slitsic::labgeom::{to_physical, TABLE_HEADER};
use slitsic::PhysicalGeometry;

use super::IoArgs;
use crate::config::{design_from, resolve, DeltaSpec, Design, Preset};
use crate::error::{CliError, CliResult};
use crate::output::{destination, num, write_csv, write_json};

/// Wavelength and slit width in laboratory units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pair {
    pub lambda_nm: f64,
    pub a_um: f64,
}

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (l, a) = s
            .split_once(':')
            .ok_or_else(|| format!("expected LAMBDA_NM:A_UM, got `{s}`"))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        Ok(Pair {
            lambda_nm: parse(l)?,
            a_um: parse(a)?,
        })
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lambda_nm, self.a_um)
    }
}

/// Wavelength and slit-width pairs used when none are given.
pub const TABLE_PAIRS: [Pair; 4] = [
    Pair { lambda_nm: 650.0, a_um: 100.0 },
    Pair { lambda_nm: 780.0, a_um: 62.5 },
    Pair { lambda_nm: 826.0, a_um: 60.0 },
    Pair { lambda_nm: 810.0, a_um: 40.0 },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Laboratory lengths of a design for several (λ, a) pairs.
#[derive(Debug, Args, Serialize)]
pub struct GeometryArgs {
    #[arg(long, value_enum, conflicts_with = "design")]
    preset: Option<Preset>,
    #[arg(long, value_name = "FILE")]
    design: Option<PathBuf>,
    /// Slit half-separation δ, or `balanced`. Defaults to the design's.
    #[arg(long)]
    delta: Option<DeltaSpec>,
    /// `LAMBDA_NM:A_UM`, repeatable.
    #[arg(long = "pair")]
    #[serde(rename = "pairs")]
    pairs: Vec<Pair>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    #[serde(skip)]
    io: IoArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaSpec>,
    pub pairs: Vec<Pair>,
    pub format: Format,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            preset: None,
            design: None,
            delta: None,
            pairs: TABLE_PAIRS.to_vec(),
            format: Format::Csv,
        }
    }
}

/// Table columns followed by the remaining positions and the Fresnel scale.
pub const EXTRA_HEADER: [&str; 3] = ["x1_um", "x2_um", "z0_cm"];

#[derive(Serialize)]
struct Rows<'a> {
    rows: &'a [PhysicalGeometry],
}

pub fn run(args: &GeometryArgs) -> CliResult<()> {
    let mut cfg: GeometryConfig = resolve(args.io.config.as_deref(), "geometry", args)?;
    if cfg.preset.is_none() && cfg.design.is_none() {
        cfg.preset = Some(Preset::Reference);
    }
    let design: Design = design_from(cfg.preset, cfg.design.as_ref())?.expect("source is set");
    let sol = design.solution();
    let delta = match &cfg.delta {
        Some(d) => d.value(Some(&sol))?,
        None => design.delta,
    };
    if cfg.pairs.is_empty() {
        return Err(CliError::Config("no wavelength and slit-width pairs".into()));
    }
    let geoms: Vec<PhysicalGeometry> = cfg
        .pairs
        .iter()
        .map(|p| to_physical(&sol, delta, p.lambda_nm * 1e-9, p.a_um * 1e-6))
        .collect::<Result<_, _>>()?;

    match cfg.format {
        Format::Json => {
            let dest = destination(args.io.output.as_ref(), "geometry.json");
            write_json(dest.as_deref(), "geometry", &cfg, &Rows { rows: &geoms })
        }
        Format::Csv => {
            let header: Vec<&str> = TABLE_HEADER.iter().chain(&EXTRA_HEADER).copied().collect();
            let rows: Vec<Vec<String>> = geoms
                .iter()
                .map(|g| {
                    let mut r: Vec<String> = g.table_row().iter().map(|&v| num(v)).collect();
                    r.extend([num(g.x[0] * 1e6), num(g.x[1] * 1e6), num(g.z0 * 1e2)]);
                    r
                })
                .collect();
            let dest = destination(args.io.output.as_ref(), "geometry.csv");
            write_csv(dest.as_deref(), "geometry", &cfg, &header, &rows)
        }
    }
}

//! Resolved run configurations, design files and state specifications.
//!
//! Every command resolves its configuration in three layers: built-in
//! defaults, then an optional `--config` file, then command-line flags. The
//! `--config` file may be a bare JSON config or any output of this tool, in
//! which case the embedded config is used.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use slitsic::sicsearch::{
    balance_solution, build_povm, reference_solution, SolutionRecord, DEFAULT_DELTA_XI,
};
use slitsic::{BlochState, DetectorLayout, Povm4, TetraSolution};

use crate::error::{CliError, CliResult};

/// Keys naming where a design comes from; setting one clears the others.
const DESIGN_SOURCES: [&str; 3] = ["preset", "design", "catalog"];

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Parses a JSON document or the `# config:` line of a CSV output.
pub fn parse_document(path: &Path) -> CliResult<Value> {
    let text = read(path)?;
    if text.starts_with('#') {
        let mut command = None;
        let mut config = None;
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            if let Some(rest) = line.strip_prefix("# command: ") {
                command = Some(rest.trim().to_string());
            } else if let Some(rest) = line.strip_prefix("# config: ") {
                config = Some(serde_json::from_str::<Value>(rest)?);
            }
        }
        let config = config
            .ok_or_else(|| CliError::Config(format!("{}: no config line", path.display())))?;
        let mut doc = Map::new();
        if let Some(c) = command {
            doc.insert("command".into(), Value::String(c));
        }
        doc.insert("config".into(), config);
        return Ok(Value::Object(doc));
    }
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Config object stored in `path`, checked against `command`.
pub fn load_config(path: &Path, command: &str) -> CliResult<Map<String, Value>> {
    let doc = parse_document(path)?;
    let Value::Object(mut obj) = doc else {
        return Err(CliError::Config(format!("{}: expected a JSON object", path.display())));
    };
    if let Some(found) = obj.get("command").and_then(Value::as_str) {
        if found != command {
            return Err(CliError::Config(format!(
                "{} holds a `{found}` run, not `{command}`",
                path.display()
            )));
        }
    }
    match obj.remove("config") {
        Some(Value::Object(c)) => Ok(c),
        Some(_) => Err(CliError::Config(format!("{}: config is not an object", path.display()))),
        None => Ok(obj),
    }
}

/// Defaults, then the config file, then the flags in `overrides`.
///
/// Unset flags (null, empty lists and `false` switches) leave the lower
/// layers untouched.
pub fn resolve<C: DeserializeOwned>(
    file: Option<&Path>,
    command: &str,
    overrides: impl Serialize,
) -> CliResult<C> {
    let mut base = match file {
        Some(p) => load_config(p, command)?,
        None => Map::new(),
    };
    let Value::Object(mut flags) = serde_json::to_value(overrides)? else {
        unreachable!("argument structs serialize to objects");
    };
    flags.retain(|_, v| match v {
        Value::Null | Value::Bool(false) => false,
        Value::Array(a) => !a.is_empty(),
        _ => true,
    });
    if DESIGN_SOURCES.iter().any(|k| flags.contains_key(*k)) {
        for k in DESIGN_SOURCES {
            base.remove(k);
        }
    }
    base.extend(flags);
    Ok(serde_json::from_value(Value::Object(base))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Nearest symmetric solution (ζ ≈ 3.4678) at its balanced separation.
    Reference,
}

/// A complete single-plane design: solution, slit separation and the
/// detector layout with its POVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub solution: SolutionRecord,
    pub delta: f64,
    pub delta_xi: f64,
    pub layout: DetectorLayout,
    pub povm: Povm4,
}

impl Design {
    pub fn new(sol: &TetraSolution, delta: f64, delta_xi: f64) -> CliResult<Self> {
        Ok(Self {
            solution: SolutionRecord::from_solution(sol),
            delta,
            delta_xi,
            layout: DetectorLayout::from_solution(sol, delta, delta_xi)?,
            povm: build_povm(sol, delta, delta_xi)?,
        })
    }

    pub fn from_preset(preset: Preset) -> CliResult<Self> {
        match preset {
            Preset::Reference => {
                let sol = reference_solution();
                let delta = balance_solution(&sol).expect("reference solution is symmetric");
                Self::new(&sol, delta, DEFAULT_DELTA_XI)
            }
        }
    }

    /// Reads the `design` entry of a design or counts file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let doc = parse_document(path)?;
        let design = doc
            .get("design")
            .cloned()
            .ok_or_else(|| CliError::Config(format!("{}: no design entry", path.display())))?;
        Ok(serde_json::from_value(design)?)
    }

    pub fn solution(&self) -> TetraSolution {
        self.solution.solution()
    }
}

/// Design named by a preset or a file, if any.
pub fn design_from(preset: Option<Preset>, file: Option<&PathBuf>) -> CliResult<Option<Design>> {
    match (preset, file) {
        (Some(_), Some(_)) => Err(CliError::Config("give either a preset or a design file".into())),
        (Some(p), None) => Design::from_preset(p).map(Some),
        (None, Some(f)) => Design::load(f).map(Some),
        (None, None) => Ok(None),
    }
}

pub fn require_design(preset: Option<Preset>, file: Option<&PathBuf>) -> CliResult<Design> {
    design_from(preset, file)?
        .ok_or_else(|| CliError::Config("a design is required (--preset or --design)".into()))
}

/// Slit half-separation: a number or the balanced value of the design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaSpec {
    Value(f64),
    Balanced,
}

impl DeltaSpec {
    pub fn value(&self, sol: Option<&TetraSolution>) -> CliResult<f64> {
        match self {
            DeltaSpec::Value(d) => Ok(*d),
            DeltaSpec::Balanced => {
                let sol = sol.ok_or_else(|| {
                    CliError::Config("`balanced` separation needs a design".into())
                })?;
                balance_solution(sol).ok_or_else(|| {
                    CliError::Config("only symmetric solutions have a balanced separation".into())
                })
            }
        }
    }
}

impl FromStr for DeltaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "balanced" {
            return Ok(DeltaSpec::Balanced);
        }
        s.parse::<f64>()
            .map(DeltaSpec::Value)
            .map_err(|_| format!("expected a number or `balanced`, got `{s}`"))
    }
}

impl fmt::Display for DeltaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaSpec::Value(d) => write!(f, "{d}"),
            DeltaSpec::Balanced => f.write_str("balanced"),
        }
    }
}

impl Serialize for DeltaSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            DeltaSpec::Value(d) => s.serialize_f64(*d),
            DeltaSpec::Balanced => s.serialize_str("balanced"),
        }
    }
}

impl<'de> Deserialize<'de> for DeltaSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(DeltaSpec::Value(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A qubit state given as `x,y,z`, `mixed`, `mode-one`, `mode-two`, or
/// `s1`..`s4` for the design's measurement directions.
pub fn parse_state(spec: &str, povm: Option<&Povm4>) -> CliResult<BlochState> {
    let state = match spec {
        "mixed" => BlochState::maximally_mixed(),
        "mode-one" => BlochState::mode_one(),
        "mode-two" => BlochState::mode_two(),
        s if s.len() == 2 && s.starts_with('s') => {
            let k: usize = s[1..]
                .parse()
                .ok()
                .filter(|k| (1..=4).contains(k))
                .ok_or_else(|| CliError::Config(format!("unknown state `{spec}`")))?;
            let povm = povm.ok_or_else(|| {
                CliError::Config(format!("state `{spec}` needs a design"))
            })?;
            let v = povm.elements[k - 1].vector().normalize();
            BlochState::from_vector(&v)?
        }
        s => {
            let parts: Vec<f64> = s
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Config(format!("unknown state `{spec}`")))?;
            let r: [f64; 3] = parts
                .try_into()
                .map_err(|_| CliError::Config(format!("state `{spec}` needs three components")))?;
            BlochState::new(r)?
        }
    };
    Ok(state)
}

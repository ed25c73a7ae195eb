use clap::Args;
use serde::Serialize;
use slitsic::sicsearch::{search_tetrahedra, SolutionRecord};
use slitsic::SearchConfig;

use super::IoArgs;
use crate::config::resolve;
use crate::error::{CliError, CliResult};
use crate::output::{destination, write_json};

/// Multistart search for tetrahedral planes.
#[derive(Debug, Args, Serialize)]
pub struct SearchArgs {
    /// Exclusive lower end of the ζ range.
    #[arg(long)]
    zeta_min: Option<f64>,
    /// Upper end of the ζ range.
    #[arg(long)]
    zeta_max: Option<f64>,
    /// Number of random starts.
    #[arg(long)]
    #[serde(rename = "n_starts")]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Acceptance threshold on the objective.
    #[arg(long)]
    tol: Option<f64>,
    /// Starts draw each w from [−w_bound, w_bound].
    #[arg(long)]
    w_bound: Option<f64>,
    #[arg(long)]
    descent_iters: Option<usize>,
    #[arg(long)]
    polish_iters: Option<usize>,
    #[arg(long)]
    dedup_threshold: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    io: IoArgs,
}

#[derive(Serialize)]
struct Catalog {
    solutions: Vec<SolutionRecord>,
}

pub fn run(args: &SearchArgs) -> CliResult<()> {
    let cfg: SearchConfig = resolve(args.io.config.as_deref(), "search", args)?;
    cfg.validate()?;
    let solutions: Vec<SolutionRecord> = search_tetrahedra(&cfg)?
        .iter()
        .map(SolutionRecord::from_solution)
        .collect();
    let found = !solutions.is_empty();
    let dest = destination(args.io.output.as_ref(), "search.json");
    write_json(dest.as_deref(), "search", &cfg, &Catalog { solutions })?;
    if found {
        Ok(())
    } else {
        Err(CliError::NoSolutions)
    }
}

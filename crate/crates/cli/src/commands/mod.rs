use std::path::PathBuf;

use clap::Args;

pub mod bloch_curve;
pub mod design;
pub mod geometry;
pub mod pattern;
pub mod reconstruct;
pub mod search;
pub mod simulate;

/// Flags shared by every command.
#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// JSON config, or any output file of this tool to rerun it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output path (`-` for stdout). Defaults to `$SLITSIC_OUT_DIR/<name>`
    /// when that variable is set, stdout otherwise.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

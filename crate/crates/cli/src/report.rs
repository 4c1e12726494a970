use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use rvmon_core::engine::VerdictReport;
use rvmon_core::sim::SimSummary;
use serde::Deserialize;

use crate::common::{render_report, REPORT_FILE, SIM_SUMMARY_FILE};
use crate::sim::collision_line;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `check --out` or `sim --out`.
    dir: PathBuf,
}

#[derive(Debug, Deserialize)]
struct SummaryFile {
    monitored: SimSummary,
}

pub fn run(args: ReportArgs) -> Result<ExitCode> {
    let path = args.dir.join(REPORT_FILE);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let report: VerdictReport =
        serde_json::from_str(&text).with_context(|| format!("{} is not a verdict report", path.display()))?;
    print!("{}", render_report(&report));
    let sim_path = args.dir.join(SIM_SUMMARY_FILE);
    if sim_path.is_file() {
        let text = fs::read_to_string(&sim_path)?;
        let summary: SummaryFile =
            serde_json::from_str(&text).with_context(|| format!("{} is corrupt", sim_path.display()))?;
        println!("{}", collision_line(&summary.monitored));
    }
    Ok(ExitCode::SUCCESS)
}

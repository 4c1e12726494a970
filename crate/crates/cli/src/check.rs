use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use log::info;
use rvmon_core::engine::{run_set, write_verdicts, Level};
use rvmon_core::stream::read_trace_file;

use crate::common::{build_monitors, create_file, parse_bind, render_report, write_json, REPORT_FILE, VERDICT_FILE};

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Spec file or built-in name (p1..p4); repeat for a monitor set.
    #[arg(long = "spec", required = true)]
    specs: Vec<String>,
    /// JSON Lines trace.
    #[arg(long)]
    trace: PathBuf,
    /// Bind a spec input to a differently named channel.
    #[arg(long = "bind", value_name = "INPUT=CHANNEL", value_parser = parse_bind)]
    binds: Vec<(String, String)>,
    /// Directory for verdicts.jsonl and report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bool output holding the verdict (default: `attack`).
    #[arg(long)]
    verdict: Option<String>,
    /// Monitor level for every spec (default: built-in level, else data).
    #[arg(long)]
    level: Option<Level>,
}

/// Exit 0 without violations, 2 with violations, 1 on any error.
pub fn run(args: CheckArgs) -> Result<ExitCode> {
    let monitors = build_monitors(&args.specs, &args.binds, args.level, args.verdict.as_deref())?;
    let trace = read_trace_file(&args.trace).with_context(|| format!("reading {}", args.trace.display()))?;
    info!("{} monitors over {} events", monitors.len(), trace.event_count());
    let run = run_set(&monitors, &trace);
    let report = run.report();
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut w = create_file(&dir.join(VERDICT_FILE))?;
        write_verdicts(&run, &mut w)?;
        w.flush()?;
        write_json(&dir.join(REPORT_FILE), &report)?;
    }
    print!("{}", render_report(&report));
    if report.has_errors() {
        for m in report.monitors.iter().filter(|m| m.error.is_some()) {
            eprintln!("error: monitor `{}`: {}", m.id, m.error.as_deref().unwrap_or_default());
        }
        return Ok(ExitCode::from(1));
    }
    Ok(if report.has_violations() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

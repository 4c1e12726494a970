use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Args;
use rvmon_core::attack::{inject_data_spoof, position_replay, AttackSpec};
use rvmon_core::stream::{read_trace_file, write_trace, Trace};

use crate::common::{create_file, AttackArg};

#[derive(Debug, Args)]
pub struct InjectArgs {
    /// Recorded JSON Lines trace (not needed for position_replay).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// data or file:PATH holding a data_spoof or position_replay attack.
    #[arg(long)]
    attack: AttackArg,
    /// Output trace.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: InjectArgs) -> Result<ExitCode> {
    let attack = args.attack.resolve()?;
    let load = || -> Result<Trace> {
        let Some(path) = &args.trace else {
            bail!("--trace is required for a {} attack", attack.label());
        };
        read_trace_file(path).with_context(|| format!("reading {}", path.display()))
    };
    let trace = match &attack {
        AttackSpec::None => load()?,
        AttackSpec::DataSpoof { target, schedule } => inject_data_spoof(&load()?, target, schedule)?,
        AttackSpec::PositionReplay => Trace::from_streams([position_replay()]),
        AttackSpec::FunctionalFault { .. } => {
            bail!("functional faults act on the running controller; use `rvmon sim --attack`")
        }
    };
    let mut w = create_file(&args.out)?;
    write_trace(&trace, &mut w)?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

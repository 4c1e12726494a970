use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Args;
use log::{debug, info};
use rvmon_core::attack::AttackSpec;
use rvmon_core::engine::{write_verdicts, EngineError, MonitorInstance, MonitorRun, OnlineMonitor, SetRun};
use rvmon_core::sim::{channel_kind, emit_trace, simulate, state_events, SimConfig, SimRun, SimSummary, Simulator};
use rvmon_core::stream::write_trace;
use serde::Serialize;

use crate::common::{
    build_monitors, create_file, render_report, write_json, AttackArg, REPORT_FILE, SIM_SUMMARY_FILE, VERDICT_FILE,
};

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Scenario TOML (default: built-in pedestrian crossing).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// none, data, functional or file:PATH; overrides the scenario's [attack].
    #[arg(long)]
    attack: Option<AttackArg>,
    /// Comma-separated built-in names or spec paths.
    #[arg(long, value_delimiter = ',', default_value = "p2,p3,p4")]
    monitors: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Noise seed override.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct SimSummaryFile {
    attack: &'static str,
    monitored: SimSummary,
    clean: SimSummary,
    /// Relative change of the minimum headway against the clean run.
    headway_deviation: Option<f64>,
}

pub fn run(args: SimArgs) -> Result<ExitCode> {
    let mut cfg = match &args.scenario {
        Some(p) => SimConfig::from_file(p)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.sim.seed = seed;
    }
    if let Some(attack) = &args.attack {
        cfg.attack = attack.resolve()?;
    }
    if cfg.attack == AttackSpec::PositionReplay {
        bail!("position_replay produces an `x` trace; use `rvmon inject` and `rvmon check --spec p1`");
    }
    cfg.validate()?;
    let monitors = build_monitors(&args.monitors, &[], None, None)?;
    for m in &monitors {
        for (input, channel) in m.binding.iter() {
            if channel_kind(channel).is_none() {
                bail!(
                    "monitor `{}` reads `{channel}` (input `{input}`), which the simulator does not emit",
                    m.id
                );
            }
        }
    }

    let clean = simulate(&cfg.clone().with_attack(AttackSpec::None))?;
    let (monitored, set) = run_monitored(cfg.clone(), &monitors)?;
    let report = set.report();
    info!("attack {}: {} ticks", cfg.attack.label(), monitored.states.len());

    let out = &args.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("scenario.toml"), cfg.to_toml())?;
    write_trace_to(&out.join("clean_trace.jsonl"), &clean)?;
    if cfg.attack != AttackSpec::None {
        write_trace_to(&out.join("attacked_trace.jsonl"), &monitored)?;
    }
    let mut w = create_file(&out.join(VERDICT_FILE))?;
    write_verdicts(&set, &mut w)?;
    w.flush()?;
    write_json(&out.join(REPORT_FILE), &report)?;
    let summary = SimSummaryFile {
        attack: cfg.attack.label(),
        monitored: monitored.summary(),
        clean: clean.summary(),
        headway_deviation: match (monitored.min_headway(), clean.min_headway()) {
            (Some(a), Some(c)) if c > 0.0 => Some((a - c).abs() / c),
            _ => None,
        },
    };
    write_json(&out.join(SIM_SUMMARY_FILE), &summary)?;
    write_plot(&out.join("plot.csv"), &monitored, &clean, &set)?;

    print!("{}", render_report(&report));
    println!("{}", collision_line(&summary.monitored));
    Ok(if report.has_errors() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

pub fn collision_line(s: &SimSummary) -> String {
    let headway = s.min_headway.map_or_else(|| "-".to_string(), |h| format!("{h:.2} m"));
    format!(
        "collision: {}; min headway: {headway}",
        if s.collided { "yes" } else { "no" }
    )
}

/// Simulates with the monitors consuming each tick as it is produced.
fn run_monitored(cfg: SimConfig, monitors: &[MonitorInstance]) -> Result<(SimRun, SetRun)> {
    let mut online: Vec<Result<OnlineMonitor, EngineError>> = monitors.iter().map(OnlineMonitor::new).collect();
    let mut sim = Simulator::new(cfg.clone())?;
    let mut states = Vec::new();
    while !sim.finished() {
        let state = sim.step();
        let events = state_events(&state);
        for slot in online.iter_mut() {
            if let Ok(m) = slot {
                let emitted = m.push_batch(events.iter().map(|(c, e)| (*c, *e)));
                match emitted {
                    Ok(v) if !v.is_empty() => debug!("t={}: {} outputs", state.t, v.len()),
                    Ok(_) => {}
                    Err(e) => *slot = Err(e),
                }
            }
        }
        states.push(state);
    }
    let runs = monitors
        .iter()
        .zip(online)
        .map(|(m, slot)| MonitorRun {
            id: m.id.clone(),
            level: m.level,
            verdict_channel: m.verdict_channel.clone(),
            result: slot.and_then(OnlineMonitor::finish),
        })
        .collect();
    Ok((SimRun { config: cfg, states }, SetRun { runs }))
}

fn write_trace_to(path: &Path, run: &SimRun) -> Result<()> {
    let mut w = create_file(path)?;
    write_trace(&emit_trace(run), &mut w)?;
    w.flush()?;
    Ok(())
}

fn write_plot(path: &Path, run: &SimRun, clean: &SimRun, set: &SetRun) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header: Vec<String> = [
        "t",
        "headway",
        "headway_clean",
        "rel_vel",
        "ttc",
        "pb2_stop",
        "aeb_status",
        "fcw",
    ]
    .map(String::from)
    .to_vec();
    header.extend(set.runs.iter().map(|r| r.id.clone()));
    w.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (i, s) in run.states.iter().enumerate() {
        let mut row = vec![
            s.t.to_string(),
            opt(s.headway),
            opt(clean.states.get(i).and_then(|c| c.headway)),
            opt(s.rel_vel),
            opt(s.ttc),
            s.stop_times.pb2.to_string(),
            s.aeb_status.to_string(),
            (s.fcw_active as u8).to_string(),
        ];
        for r in &set.runs {
            let cell = r
                .result
                .as_ref()
                .ok()
                .and_then(|o| o.verdict())
                .and_then(|v| {
                    let events = v.events();
                    events.binary_search_by_key(&s.t, |e| e.t).ok().map(|k| events[k].value)
                })
                .and_then(|v| v.as_bool())
                .map(|b| (b as u8).to_string())
                .unwrap_or_default();
            row.push(cell);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

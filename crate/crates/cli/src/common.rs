use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use rvmon_core::attack::AttackSpec;
use rvmon_core::builtin::builtin;
use rvmon_core::engine::{Level, MonitorInstance, StreamBinding, VerdictReport};
use rvmon_core::lang::CompiledSpec;
use serde::Serialize;

pub const REPORT_FILE: &str = "report.json";
pub const VERDICT_FILE: &str = "verdicts.jsonl";
pub const SIM_SUMMARY_FILE: &str = "sim_summary.json";

/// A spec named on the command line: a file path or a built-in name.
pub struct SpecSource {
    pub id: String,
    pub level: Option<Level>,
    pub spec: CompiledSpec,
}

pub fn load_spec(arg: &str) -> Result<SpecSource> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec = CompiledSpec::from_source(&text).with_context(|| format!("in {}", path.display()))?;
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg).to_string();
        return Ok(SpecSource { id, level: None, spec });
    }
    match builtin(arg) {
        Some(b) => Ok(SpecSource {
            id: b.name.to_string(),
            level: Some(b.level),
            spec: b.compile(),
        }),
        None => bail!("`{arg}` is neither a spec file nor a built-in (p1, p2, p3, p4)"),
    }
}

pub fn parse_bind(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((input, channel)) if !input.is_empty() && !channel.is_empty() => {
            Ok((input.to_string(), channel.to_string()))
        }
        _ => Err(format!("expected INPUT=CHANNEL, got `{s}`")),
    }
}

/// Builds one monitor per spec. Each binding applies to every spec declaring
/// that input.
pub fn build_monitors(
    specs: &[String],
    binds: &[(String, String)],
    level: Option<Level>,
    verdict: Option<&str>,
) -> Result<Vec<MonitorInstance>> {
    if verdict.is_some() && specs.len() != 1 {
        bail!("--verdict needs exactly one --spec");
    }
    let sources = specs.iter().map(|s| load_spec(s)).collect::<Result<Vec<_>>>()?;
    for (input, _) in binds {
        if !sources
            .iter()
            .any(|s| s.spec.typed.inputs.iter().any(|i| &i.name == input))
        {
            bail!("--bind names `{input}`, which no spec declares as an input");
        }
    }
    let mut monitors = Vec::new();
    for src in sources {
        if monitors.iter().any(|m: &MonitorInstance| m.id == src.id) {
            bail!("monitor `{}` given twice", src.id);
        }
        let mut binding = StreamBinding::identity(&src.spec.typed);
        for (input, channel) in binds {
            if binding.channel(input).is_some() {
                binding = binding.bind(input, channel);
            }
        }
        let level = level.or(src.level).unwrap_or(Level::Data);
        let verdict = match verdict {
            Some(v) => v.to_string(),
            None => rvmon_core::engine::default_verdict(&src.spec.typed)
                .with_context(|| format!("spec `{}` has no `attack` output; choose one with --verdict", src.id))?,
        };
        monitors.push(MonitorInstance::new(src.id, level, src.spec, binding, verdict)?);
    }
    Ok(monitors)
}

/// `--attack` value.
#[derive(Debug, Clone, PartialEq)]
pub enum AttackArg {
    None,
    Data,
    Functional,
    File(PathBuf),
}

impl FromStr for AttackArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(AttackArg::None),
            "data" => Ok(AttackArg::Data),
            "functional" => Ok(AttackArg::Functional),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(AttackArg::File(PathBuf::from(p))),
                _ => Err(format!("expected none, data, functional or file:PATH, got `{s}`")),
            },
        }
    }
}

impl AttackArg {
    pub fn resolve(&self) -> Result<AttackSpec> {
        Ok(match self {
            AttackArg::None => AttackSpec::None,
            AttackArg::Data => AttackSpec::velocity_spoof(),
            AttackArg::Functional => AttackSpec::stage_clamp(),
            AttackArg::File(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                AttackSpec::from_toml(&text)
                    .map_err(anyhow::Error::msg)
                    .with_context(|| format!("in {}", path.display()))?
            }
        })
    }
}

pub fn create_file(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = create_file(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn fmt_secs(t: Option<rvmon_core::stream::Time>) -> String {
    t.map_or_else(|| "-".to_string(), |t| t.to_string())
}

/// Per-monitor table plus the level attribution line.
pub fn render_report(report: &VerdictReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:<11} {:>10} {:>9} {:>15}\n",
        "monitor", "level", "violations", "intervals", "first detection"
    ));
    for m in &report.monitors {
        match &m.error {
            Some(err) => out.push_str(&format!("{:<12} {:<11} error: {err}\n", m.id, m.level.to_string())),
            None => out.push_str(&format!(
                "{:<12} {:<11} {:>10} {:>9} {:>15}\n",
                m.id,
                m.level.to_string(),
                m.violation_ticks,
                m.intervals.len(),
                fmt_secs(m.first_detection)
            )),
        }
    }
    out.push_str(&attribution(report));
    out.push('\n');
    out
}

pub fn attribution(report: &VerdictReport) -> String {
    if !report.has_violations() {
        return "no violations".to_string();
    }
    let data = report.detections(Level::Data);
    let functional = report.detections(Level::Functional);
    let noun = if data == 1 { "detection" } else { "detections" };
    format!("Data monitor: {data} {noun}; Functional monitor: {functional}")
}

//! The `windcosim` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use cosim::Scheme;
use scenario::{build_large_scale, build_monolithic, build_small_scale, run_scenario, Scenario};
use serde::Deserialize;
use wtg_control::{envelope_check, FrtEnvelope};

use crate::bench::{bench_scaling, format_table};
use crate::compare::{compare_traces, DEFAULT_EXCLUDE_STEPS};
use crate::error::HarnessError;
use crate::plot::gnuplot_script;
use crate::trace_io::{channel, load, save};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUN: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "windcosim", version, about = "Wind power plant fault ride-through co-simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write its trace.
    Run {
        /// Scenario file, or one of the built-in names monolithic,
        /// small_scale, large_scale.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        scheme: Option<Scheme>,
        #[arg(long)]
        macro_step: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        /// Output directory for trace.csv, trace.meta.json and plot.gp.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two traces channel by channel.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "P_wpp,V_pcc")]
        channels: Vec<String>,
        /// One tolerance for every channel, or one per channel (pu).
        #[arg(long, value_delimiter = ',', default_value = "0.017")]
        tol: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_EXCLUDE_STEPS)]
        exclude_window: usize,
        /// Also write the report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check a voltage channel against a ride-through envelope.
    Envelope {
        #[arg(long)]
        trace: PathBuf,
        /// TOML file with `points = [[t, v], ...]`; the default envelope if
        /// omitted.
        #[arg(long)]
        envelope: Option<PathBuf>,
        #[arg(long)]
        onset: f64,
        #[arg(long, default_value = "V_pcc")]
        channel: String,
    },
    /// Time repeated runs of several scenarios.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "monolithic,small_scale,large_scale")]
        scenarios: Vec<String>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Print a built-in scenario as TOML.
    ScenarioPrint { name: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvelopeFile {
    points: FrtEnvelope,
}

pub fn builtin(name: &str) -> Option<Result<Scenario, HarnessError>> {
    match name {
        "monolithic" => Some(Ok(build_monolithic())),
        "small_scale" => Some(Ok(build_small_scale())),
        "large_scale" => Some(build_large_scale().map_err(Into::into)),
        _ => None,
    }
}

/// A scenario file if `arg` names one, else a built-in scenario.
pub fn resolve_scenario(arg: &str) -> Result<Scenario, HarnessError> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(Scenario::load(path)?);
    }
    builtin(arg).unwrap_or_else(|| {
        Err(HarnessError::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or built-in scenario")))
    })
}

fn override_master(s: &mut Scenario, scheme: Option<Scheme>, macro_step: Option<f64>, t_end: Option<f64>) -> Result<(), HarnessError> {
    if let Some(x) = scheme {
        s.master.scheme = x;
    }
    if let Some(h) = macro_step {
        s.master.macro_step = h;
        // The grid never steps coarser than the coupling.
        s.master.micro_step = s.master.micro_step.min(h);
    }
    if let Some(t) = t_end {
        s.master.t_end = t;
    }
    s.validate()?;
    Ok(())
}

/// Parses `args` (program name first) and executes the command, writing
/// human-readable output to `out` and diagnostics to `err`. Returns the
/// process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &mut dyn Write, text: impl std::fmt::Display) {
    let _ = writeln!(out, "{text}");
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32, HarnessError> {
    match cmd {
        Command::Run { scenario, scheme, macro_step, t_end, out: dir } => {
            let mut s = resolve_scenario(&scenario)?;
            override_master(&mut s, scheme, macro_step, t_end)?;
            let run = match run_scenario(&s) {
                Ok(r) => r,
                Err(e) => {
                    emit(out, format!("run failed: {e}"));
                    return Ok(EXIT_RUN);
                }
            };
            std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
            let csv = dir.join("trace.csv");
            save(&run.trace, &csv)?;
            let names: Vec<&str> = ["V_pcc", "P_wpp"].into_iter().filter(|c| run.trace.channel(c).is_some()).collect();
            let gp = dir.join("plot.gp");
            std::fs::write(&gp, gnuplot_script("trace.csv", &s.name, &names)).map_err(|e| HarnessError::io(&gp, e))?;
            let m = &run.trace.meta;
            emit(
                out,
                format!(
                    "{}: {} components, {} steps of {} s, {} rows, {:.3} s wall clock -> {}",
                    m.scenario,
                    m.components,
                    m.steps,
                    m.macro_step,
                    run.trace.len(),
                    m.wall_clock_s,
                    csv.display()
                ),
            );
            for w in &m.warnings {
                emit(out, format!("warning: {w}"));
            }
            Ok(EXIT_OK)
        }
        Command::Compare { a, b, channels, tol, exclude_window, report } => {
            let (ta, tb) = (load(&a)?, load(&b)?);
            let r = compare_traces(&ta, &tb, &channels, &tol, exclude_window)?;
            emit(out, &r);
            if let Some(p) = report {
                let json = serde_json::to_string_pretty(&r).expect("report serializes");
                std::fs::write(&p, json + "\n").map_err(|e| HarnessError::io(&p, e))?;
            }
            Ok(if r.pass() { EXIT_OK } else { EXIT_TOLERANCE })
        }
        Command::Envelope { trace, envelope, onset, channel: name } => {
            let t = load(&trace)?;
            let env = match envelope {
                None => FrtEnvelope::default(),
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| HarnessError::io(&p, e))?;
                    toml::from_str::<EnvelopeFile>(&text)
                        .map_err(|e| HarnessError::Format { path: p.display().to_string(), message: e.to_string() })?
                        .points
                }
            };
            let rep = envelope_check(&t.time, channel(&t, &name)?, onset, &env)?;
            emit(
                out,
                format!(
                    "{name} vs envelope from t = {onset}: {} (min margin {:.4} pu{})",
                    if rep.compliant { "compliant" } else { "VIOLATED" },
                    rep.min_margin,
                    rep.first_violation.map(|t| format!(", first violation at {t} s")).unwrap_or_default()
                ),
            );
            Ok(if rep.compliant { EXIT_OK } else { EXIT_TOLERANCE })
        }
        Command::Bench { scenarios, reps, t_end } => {
            let list = scenarios
                .iter()
                .map(|n| {
                    let mut s = resolve_scenario(n)?;
                    override_master(&mut s, None, None, t_end)?;
                    Ok(s)
                })
                .collect::<Result<Vec<_>, HarnessError>>()?;
            let rows = bench_scaling(&list, reps)?;
            emit(out, format_table(&rows).trim_end());
            Ok(EXIT_OK)
        }
        Command::ScenarioPrint { name } => {
            let s = builtin(&name)
                .ok_or_else(|| HarnessError::Invalid(format!("no built-in scenario `{name}`")))??;
            emit(out, s.to_toml()?.trim_end());
            Ok(EXIT_OK)
        }
    }
}

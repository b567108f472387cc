//! Command-line front end.
//!
//! Failures print a single line `error kind=<kind> message=<text>` on stderr
//! and exit with status 1. Usage errors exit with status 2.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, RunMode, Scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::output::OutputBundle;
use crate::presets::preset;
use crate::sim::{build_table, run_adaptive, run_bandwidth_split, run_frontier, run_grid_thresholds};

pub const SEED_ENV: &str = "GOCOEXIST_SEED";

#[derive(Debug, Parser)]
#[command(name = "gocoexist", version, about = "Goal-oriented and data-oriented link coexistence simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the mode selected by `run.mode`.
    Run(Common),
    /// Fixed-decision heat maps for every goal threshold of the sweep.
    Sweep(Common),
    /// Orthogonal bandwidth-split baseline.
    Split(Common),
    /// Cost/effectiveness frontier over trade-off weights.
    Frontier(Common),
    /// Build and save the success-probability table only.
    Table(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file in TOML.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment protocol.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured seed and the environment.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated trade-off weights.
    #[arg(long, value_delimiter = ',')]
    omega: Option<Vec<f64>>,
    #[arg(long)]
    quiet: bool,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Run(_) => "run",
            Command::Sweep(_) => "sweep",
            Command::Split(_) => "split",
            Command::Frontier(_) => "frontier",
            Command::Table(_) => "table",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Run(c) | Command::Sweep(c) | Command::Split(c) | Command::Frontier(c) | Command::Table(c) => c,
        }
    }
}

/// Loads the configuration and applies seed and weight overrides.
fn resolve(c: &Common, env_seed: Option<String>) -> Result<ScenarioConfig> {
    let mut cfg = match (&c.config, &c.preset) {
        (Some(path), _) => parse_config(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => return Err(Error::validation("--config", "either --config or --preset is required")),
    };
    if let Some(seed) = c.seed {
        cfg.run.seed = seed;
    } else if let Some(raw) = env_seed {
        cfg.run.seed = raw
            .trim()
            .parse()
            .map_err(|_| Error::validation(SEED_ENV, format!("`{raw}` is not an unsigned integer")))?;
    }
    if let Some(omegas) = &c.omega {
        if omegas.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::validation("--omega", "weights must be finite and >= 0"));
        }
        cfg.sweep.omega = omegas.clone();
        if let [w] = omegas.as_slice() {
            cfg.solver.omega = *w;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn say(quiet: bool, line: String) {
    if !quiet {
        println!("{line}");
    }
}

fn execute(cmd: &Command, cfg: &ScenarioConfig) -> Result<()> {
    let c = cmd.common();
    let out = OutputBundle::create(&c.out)?;
    out.write_manifest(cfg, cmd.name())?;
    let mode = match cmd {
        Command::Run(_) => cfg.run.mode,
        Command::Sweep(_) => RunMode::GridSweep,
        Command::Split(_) => RunMode::BandwidthSplit,
        Command::Frontier(_) => return frontier(cfg, &out, c.quiet),
        Command::Table(_) => return table(cfg, &out, c.quiet),
    };
    match mode {
        RunMode::Adaptive | RunMode::Genie => {
            let log = run_adaptive(cfg)?;
            out.write_trace(&log)?;
            let stability = log.stability();
            out.write_summary(&[
                ("slots", log.len().to_string()),
                ("effectiveness", log.effectiveness().to_string()),
                ("effectiveness_se", log.effectiveness_standard_error().to_string()),
                ("cost", log.cost().to_string()),
                ("cost_se", log.cost_standard_error().to_string()),
                ("mean_rate_bps", log.mean_rate().to_string()),
                ("final_z_over_t", stability.final_ratio.to_string()),
                ("stable", stability.stable.to_string()),
            ])?;
            say(
                c.quiet,
                format!(
                    "effectiveness {:.4} cost {:.4} -> {}",
                    log.effectiveness(),
                    log.cost(),
                    out.dir().display()
                ),
            );
        }
        RunMode::GridSweep => {
            let s = Scenario::new(cfg)?;
            let maps = run_grid_thresholds(&s, &cfg.theta_sweep())?;
            for (k, map) in maps.iter().enumerate() {
                out.write_heatmap(map, &k.to_string())?;
                for contour in map.contours() {
                    say(
                        c.quiet,
                        format!(
                            "theta_th {} threshold {} feasible cells {}",
                            map.theta_th, contour.threshold, contour.feasible_cell_count
                        ),
                    );
                }
            }
        }
        RunMode::BandwidthSplit => {
            let result = run_bandwidth_split(cfg)?;
            out.write_split(&result)?;
            match result.best() {
                Ok(b) => say(c.quiet, format!("best GO fraction {} cost {:.4}", b.go_fraction, b.cost)),
                Err(e) => say(c.quiet, e.to_string()),
            }
        }
    }
    Ok(())
}

fn frontier(cfg: &ScenarioConfig, out: &OutputBundle, quiet: bool) -> Result<()> {
    let points = run_frontier(cfg, &cfg.omega_sweep())?;
    out.write_frontier(&points)?;
    say(quiet, format!("{} frontier points -> {}", points.len(), out.dir().display()));
    Ok(())
}

fn table(cfg: &ScenarioConfig, out: &OutputBundle, quiet: bool) -> Result<()> {
    let s = Scenario::new(cfg)?;
    let table = build_table(&s, cfg.requirements.theta_th, 0)?;
    let path = out.write_table(&table, "success_table.csv")?;
    say(quiet, format!("{} PER levels -> {}", table.len(), path.display()));
    Ok(())
}

/// One-line error report.
pub fn error_line(e: &Error) -> String {
    let message = e.to_string().replace(['\n', '\r'], " ");
    format!("error kind={} message={message}", e.kind())
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// status.
pub fn cli_entry<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = resolve(cli.command.common(), std::env::var(SEED_ENV).ok())
        .and_then(|cfg| execute(&cli.command, &cfg));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            1
        }
    }
}

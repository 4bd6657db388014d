//! `sisrd`: command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a monitor or comparison
//! fails, 2 on configuration or usage errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use sisrd_core::csvio::{write_json, write_sweep_csv};
use sisrd_core::experiment::{write_simulation, ReproduceSummary};
use sisrd_core::tables::{find_row, rows_of};
use sisrd_core::{analyze, load_config, reproduce, reproduce_batch, simulate, sweep, verify, Error, Mode};

const WORKERS_ENV: &str = "SISRD_WORKERS";

#[derive(Parser)]
#[command(name = "sisrd", version, about = "Reaction-diffusion SIS model: analysis, simulation and table reproduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ode,
    Pde,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Ode => Mode::Ode,
            ModeArg::Pde => Mode::Pde,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// R0, equilibria, stability classes, θ-window and verdict as JSON.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Also write the document here.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Run the configured simulation and write CSV + summary.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `output.dir` of the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Re-run a built-in table row and compare with its reference values.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        table: Option<u8>,
        #[arg(long)]
        set: Option<u8>,
        /// Set ids repeat between the ODE and PDE halves of each table.
        #[arg(long, value_enum, default_value = "pde")]
        mode: ModeArg,
        #[arg(long)]
        out_dir: PathBuf,
        /// Every row of `--table`, or of all tables when no table is given.
        #[arg(long)]
        all: bool,
    },
    /// Analyze the config at each value of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Lambda, mu, lambda, sigma, d1, d2, alpha or k (Greek names accepted).
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Admissibility of φ plus every monitor of the configured run.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn is_config_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(
            c.downcast_ref::<Error>(),
            Some(
                Error::ConfigParse(_)
                    | Error::ConfigValidation(_)
                    | Error::UnknownParameter(_)
                    | Error::UnknownRow { .. }
                    | Error::InvalidParams(_)
                    | Error::Profile(_)
            )
        )
    }) || e.downcast_ref::<UsageError>().is_some()
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn init_workers() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{WORKERS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow!("cannot start worker pool: {e}"))
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load(path: &Path) -> anyhow::Result<sisrd_core::ExperimentConfig> {
    load_config(path)
        .map_err(|e| match e {
            Error::Io { .. } => usage(e.to_string()),
            other => anyhow::Error::new(other),
        })
        .with_context(|| format!("loading {}", path.display()))
}

fn report_row(s: &ReproduceSummary) {
    let verdict = if s.passed { "PASS" } else { "FAIL" };
    println!("{:<22} {verdict}  R0 = {:.6}", s.id, s.analysis.r0);
    for c in &s.comparisons {
        println!(
            "    {:<9} computed {:<22} printed {:<9} {:?}",
            c.quantity,
            c.computed,
            c.printed,
            c.status
        );
    }
    let conv = &s.simulation.convergence;
    println!(
        "    converged {} (distance {:.3e}, tolerance {:.0e}); monitors {}",
        conv.passed,
        conv.distance,
        conv.tolerance,
        if s.simulation.monitors_passed { "pass" } else { "fail" }
    );
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Analyze { config, json_out } => {
            let a = analyze(&load(&config)?)?;
            if let Some(path) = json_out {
                write_json(&path, &a)?;
            }
            print_json(&a)?;
            Ok(true)
        }
        Command::Simulate { config, out_dir } => {
            let cfg = load(&config)?;
            let dir = out_dir
                .or_else(|| cfg.output_dir.clone())
                .ok_or_else(|| usage("simulate needs --out-dir or output.dir in the config"))?;
            let sim = simulate(&cfg)?;
            let files = write_simulation(&sim, &cfg, &dir)?;
            let s = &sim.summary;
            println!(
                "{} run to t = {} ({} steps, dt = {:e}); converged {}; monitors {}",
                s.mode,
                s.t_end,
                s.steps,
                s.dt,
                s.convergence.passed,
                if s.monitors_passed { "pass" } else { "fail" }
            );
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(s.monitors_passed)
        }
        Command::Reproduce {
            table,
            set,
            mode,
            out_dir,
            all,
        } => {
            if all {
                let rows = rows_of(table);
                let results = reproduce_batch(&rows, &out_dir);
                let mut summaries = Vec::with_capacity(results.len());
                for r in results {
                    summaries.push(r?);
                }
                for s in &summaries {
                    report_row(s);
                }
                let index: Vec<_> = summaries
                    .iter()
                    .map(|s| serde_json::json!({ "id": s.id, "passed": s.passed }))
                    .collect();
                write_json(out_dir.join("index.json"), &index)?;
                Ok(summaries.iter().all(|s| s.passed))
            } else {
                let (Some(table), Some(set)) = (table, set) else {
                    return Err(usage("reproduce needs --table and --set, or --all"));
                };
                let row = find_row(table, mode.into(), set)?;
                let s = reproduce(&row, &out_dir)?;
                report_row(&s);
                Ok(s.passed)
            }
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => {
            let cfg = load(&config)?;
            let rows = sweep(&cfg, &param, &values)?;
            write_sweep_csv(&out, &rows)?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(true)
        }
        Command::Verify { config } => {
            let r = verify(&load(&config)?)?;
            print_json(&r)?;
            Ok(r.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = init_workers().and_then(|_| run(cli));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}

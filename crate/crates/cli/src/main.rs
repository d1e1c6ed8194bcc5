use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hoekf_cli::config::{parse_orders, Config};
use hoekf_cli::experiments::{probe_oracle, run_duffing, run_linear, run_wave, selftest, Outputs};
use hoekf_cli::CliError;
use hoekf_core::io::fmt_num;

#[derive(Parser)]
#[command(name = "hoekf", version, about = "Higher-order extended Kalman filter experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Duffing,
    Wave,
    Linear,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV tables and SVG charts.
    Run {
        experiment: Experiment,
        /// Configuration file with `section.name = value` lines.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated observer orders, e.g. `2,3,5`.
        #[arg(long)]
        orders: Option<String>,
        /// Output weight Q (a single Duffing run instead of the configured list).
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also integrate the Mortensen reference (Duffing).
        #[arg(long)]
        with_oracle: bool,
        /// Write the stored P_j blocks into trajectory files.
        #[arg(long)]
        tensors: bool,
    },
    /// Evaluate the Duffing value function at one point.
    ProbeOracle {
        #[arg(long)]
        t: f64,
        /// State components, space separated or `--xi=a,b`.
        #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true, required = true)]
        xi: Vec<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output weight Q; defaults to the first configured value.
        #[arg(long)]
        q: Option<f64>,
        /// Also compute the value Hessian by finite differences.
        #[arg(long)]
        hessian: bool,
        /// Directory for a copy of the table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the tensor and observer property suites.
    Selftest {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load(path: Option<&PathBuf>) -> Result<Config, CliError> {
    match path {
        Some(p) => Config::load(p),
        None => Config::parse(""),
    }
}

fn print_lines(lines: &[String]) {
    let mut out = std::io::stdout().lock();
    for l in lines {
        let _ = writeln!(out, "{l}");
    }
}

fn execute(cmd: Command) -> Result<ExitCode, CliError> {
    match cmd {
        Command::Run {
            experiment,
            config,
            orders,
            q,
            out,
            with_oracle,
            tensors,
        } => {
            let mut cfg = load(config.as_ref())?;
            if let Some(o) = orders {
                cfg.run.orders = Some(parse_orders(&o)?);
            }
            if let Some(q) = q {
                match experiment {
                    Experiment::Duffing => cfg.duffing.q = vec![q],
                    Experiment::Wave => cfg.wave.q = q,
                    Experiment::Linear => cfg.linear.q = q,
                }
            }
            cfg.run.with_oracle |= with_oracle;
            cfg.run.tensors |= tensors;
            cfg.validate()?;
            if let Experiment::Wave = experiment {
                hoekf_cli::experiments::wave_orders(&cfg)?;
            }
            let mut outputs = Outputs::create(&out)?;
            let summary = match experiment {
                Experiment::Duffing => run_duffing(&cfg, &mut outputs)?,
                Experiment::Wave => run_wave(&cfg, &mut outputs)?,
                Experiment::Linear => run_linear(&cfg, &mut outputs)?,
            };
            print_lines(&summary);
            println!("wrote {} files to {}", outputs.written().len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::ProbeOracle {
            t,
            xi,
            config,
            q,
            hessian,
            out,
        } => {
            let cfg = load(config.as_ref())?;
            let q = q.unwrap_or(cfg.duffing.q[0]);
            let table = probe_oracle(&cfg, t, &xi, q, hessian)?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("oracle_probe.csv"), &table)?;
            }
            std::io::stdout().write_all(&table)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { config } => {
            let cfg = load(config.as_ref())?;
            let outcomes = selftest(&cfg);
            let lines: Vec<String> = outcomes
                .iter()
                .map(|c| {
                    format!(
                        "{} {} instances={} worst={} tol={}",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.instances,
                        fmt_num(c.worst),
                        fmt_num(c.tol)
                    )
                })
                .collect();
            print_lines(&lines);
            if outcomes.iter().all(|c| c.passed) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("hoekf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

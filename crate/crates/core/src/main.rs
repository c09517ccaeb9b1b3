//! Command-line front end for the rate-region simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fdnoma::driver::{self, ExperimentConfig};
use fdnoma::Error;

#[derive(Parser)]
#[command(name = "fdnoma", version, about = "Full-duplex cognitive-relay NOMA rate-region simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo rate-region sweep; prints CSV and optionally writes it to a file
    RateRegion {
        /// Flat key = value config file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of Monte Carlo trials
        #[arg(long)]
        trials: Option<usize>,
        /// Write the CSV here as well as to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every scheme on one channel and dump full diagnostics
    Single {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Trial index selecting the channel substream
        #[arg(long, default_value_t = 0)]
        trial: u64,
        /// Far-user rate target, bits/s/Hz
        #[arg(long)]
        rbar: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Include the per-grid-point line-search trace
        #[arg(short, long)]
        verbose: bool,
    },
    /// Cross-check the optimizer against the brute-force oracle (nt = 2)
    OracleCheck {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of seeded channels to compare
        #[arg(long, default_value_t = 20)]
        channels: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Dump one relaxation instance and its solution in plain text
    SdpDebug {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long)]
        rbar: f64,
        /// BS power in watts (default: midpoint of the feasible interval)
        #[arg(long)]
        ps: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the dump here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>, seed: Option<u64>) -> Result<ExperimentConfig, Error> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::RateRegion {
            config,
            seed,
            trials,
            out,
        } => {
            let mut cfg = load_config(&config, seed)?;
            if let Some(trials) = trials {
                cfg.n_trials = trials;
            }
            if let Some(out) = out {
                cfg.output_path = Some(out);
            }
            let report = driver::run_rate_region(&cfg)?;
            print!("{}", driver::rows_to_csv(&report.rows));
            if report.error_points > 0 {
                eprintln!("warning: {} points failed in the solver and were counted infeasible", report.error_points);
            }
            if let Some(path) = &cfg.output_path {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Single {
            config,
            trial,
            rbar,
            seed,
            verbose,
        } => {
            let cfg = load_config(&config, seed)?;
            print!("{}", driver::run_single(&cfg, trial, rbar, verbose)?);
            Ok(())
        }
        Command::OracleCheck {
            config,
            channels,
            seed,
        } => {
            let cfg = load_config(&config, seed)?;
            let report = driver::run_oracle_check(&cfg, channels)?;
            print!("{report}");
            if report.pass {
                Ok(())
            } else {
                Err(Error::InvalidParams(
                    "oracle check failed (gap above 2% or agreement below 98%)".into(),
                ))
            }
        }
        Command::SdpDebug {
            config,
            trial,
            rbar,
            ps,
            seed,
            out,
        } => {
            let cfg = load_config(&config, seed)?;
            match out {
                Some(path) => {
                    let mut file = std::fs::File::create(&path).map_err(|source| Error::Io {
                        path: path.clone(),
                        source,
                    })?;
                    driver::sdp_debug(&cfg, trial, rbar, ps, &mut file)?;
                    eprintln!("wrote {}", path.display());
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    driver::sdp_debug(&cfg, trial, rbar, ps, &mut stdout)?;
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_) | Error::InvalidParams(_) => 2,
                Error::Io { .. } => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use adds_cli::commands::{
    cmd_attack_check, cmd_certify, cmd_oracle_check, cmd_sweep, oracle_verdict,
    write_attack_report, AttackOptions, CertifyOptions,
};
use adds_cli::{CliError, ExperimentConfig, Result};
use adds_core::exec::Parallelism;
use adds_core::oracle::{BatteryOptions, OracleCheck};
use clap::{Args, Parser, Subcommand};

/// Certified smoothing experiments on synthetic Gaussian-mixture tasks.
///
/// Exit codes: 0 ok, 1 config error, 2 I/O error, 3 oracle failure.
/// ADDS_WORKERS sets the worker thread count.
#[derive(Parser)]
#[command(name = "adds", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify every test point under every configured pipeline.
    Certify(RunArgs),
    /// Certify over the config's [sweep] grid of guidance scales and step counts.
    Sweep(RunArgs),
    /// Perturb certified points inside their radius and count prediction flips.
    AttackCheck {
        #[arg(long)]
        config: PathBuf,
        /// CSV written by `certify`.
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Perturbation norm as a fraction of the certified radius.
        #[arg(long, default_value_t = 0.99)]
        fraction: f64,
        /// Samples per prediction (defaults to the config's n0).
        #[arg(long)]
        n0: Option<usize>,
        /// JSON report path (defaults to <csv>.attack.json).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
    /// Run the oracle battery.
    OracleCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated checks to run (default: all).
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Undercharge the privacy accountant; the ledger check must fail.
        #[arg(long)]
        inject_fault: bool,
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output CSV path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write guided trajectories and spend ledgers to this directory.
    #[arg(long)]
    dump_trajectory: Option<PathBuf>,
    /// Number of test points to dump trajectories for.
    #[arg(long, default_value_t = 1)]
    dump_points: usize,
    #[arg(long)]
    sequential: bool,
}

fn parallelism(sequential: bool) -> Parallelism {
    if sequential {
        Parallelism::Sequential
    } else {
        Parallelism::default()
    }
}

fn configure_workers() -> Result<()> {
    let Ok(value) = std::env::var("ADDS_WORKERS") else {
        return Ok(());
    };
    let workers: usize = value.parse().ok().filter(|&w| w > 0).ok_or_else(|| {
        CliError::Config(format!("ADDS_WORKERS={value} is not a positive integer"))
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    Ok(())
}

fn load(args: &RunArgs) -> Result<(ExperimentConfig, CertifyOptions)> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(out) = &args.output {
        cfg.output = out.clone();
    }
    let opts = CertifyOptions {
        parallelism: parallelism(args.sequential),
        dump_trajectory: args.dump_trajectory.clone(),
        dump_points: args.dump_points,
    };
    Ok((cfg, opts))
}

fn run(cli: Cli) -> Result<()> {
    configure_workers()?;
    match cli.command {
        Command::Certify(args) => {
            let (cfg, opts) = load(&args)?;
            let out = cmd_certify(&cfg, &opts)?;
            print!("{}", out.summary.to_markdown());
            println!(
                "\nwrote {} and {}",
                out.csv_path.display(),
                out.summary_path.display()
            );
        }
        Command::Sweep(args) => {
            let (cfg, opts) = load(&args)?;
            let out = cmd_sweep(&cfg, &opts)?;
            print!("{}", out.summary.to_markdown());
            println!(
                "\nwrote {} and {}",
                out.csv_path.display(),
                out.summary_path.display()
            );
        }
        Command::AttackCheck {
            config,
            csv,
            trials,
            fraction,
            n0,
            report,
            sequential,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let opts = AttackOptions {
                trials,
                fraction,
                n0,
                parallelism: parallelism(sequential),
            };
            let rep = cmd_attack_check(&cfg, &csv, &opts)?;
            for g in &rep.groups {
                println!(
                    "{:<14} sigma={:<4} votes={} rows={:<4} trials={:<7} flips={:<5} rate={:.4} ± {:.4} (95% upper {:.4}) abstain={}",
                    g.method, g.sigma, g.votes, g.rows_checked, g.trials, g.flips, g.flip_rate,
                    g.flip_rate_stderr, g.flip_rate_upper_95, g.abstentions
                );
            }
            let t = &rep.total;
            println!(
                "total: rows={} trials={} flips={} rate={:.4} ± {:.4} (95% upper {:.4}) abstain={}",
                t.rows_checked,
                t.trials,
                t.flips,
                t.flip_rate,
                t.flip_rate_stderr,
                t.flip_rate_upper_95,
                t.abstentions
            );
            if rep.skipped_rows > 0 {
                println!("skipped rows: {}", rep.skipped_rows);
            }
            let path = report.unwrap_or_else(|| csv.with_extension("attack.json"));
            write_attack_report(&path, &rep)?;
            println!("wrote {}", path.display());
        }
        Command::OracleCheck {
            seed,
            checks,
            inject_fault,
            sequential,
        } => {
            let selection: Vec<OracleCheck> = match checks {
                None => OracleCheck::ALL.to_vec(),
                Some(names) => names
                    .iter()
                    .filter(|n| !n.is_empty())
                    .map(|n| n.parse())
                    .collect::<std::result::Result<_, _>>()?,
            };
            let opts = BatteryOptions {
                seed,
                inject_filter_fault: inject_fault,
                parallelism: parallelism(sequential),
            };
            let reports = cmd_oracle_check(&selection, &opts)?;
            for r in &reports {
                println!("{r}");
            }
            oracle_verdict(&reports)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use triage_core::config::{Config, Horizon};
use triage_core::par::Execution;
use triage_core::strategies::Strategy;

/// Exit statuses, one per failure family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Io = 1,
    Usage = 2,
    Ingest = 3,
    Training = 4,
    SolveTimeout = 5,
    Validation = 6,
}

/// An error together with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub error: anyhow::Error,
}

pub trait OrExit<T> {
    fn or_exit(self, status: Status) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn or_exit(self, status: Status) -> Result<T, Failure> {
        self.map_err(|e| Failure { status, error: e.into() })
    }
}

#[derive(Parser)]
#[command(name = "triage", version, about = "Schedule- and dependency-aware bug triage replay")]
struct Cli {
    /// TOML configuration file; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Command-line values that win over the configuration file.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Planning horizon in days, or `auto`.
    #[arg(long, global = true)]
    horizon: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run every data-parallel stage on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Node budget per solver call.
    #[arg(long, global = true)]
    max_nodes: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch or load a project history and build the cleaned dataset.
    Ingest {
        /// Bugzilla base URL; read-only requests only.
        #[arg(long, conflicts_with = "dump")]
        endpoint: Option<String>,
        /// Archived dump with inline histories.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Dataset directory to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the suitability, topic and cost models on the training window.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay the test window under one strategy.
    Simulate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long, default_value = "sdabt")]
        strategy: Strategy,
        /// Output directory for the ledger and reports.
        #[arg(long)]
        out: PathBuf,
        /// Also write every day's 0-1 program in LP format into this directory.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// Replay once per alpha and tabulate accuracy and overdue share.
    Sweep {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        models: PathBuf,
        /// Comma-separated values; defaults to the configured alpha.
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        #[arg(long, default_value = "sdabt")]
        strategy: Strategy,
        /// CSV file to write; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate replay ledgers and test the first against the others.
    Compare {
        #[arg(required = true)]
        ledgers: Vec<PathBuf>,
        /// Models file whose training experience scores accuracy.
        #[arg(long)]
        models: Option<PathBuf>,
        /// CSV file for the metric rows.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic history as a dataset directory.
    Synth {
        /// JSON or TOML generator settings; `--seed` overrides their seed.
        #[arg(long)]
        settings: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    let mut config: Config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).or_exit(Status::Usage)?;
            toml::from_str(&text).or_exit(Status::Usage)?
        }
        None => Config::default(),
    };
    let o = &cli.overrides;
    if let Some(a) = o.alpha {
        config.alpha = a;
    }
    if let Some(h) = &o.horizon {
        config.horizon = match h.as_str() {
            "auto" => Horizon::Auto,
            n => match n.parse::<usize>() {
                Ok(d) if d > 0 => Horizon::Days(d),
                _ => return Err(anyhow::anyhow!("invalid horizon `{n}`")).or_exit(Status::Usage),
            },
        };
    }
    if let Some(s) = o.seed {
        config.seed = s;
    }
    if o.threads.is_some() {
        config.threads = o.threads;
    }
    if o.sequential {
        config.execution = Execution::Sequential;
    }
    if let Some(n) = o.max_nodes {
        config.solver.max_nodes = n;
    }
    config.validate().or_exit(Status::Usage)?;
    Ok(config)
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let config = load_config(&cli)?;
    let seed = cli.overrides.seed;
    let work = || match cli.command {
        Command::Ingest { endpoint, dump, out } => commands::ingest(&config, endpoint, dump, &out),
        Command::Train { dataset, out } => commands::train(&config, &dataset, &out),
        Command::Simulate { dataset, models, strategy, out, dump_lp } => {
            commands::simulate(&config, &dataset, &models, strategy, &out, dump_lp.as_deref())
        }
        Command::Sweep { dataset, models, alphas, strategy, out } => {
            commands::sweep(&config, &dataset, &models, &alphas, strategy, out.as_deref())
        }
        Command::Compare { ledgers, models, out } => commands::compare(&config, &ledgers, models.as_deref(), out.as_deref()),
        Command::Synth { settings, out } => commands::synth(&config, settings.as_deref(), seed, &out),
    };
    match config.threads {
        Some(n) => triage_core::par::with_thread_cap(n, work),
        None => work(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.status as u8)
        }
    }
}

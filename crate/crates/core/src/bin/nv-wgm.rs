use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};

use nv_wgm::cli::{self, CliError, ScenarioConfig, OUTPUT_DIR_ENV};

#[derive(Debug, Clone, Copy)]
enum Threads {
    Auto,
    Fixed(usize),
}

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("expected a positive integer or `auto`, got `{s}`")),
            Ok(n) => Ok(Threads::Fixed(n)),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nv-wgm", version, about = "Two NV centres in a detuned whispering-gallery cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario config (JSON).
    config: PathBuf,
    /// Directory for relative output prefixes.
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
    /// Worker threads: a positive integer or `auto`.
    #[arg(long, default_value = "auto")]
    threads: Threads,
    /// Overrides the trajectory seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single scenario and write `<prefix>_timeseries.csv` and `<prefix>_meta.json`.
    Run(RunArgs),
    /// Run a parameter sweep and write `<prefix>_sweep.csv` and `<prefix>_meta.json`.
    Sweep(RunArgs),
    /// Check a config without simulating.
    Validate {
        config: PathBuf,
    },
}

fn init_threads(t: Threads) -> Result<(), CliError> {
    let builder = rayon::ThreadPoolBuilder::new();
    let builder = match t {
        Threads::Auto => builder,
        Threads::Fixed(n) => builder.num_threads(n),
    };
    builder.build_global().map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn execute(args: &RunArgs, sweep: bool) -> Result<(), CliError> {
    init_threads(args.threads)?;
    let cfg = ScenarioConfig::load(&args.config)?;
    for a in cfg.params.resolve()?.advisories() {
        warn!("{a:?}");
    }
    let out = if sweep { cli::sweep(&cfg, args.seed)? } else { cli::run(&cfg, args.seed)? };
    let prefix = cli::resolve_prefix(args.output_dir.as_deref(), &cfg.output);
    let (csv, meta) = cli::write_outputs(&prefix, &out)?;
    info!("wrote {} and {}", csv.display(), meta.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => execute(a, false),
        Command::Sweep(a) => execute(a, true),
        Command::Validate { config } => ScenarioConfig::load(config).map(|c| {
            info!("{}: ok ({:?}, {})", config.display(), c.scenario, c.model);
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! The `redlens` command line.

mod commands;
mod config;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_analyze, cmd_sweep, cmd_train};
pub use commands::{ARCHIVE_DIR, HISTORY_FILE};
pub use config::{ConfigFile, RunConfig};
pub use report::{
    render_csv, write_csv, HISTORY_HEADER, REDUNDANCY_HEADER, SWEEP_HEADER, SWEEP_LAYERS_HEADER,
};

/// Exit status for every failure.
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "redlens",
    version,
    about = "Estimate redundant features in neural-network layers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train an MLP on MNIST and write its weight archive and history.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Cluster every layer of a weight archive and report redundancy.
    Analyze {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value = "avg")]
        linkage: String,
        #[arg(long)]
        out: PathBuf,
        /// Keep all-zero features as isolated singletons instead of failing.
        #[arg(long)]
        isolate_zero: bool,
    },
    /// Train a grid of models along one axis and report average redundancy.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = ["width", "depth", "activation", "initializer", "tau"])]
        axis: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

/// Flags that override config-file values.
#[derive(Debug, Clone, Default, Args)]
struct Overrides {
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    widths: Option<Vec<usize>>,
    #[arg(long)]
    activation: Option<String>,
    #[arg(long)]
    init: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    tau_grid: Option<Vec<f64>>,
    #[arg(long)]
    linkage: Option<String>,
    #[arg(long)]
    include_output_layer: bool,
    #[arg(long)]
    train_limit: Option<usize>,
    #[arg(long)]
    test_limit: Option<usize>,
    /// Worker threads for seed sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

impl Overrides {
    fn into_config(self) -> ConfigFile {
        ConfigFile {
            data_dir: self.data_dir,
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            seeds: self.seeds,
            widths: self.widths,
            activation: self.activation,
            init: self.init,
            tau_grid: self.tau_grid,
            linkage: self.linkage,
            include_output_layer: self.include_output_layer.then_some(true),
            train_limit: self.train_limit,
            test_limit: self.test_limit,
            threads: self.threads,
            ..ConfigFile::default()
        }
    }
}

/// Parses `args` and runs the command. Returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_FAILURE } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Train {
            config,
            out,
            overrides,
        } => RunConfig::resolve(config.as_deref(), overrides.into_config())
            .and_then(|cfg| cmd_train(&cfg, &out)),
        Command::Analyze {
            archive,
            tau,
            linkage,
            out,
            isolate_zero,
        } => linkage
            .parse()
            .and_then(|l| cmd_analyze(&archive, tau, l, isolate_zero, &out)),
        Command::Sweep {
            config,
            axis,
            out,
            overrides,
        } => axis.parse().and_then(|axis| {
            RunConfig::resolve(config.as_deref(), overrides.into_config())
                .and_then(|cfg| cmd_sweep(&cfg, axis, &out))
        }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("redlens: {e}");
            EXIT_FAILURE
        }
    }
}

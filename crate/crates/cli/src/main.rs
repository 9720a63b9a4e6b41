use clap::{Parser, Subcommand};
use scnlab_cli::commands::{self, BenchOverrides, DemoOpts, Overrides};
use scnlab_cli::error::CliError;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "scnlab",
    version,
    about = "Decorrelated ensembles of stochastic configuration networks: training, \
             solver studies, and prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the synthetic demonstration: solver timing and weight-correlation
    /// studies, with and without ridge (four CSV files).
    ///
    /// Outputs correlation_{plain,ridge}.csv with columns
    /// l_m,l_total,a1_a2,a1_a3,a2_a3 (A1 analytic, A2 Jacobi, A3
    /// Gauss-Seidel) and timing_{plain,ridge}.csv with columns
    /// l_total,method,median_seconds.
    Demo {
        #[arg(long, default_value = "demo-out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Total synthetic samples (4/5 train, 1/5 test).
        #[arg(long, default_value_t = 5000)]
        samples: usize,
        /// Per-model node grid, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [10usize, 50, 100, 200, 300, 400, 500])]
        grid: Vec<usize>,
        /// Timing repeats per grid point (median reported).
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Ridge value for the regularized variant.
        #[arg(long, default_value_t = 0.1)]
        ridge: f64,
    },
    /// Estimate hyperparameters on train/val, retrain on train+val, and
    /// evaluate each solver on the test split.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluate only this method (naive|analytic|jacobi|gauss_seidel).
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long)]
        normalize_target: Option<bool>,
    },
    /// Estimate per-group hidden-node counts (or RVFL weight ranges).
    Estimate {
        #[arg(long)]
        config: PathBuf,
        /// Estimate RVFL α per group instead of SCN node counts.
        #[arg(long)]
        rvfl: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep the coupling factor λ and report test-RMSE box statistics.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// λ values, comma separated (default 0.08..0.12).
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        ridge: Option<f64>,
    },
    /// Time system assembly + solve across a node grid.
    ///
    /// Outputs timing.csv with columns l_total,method,median_seconds; base
    /// models are grown once, outside the clock.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        ridge: Option<f64>,
    },
    /// Apply a saved model to a feature CSV, one prediction per line.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "predictions.csv")]
        output: PathBuf,
        #[arg(long, default_value = ",")]
        delimiter: String,
    },
}

fn parse_method(s: Option<String>) -> Result<Option<scnlab::ncl::SolveMethod>, CliError> {
    match s {
        None => Ok(None),
        Some(text) => text.parse().map(Some).map_err(CliError::Config),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Demo {
            out,
            seed,
            samples,
            grid,
            repeats,
            ridge,
        } => commands::cmd_demo(DemoOpts {
            out,
            seed,
            samples,
            grid,
            repeats,
            ridge,
        }),
        Command::Train {
            config,
            out,
            seed,
            method,
            ridge,
            normalize_target,
        } => {
            let overrides = Overrides {
                out,
                seed,
                method: parse_method(method)?,
                ridge,
                normalize_target,
            };
            commands::cmd_train(&config, &overrides)
        }
        Command::Estimate {
            config,
            rvfl,
            out,
            seed,
        } => {
            let overrides = Overrides {
                out,
                seed,
                method: None,
                ridge: None,
                normalize_target: None,
            };
            commands::cmd_estimate(&config, rvfl, &overrides)
        }
        Command::Sweep {
            config,
            lambdas,
            out,
            seed,
            method,
            ridge,
        } => {
            let overrides = Overrides {
                out,
                seed,
                method: parse_method(method)?,
                ridge,
                normalize_target: None,
            };
            commands::cmd_sweep(&config, lambdas, &overrides)
        }
        Command::Bench {
            config,
            grid,
            methods,
            repeats,
            out,
            seed,
            ridge,
        } => {
            let overrides = Overrides {
                out,
                seed,
                method: None,
                ridge,
                normalize_target: None,
            };
            commands::cmd_bench(
                &config,
                &BenchOverrides {
                    grid,
                    methods,
                    repeats,
                },
                &overrides,
            )
        }
        Command::Predict {
            model,
            input,
            output,
            delimiter,
        } => {
            let delim = delimiter.as_bytes().first().copied().unwrap_or(b',');
            commands::cmd_predict(&model, &input, &output, delim)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

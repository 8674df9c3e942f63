use std::path::PathBuf;
use std::process::ExitCode;

use baroclinic::model::{FrictionRegime, OperatorVariant};
use clap::{Args, Parser, Subcommand, ValueEnum};

use baroclinic_cli::commands;
use baroclinic_cli::config::{self, Overrides};
use baroclinic_cli::error::Failure;

#[derive(Parser)]
#[command(
    name = "baroclinic",
    version,
    about = "Stochastic two-layer quasi-geostrophic model on the sphere",
    after_help = "Exit codes: 0 success, 2 config error, 3 blow-up, 4 failed check."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    A3,
    A3hat,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Scaled,
    Fixed,
}

#[derive(Args)]
struct RunOpts {
    /// Experiment config file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the viscosity (also pins the sweep grid to this value).
    #[arg(long)]
    nu: Option<f64>,
    /// Override the noise-scaling exponent.
    #[arg(long)]
    alpha: Option<f64>,
    /// Override the linear-coupling operator variant.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Override the friction regime.
    #[arg(long, value_enum)]
    regime: Option<RegimeArg>,
    /// Output directory (default: taken from the config, else ".").
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunOpts {
    fn load(&self) -> Result<config::ExperimentConfig, Failure> {
        let mut cfg = config::ExperimentConfig::load(&self.config)?;
        cfg.apply(&Overrides {
            seed: self.seed,
            nu: self.nu,
            alpha: self.alpha,
            variant: self.variant.map(|v| match v {
                VariantArg::A3 => OperatorVariant::A3,
                VariantArg::A3hat => OperatorVariant::A3Hat,
            }),
            regime: self.regime.map(|r| match r {
                RegimeArg::Scaled => FrictionRegime::Scaled,
                RegimeArg::Fixed => FrictionRegime::Fixed,
            }),
            out: self.out.clone(),
        })?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory; write timeseries.csv, summary.json, checkpoint.json.
    Simulate {
        #[command(flatten)]
        opts: RunOpts,
        /// Drop the nonlinear term (linearized dynamics).
        #[arg(long)]
        linear: bool,
    },
    /// Run ensembles over the viscosity grid; write sweep.csv with bound flags.
    SweepNu {
        #[command(flatten)]
        opts: RunOpts,
        /// Drop the nonlinear term (linearized dynamics).
        #[arg(long)]
        linear: bool,
    },
    /// Check the stationary energy balance against the injection level.
    VerifyBalance {
        #[command(flatten)]
        opts: RunOpts,
        /// Drop the nonlinear term (linearized dynamics).
        #[arg(long)]
        linear: bool,
    },
    /// Compare linearized statistics against the closed-form moments.
    VerifyLinear {
        #[command(flatten)]
        opts: RunOpts,
        /// Also fit the strong-convergence slope over a step ladder.
        #[arg(long)]
        order: bool,
    },
    /// Print the constant ladders for both operator variants.
    Constants {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Bounded-Lipschitz distance between sampled CSV columns.
    Distance {
        /// First sample: CSV file.
        #[arg(long)]
        a: PathBuf,
        /// Second sample: CSV file (alternative to --dirac).
        #[arg(long)]
        b: Option<PathBuf>,
        /// Second sample: point mass at this value (alternative to --b).
        #[arg(long)]
        dirac: Option<f64>,
        /// Column to read from the CSV files.
        #[arg(long)]
        column: String,
        /// Directory for distance.json (omit to print only).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { opts, linear } => commands::simulate_cmd(&opts.load()?, linear),
        Command::SweepNu { opts, linear } => commands::sweep_cmd(&opts.load()?, linear),
        Command::VerifyBalance { opts, linear } => {
            commands::verify_balance_cmd(&opts.load()?, linear)
        }
        Command::VerifyLinear { opts, order } => commands::verify_linear_cmd(&opts.load()?, order),
        Command::Constants { opts } => commands::constants_cmd(&opts.load()?),
        Command::Distance {
            a,
            b,
            dirac,
            column,
            out,
        } => commands::distance_cmd(&a, b.as_deref(), dirac, &column, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use bec1d::{
    emit, emit_figure_data, thread_cap, Artifact, CliError, Figure, Mode, OutputFormat, Overrides,
    RunConfig, THREADS_ENV,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bec1d", version, about = "Ground states of the 1D effective GPE for cigar-shaped condensates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single ground-state solve: JSON summary and (s, phi) profile.
    Ground(Common),
    /// Warm-started lambda sweep: (lambda, e_min, mu_min, residual).
    Sweep(Common),
    /// Gaussian variational curve: (lambda, kappa, e_app, mu_app, in_domain).
    Variational(Common),
    /// Thomas-Fermi chemical potentials: (lambda, mu_first, mu_second).
    Tf(Common),
    /// Perturbed ground-state dynamics: (tau, Q, E, orbital_distance).
    Evolve(Common),
    /// Cross-method verification report; exits 1 if any check fails.
    Verify(Common),
    /// Data for one of the three figures.
    Figure {
        which: Figure,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Nonlinearity parameter.
    #[arg(long)]
    lambda: Option<f64>,
    /// Coupling constant (> 0).
    #[arg(long = "c-omega")]
    c_omega: Option<f64>,
    /// Grid half-width L.
    #[arg(long = "grid-L")]
    grid_l: Option<f64>,
    /// Number of grid nodes (odd).
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

impl Common {
    fn overrides(&self, mode: Mode) -> Overrides {
        Overrides {
            mode: Some(mode),
            lambda: self.lambda,
            c_omega: self.c_omega,
            grid_l: self.grid_l,
            grid_n: self.grid_n,
            out: self.out.clone(),
            format: self.format,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let value = std::env::var(THREADS_ENV).ok();
    if let Some(n) = thread_cap(value.as_deref())? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (mode, common, figure) = match cli.command {
        Command::Ground(c) => (Mode::Ground, c, None),
        Command::Sweep(c) => (Mode::Sweep, c, None),
        Command::Variational(c) => (Mode::Variational, c, None),
        Command::Tf(c) => (Mode::Tf, c, None),
        Command::Evolve(c) => (Mode::Evolve, c, None),
        Command::Verify(c) => (Mode::Verify, c, None),
        Command::Figure { which, common } => (Mode::Sweep, common, Some(which)),
    };
    let config = RunConfig::load(common.config.as_deref(), &common.overrides(mode))?;
    let path = config.output_path.as_deref();
    if let Some(which) = figure {
        // figures default to the unit coupling
        let c = if config.model.is_some() || config.physical.is_some() {
            config.c_omega()?
        } else {
            1.0
        };
        let table = emit_figure_data(which, c, config.variational.order, &config.solver)?;
        return emit(&Artifact::Table(table), path, config.output_format);
    }
    let outcome = bec1d::run(&config)?;
    emit(&outcome.artifact, path, config.output_format)?;
    match outcome.failure {
        Some(names) => Err(CliError::Verification(names)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dgstep::cli::{self, DgradKind, ProblemKind, RunConfig};
use dgstep::problems::CnoidalWave;
use dgstep::{Error, JacobianMode};

#[derive(Parser)]
#[command(name = "dgstep", version, about = "Energy-preserving DG time stepping experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single run; writes a per-interval trace.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Refinement study over N_t = 2^i; writes errors and observed orders.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Refinement levels, e.g. 2..6.
        #[arg(long = "converge-levels", default_value = "2..6")]
        levels: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Ode,
    Kdv,
}

#[derive(Clone, Copy, ValueEnum)]
enum DgradArg {
    Gonzalez,
    Avf,
    ItohAbe,
    ClosedForm,
    WeakForm,
}

#[derive(Clone, Copy, ValueEnum)]
enum JacobianArg {
    Fd,
    Reuse,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "ode")]
    problem: ProblemArg,
    /// Polynomial degree in time.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    nt: usize,
    /// Final time (ODE default 20, KdV default one period).
    #[arg(long = "T")]
    final_time: Option<f64>,
    #[arg(long, default_value_t = 1e-5)]
    u0: f64,
    #[arg(long, default_value_t = 32)]
    nx: usize,
    /// Spatial element degree (default 2k).
    #[arg(long)]
    l: Option<usize>,
    #[arg(long, value_enum)]
    dgrad: Option<DgradArg>,
    /// Cnoidal wave modulus.
    #[arg(long, default_value_t = 0.9f64.sqrt())]
    modulus: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long = "newton-tol", default_value_t = 1e-12)]
    newton_tol: f64,
    #[arg(long, value_enum)]
    jacobian: Option<JacobianArg>,
    /// Scale the Newton tolerance by min(1, |u|) for small states.
    #[arg(long = "state-relative-tol")]
    state_relative_tol: bool,
    /// Time quadrature points (default 2k+1).
    #[arg(long)]
    quad: Option<usize>,
    /// KdV: write every n-th coordinate to the trace.
    #[arg(long, default_value_t = 0)]
    subsample: usize,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            problem: match self.problem {
                ProblemArg::Ode => ProblemKind::Ode,
                ProblemArg::Kdv => ProblemKind::Kdv,
            },
            k: self.k,
            dgrad: self.dgrad.map(|d| match d {
                DgradArg::Gonzalez => DgradKind::Gonzalez,
                DgradArg::Avf => DgradKind::Avf,
                DgradArg::ItohAbe => DgradKind::ItohAbe,
                DgradArg::ClosedForm => DgradKind::ClosedForm,
                DgradArg::WeakForm => DgradKind::WeakForm,
            }),
            final_time: self.final_time,
            nt: self.nt,
            u0: self.u0,
            nx: self.nx,
            l: self.l,
            wave: CnoidalWave {
                modulus: self.modulus,
                kappa: self.kappa,
                alpha: self.alpha,
            },
            newton_tol: self.newton_tol,
            quad: self.quad,
            jacobian: self.jacobian.map(|j| match j {
                JacobianArg::Fd => JacobianMode::FiniteDifference,
                JacobianArg::Reuse => JacobianMode::ReusePerInterval,
            }),
            state_relative_tol: self.state_relative_tol,
            subsample: self.subsample,
        }
    }

    fn sink(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { common } => {
            let config = common.config();
            config.validate()?;
            cli::cmd_run(&config, common.sink()?)?;
        }
        Command::Converge { common, levels } => {
            let config = common.config();
            config.validate()?;
            let levels = cli::parse_levels(&levels)?;
            cli::cmd_converge(&config, levels, common.sink()?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_solver_failure() {
                ExitCode::from(3)
            } else if matches!(e, Error::InvalidArgument(_) | Error::Domain(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

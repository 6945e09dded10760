//! `qca`: validation, dispersion sweeps, lattice evolution, Maxwell and Fock
//! experiments, tiling and the Dirac coupling search.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "qca", version, about = "Quantum cellular automata on Cayley graphs of Z^d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Json,
    Csv,
}

/// Selects a built-in automaton or a descriptor file.
#[derive(Args, Clone)]
pub struct Source {
    /// Built-in: weyl-1d, weyl-2d, weyl-2d-b, bcc-a-plus, bcc-a-minus, bcc-b-plus,
    /// bcc-b-minus, or any of these prefixed with dirac-.
    #[arg(long, alias = "variant", conflicts_with = "descriptor")]
    pub builtin: Option<String>,
    /// JSON descriptor file.
    #[arg(long)]
    pub descriptor: Option<PathBuf>,
    /// Rotation angle of the 2D Weyl family.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    /// Selects the Dirac automaton built from the named Weyl built-in.
    #[arg(long)]
    pub dirac: bool,
    /// Mass of Dirac built-ins, in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    pub mass: f64,
}

#[derive(Args)]
pub struct Common {
    #[arg(long, value_enum, default_value = "json")]
    pub emit: Emit,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Presentation, Brillouin zone and word-metric ball of a lattice.
    Graph(commands::GraphArgs),
    /// Unitarity and isotropy checks of an automaton.
    Validate(commands::ValidateArgs),
    /// Dispersion relation and group velocity on a zone grid.
    Dispersion(commands::DispersionArgs),
    /// Evolves a state on a finite periodic lattice.
    Evolve(commands::EvolveArgs),
    /// Discrete Maxwell residuals of the two-field bilinear.
    Maxwell(commands::MaxwellArgs),
    /// Bosonic commutator deviation of polarization operators.
    Fock(commands::FockArgs),
    /// Coarse-grains an automaton onto a sublattice.
    Tile(commands::TileArgs),
    /// Randomised search for mass couplings of two Weyl automata.
    DiracSearch(commands::DiracSearchArgs),
}

pub enum Failure {
    /// Bad arguments: exit 2.
    Usage(String),
    /// A check exceeded its tolerance: exit 1, report already written.
    Validation(String),
    /// Any other error: exit 1.
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<qca_core::QcaError> for Failure {
    fn from(e: qca_core::QcaError) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("QCA_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Usage(format!("QCA_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(anyhow::Error::from)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Graph(a) => commands::graph(a),
        Command::Validate(a) => commands::validate(a),
        Command::Dispersion(a) => commands::dispersion(a),
        Command::Evolve(a) => commands::evolve(a),
        Command::Maxwell(a) => commands::maxwell(a),
        Command::Fock(a) => commands::fock(a),
        Command::Tile(a) => commands::tile(a),
        Command::DiracSearch(a) => commands::dirac_search(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

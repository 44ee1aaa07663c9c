//! Command-line front end: operator expansion, verification sweeps and the
//! two numerical oracles.

mod expand;
mod oracle;
mod output;
mod sweep;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use output::{Envelope, Metadata};

/// Exit status for a run in which every check passed.
pub const EXIT_PASS: u8 = 0;
/// Exit status when at least one check failed.
pub const EXIT_FAIL: u8 = 1;
/// Exit status for usage, configuration and I/O errors.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Failed(_) => EXIT_FAIL,
        }
    }
}

impl From<tractorforms::Error> for CliError {
    fn from(e: tractorforms::Error) -> Self {
        use tractorforms::Error as E;
        match e {
            E::InvalidParameters(_) | E::Parse(_) => CliError::Usage(e.to_string()),
            E::Io(_) | E::Json(_) => CliError::Io(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<tractorforms_dec::DecError> for CliError {
    fn from(e: tractorforms_dec::DecError) -> Self {
        use tractorforms_dec::DecError as E;
        match e {
            E::Core(c) => c.into(),
            E::InvalidPreset(_) | E::InvalidParameters(_) => CliError::Usage(e.to_string()),
            E::Io(_) | E::Json(_) => CliError::Io(e.to_string()),
            E::Degenerate(_) | E::NoConvergence(_) => CliError::Failed(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Latex,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "tractorforms", version, about = "Conformally invariant Laplacian-type operators on forms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand L_k^ℓ from its definition and compare with the closed factorization.
    Expand(ExpandArgs),
    /// Run identity checks over a parameter grid and write a report.
    Verify(VerifyArgs),
    /// Run a numerical oracle.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub ell: u32,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    pub n_min: u32,
    #[arg(long, default_value_t = 12)]
    pub n_max: u32,
    #[arg(long, default_value_t = 1)]
    pub k_min: u32,
    /// Capped at ⌊n/2⌋ for each n.
    #[arg(long, default_value_t = 6)]
    pub k_max: u32,
    #[arg(long, default_value_t = 1)]
    pub ell_min: u32,
    #[arg(long, default_value_t = 6)]
    pub ell_max: u32,
    /// Theorem selector, repeatable or comma separated. Default: all.
    #[arg(long = "theorem", value_delimiter = ',')]
    pub theorems: Vec<String>,
    /// Value of J used by spectral models built on the fly.
    #[arg(long, default_value = "1")]
    pub j_value: String,
    /// Weight range (half-integers) for the M* Box^p M identities.
    #[arg(long, default_value = "-4", allow_hyphen_values = true)]
    pub w_min: String,
    #[arg(long, default_value = "4", allow_hyphen_values = true)]
    pub w_max: String,
    /// Spectral model file checked for kernel decomposition.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Exact Fourier-mode comparison on the flat torus.
    Torus(TorusArgs),
    /// Discrete exterior calculus on a triangulated 3-manifold.
    Dec(DecArgs),
}

#[derive(Debug, Args)]
pub struct TorusArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub ell: u32,
    #[arg(long, default_value_t = 20)]
    pub modes: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecArgs {
    /// torus3-grid, boundary-4-simplex or cell600.
    #[arg(long)]
    pub mesh: String,
    /// Grid size m for torus3-grid.
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 30)]
    pub eigs: usize,
    /// Also run on N successive barycentric subdivisions (default 1).
    #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "1")]
    pub subdivide: Option<u32>,
    /// Store a trusted copy of the sphere table in the cache directory.
    #[arg(long)]
    pub promote: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write the finest sphere spectrum as a spectral model file.
    #[arg(long)]
    pub export_model: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and maps the result
/// to an exit status.
pub fn run(args: impl IntoIterator<Item = OsString>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::from(EXIT_PASS),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Expand(a) => expand::run(a),
        Command::Verify(a) => sweep::run(a),
        Command::Oracle(OracleCommand::Torus(a)) => oracle::torus(a),
        Command::Oracle(OracleCommand::Dec(a)) => oracle::dec(a),
    }
}

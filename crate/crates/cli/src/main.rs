//! `invgen`: check tuples for generation, build witnesses, tabulate stratum dimensions,
//! run finite-field censuses and reduce subspaces to standard position.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use invgen_core::FormKind;

#[derive(Debug, Parser)]
#[command(name = "invgen", version, about = "Matrix algebras with involution over exact fields")]
struct Cli {
    /// Seed for every random choice; identical seeds give identical output.
    #[arg(long, env = "INVGEN_SEED", default_value_t = 0, global = true)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Symmetric,
    Skew,
}

impl From<Form> for FormKind {
    fn from(f: Form) -> Self {
        match f {
            Form::Symmetric => FormKind::Symmetric,
            Form::Skew => FormKind::Skew,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether a tuple generates the full matrix algebra with involution.
    Check(CheckArgs),
    /// Build a tuple whose invariant subspaces are exactly those forced by a chosen W.
    Witness(WitnessArgs),
    /// Print stratum dimensions, the component census and the extremal summary.
    Dims(DimsArgs),
    /// Count points over small prime fields.
    Census(CensusArgs),
    /// Put a subspace into standard position.
    Reduce(ReduceArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Tuple JSON; standard input when absent or `-`.
    pub input: Option<PathBuf>,
    /// Enumerate ρ-invariant subspaces over the prime field.
    #[arg(long)]
    pub search_witness: bool,
    /// Largest number of subspaces the search may visit.
    #[arg(long, default_value_t = invgen_core::census::DEFAULT_SUBSPACE_CAP)]
    pub cap: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GramName {
    Identity,
    StandardSkew,
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PaddingArg {
    Zero,
    Sampled,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long, value_enum, default_value_t = Form::Symmetric)]
    pub form: Form,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub l: usize,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// `p=<prime>`, `<prime>` or `rational`.
    #[arg(long, default_value = "p=101")]
    pub field: String,
    /// Gram matrix; defaults to identity (symmetric) or standard_skew (skew).
    #[arg(long, value_enum)]
    pub gram: Option<GramName>,
    /// How A_2..A_r are filled.
    #[arg(long, value_enum, default_value_t = PaddingArg::Zero)]
    pub padding: PaddingArg,
}

#[derive(Debug, Args)]
pub struct DimsArgs {
    #[arg(long, value_enum, default_value_t = Form::Symmetric)]
    pub form: Form,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Include the per-stratum table.
    #[arg(long)]
    pub table: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Incidence,
    Exhaustive,
    Montecarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CensusGram {
    Standard,
    Split,
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    #[arg(long, value_enum, default_value_t = Form::Symmetric)]
    pub form: Form,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Comma-separated odd primes.
    #[arg(long, value_delimiter = ',', default_value = "3,5,7")]
    pub q: Vec<u64>,
    #[arg(long, value_enum, default_value_t = Mode::Incidence)]
    pub mode: Mode,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[arg(long, value_enum, default_value_t = CensusGram::Standard)]
    pub gram: CensusGram,
    /// Enumeration cap; defaults to 10^7 subspaces (incidence) or 10^8 tuples (exhaustive).
    #[arg(long)]
    pub cap: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    Blocked,
    Interleaved,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Space and subspace JSON; standard input when absent or `-`.
    pub input: Option<PathBuf>,
    /// Keep non-unit norms instead of failing when a square root is missing.
    #[arg(long)]
    pub weak: bool,
    #[arg(long, value_enum, default_value_t = LayoutArg::Blocked)]
    pub layout: LayoutArg,
}

/// Rendered result and exit status.
pub struct Outcome {
    pub text: String,
    pub code: u8,
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Check(a) => commands::check(a, cli.format),
        Command::Witness(a) => commands::witness(a, cli.seed, cli.format),
        Command::Dims(a) => commands::dims(a, cli.format),
        Command::Census(a) => commands::census(a, cli.seed, cli.format),
        Command::Reduce(a) => commands::reduce(a, cli.format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &outcome.text),
        None => std::io::stdout().write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(outcome.code)
}

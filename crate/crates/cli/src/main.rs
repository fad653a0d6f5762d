//! `hpt`: build, apply, verify and benchmark harmonic polynomial transform plans.

mod bench;
mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hpt_core::skeleton::{BlockSize, Direction};
use hpt_core::special::GeometryKind;
use hpt_core::Error;

#[derive(Parser)]
#[command(name = "hpt", version, about = "Fast connection transforms on the sphere, disk and triangle")]
struct Cli {
    /// Worker threads (defaults to the hardware count).
    #[arg(long, global = true, env = "HPT_THREADS")]
    threads: Option<usize>,

    /// Increase log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and precompute a plan, write it to disk and print its cost report.
    Plan {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Apply a plan to a coefficient file.
    Apply {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "to-base")]
        direction: DirectionArg,
    },
    /// Check a plan against independent routes and invariants.
    Verify {
        /// Plan file; without it a plan is built from the geometry options.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, value_enum, default_value = "full")]
        depth: Depth,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Time precomputation and execution over a sweep of degrees.
    Bench {
        #[arg(long, value_enum, default_value = "sphere")]
        kind: KindArg,
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
        sweep: Vec<u64>,
        #[arg(long, default_value = "auto", value_parser = parse_block)]
        block: BlockSize,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        repeats: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Write a random or zero coefficient file.
    Coeffs {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        zero: bool,
        #[arg(long, value_enum, default_value = "native")]
        representation: RepresentationArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct GeometryArgs {
    #[arg(long, value_enum, default_value = "sphere")]
    kind: KindArg,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    degree: u64,
    #[arg(long, default_value = "auto", value_parser = parse_block)]
    block: BlockSize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma: f64,
}

impl GeometryArgs {
    fn kind(&self) -> Result<GeometryKind<f64>, CliError> {
        self.kind.with_params(self.alpha, self.beta, self.gamma)
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum KindArg {
    Sphere,
    Disk,
    Triangle,
}

impl KindArg {
    fn with_params(self, alpha: f64, beta: f64, gamma: f64) -> Result<GeometryKind<f64>, CliError> {
        Ok(match self {
            KindArg::Sphere => GeometryKind::Sphere,
            KindArg::Disk => GeometryKind::Disk,
            KindArg::Triangle => GeometryKind::triangle(alpha, beta, gamma)?,
        })
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum DirectionArg {
    ToBase,
    FromBase,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::ToBase => Direction::ToBase,
            DirectionArg::FromBase => Direction::FromBase,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Depth {
    Quick,
    Full,
}

#[derive(ValueEnum, Clone, Copy)]
enum RepresentationArg {
    Native,
    Base,
}

fn parse_block(s: &str) -> Result<BlockSize, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(BlockSize::Auto);
    }
    match s.parse::<usize>() {
        Ok(b) if b > 0 => Ok(BlockSize::Fixed(b)),
        _ => Err(format!("expected `auto` or a positive integer, got `{s}`")),
    }
}

/// A failure carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const VERIFY: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const MISMATCH: u8 = 3;

    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::Corrupt(_) | Error::Io(_) => CliError::USAGE,
            Error::DataMismatch(_) | Error::DimensionMismatch(_) => CliError::MISMATCH,
            _ => CliError::VERIFY,
        };
        CliError::new(code, e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::new(CliError::USAGE, "--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::new(CliError::USAGE, e.to_string()))?;
    }
    match cli.command {
        Command::Plan { geometry, out } => {
            commands::plan(geometry.kind()?, geometry.degree as usize, geometry.block, &out)
        }
        Command::Apply { plan, input, output, direction } => commands::apply(&plan, &input, &output, direction.into()),
        Command::Verify { plan, geometry, depth, seed } => {
            let source = match plan {
                Some(path) => commands::PlanSource::File(path),
                None => commands::PlanSource::Build(geometry.kind()?, geometry.degree as usize, geometry.block),
            };
            commands::verify(source, depth == Depth::Full, seed)
        }
        Command::Bench { kind, sweep, block, repeats, seed } => {
            let kind = kind.with_params(0.0, 0.0, 0.0)?;
            let sweep: Vec<usize> = sweep.into_iter().map(|n| n as usize).collect();
            bench::run(kind, &sweep, block, repeats as usize, seed)
        }
        Command::Coeffs { geometry, out, zero, representation, seed } => {
            let rep = match representation {
                RepresentationArg::Native => hpt_core::skeleton::Representation::Native,
                RepresentationArg::Base => hpt_core::skeleton::Representation::Base,
            };
            commands::coeffs(&geometry.kind()?, geometry.degree as usize, zero, rep, seed, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

//! `paramray`: command line front end for the core library.

mod commands;
mod config;
mod error;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::error::AppResult;

#[derive(Parser, Debug)]
#[command(name = "paramray", version, about = "Critical portraits, external rays, parameter rays and disk geometry")]
struct Cli {
    /// Key-value run configuration; command line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for generated files [default: $PARAMRAY_OUT_DIR, else .].
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical portrait combinatorics.
    #[command(subcommand)]
    Portrait(PortraitCmd),
    /// Trace a dynamic ray of a polynomial.
    Ray(commands::ray::RayArgs),
    /// Continue a parameter ray in the shift locus.
    Paramray(commands::paramray::ParamRayArgs),
    /// Shape, moduli, areas and disk systems.
    #[command(subcommand)]
    Geometry(GeometryCmd),
}

#[derive(Subcommand, Debug)]
pub enum PortraitCmd {
    /// Check the three portrait axioms.
    Validate(PortraitFile),
    /// Strictly preperiodic or containing a periodic angle.
    Classify(PortraitFile),
    /// All valid portraits of a degree up to a denominator bound.
    Enumerate(commands::portrait::EnumerateArgs),
    /// The degree-2 portrait `{θ/2, (θ+1)/2}`.
    Quadratic(commands::portrait::QuadraticArgs),
}

#[derive(Args, Debug)]
pub struct PortraitFile {
    /// Portrait JSON.
    #[arg(long)]
    pub file: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum GeometryCmd {
    /// Shape of a region about a point.
    Shape(commands::geometry::ShapeArgs),
    /// Modulus of an annulus.
    Modulus(commands::geometry::AnnulusArgs),
    /// Area in the metric |dz|/(2π|z|).
    Rhostar(commands::geometry::RhoStarArgs),
    /// Check the m-nested condition of a disk system.
    Nested(commands::geometry::NestedArgs),
    /// Check the λ-scattered condition of a disk system.
    Scattered(commands::geometry::ScatteredArgs),
    /// Backward stability of a disk under a polynomial.
    Mane(commands::geometry::ManeArgs),
}

pub struct Ctx {
    pub config: Config,
    pub out_dir: PathBuf,
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> AppResult<()> {
    let config = Config::load(cli.config.as_deref())?;
    let out_dir = config.out_dir(cli.out_dir)?;
    let ctx = Ctx { config, out_dir, out: cli.out };
    match cli.command {
        Command::Portrait(c) => commands::portrait::run(&ctx, c),
        Command::Ray(a) => commands::ray::run(&ctx, a),
        Command::Paramray(a) => commands::paramray::run(&ctx, a),
        Command::Geometry(c) => commands::geometry::run(&ctx, c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("paramray: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

use config::{Config, FileConfig, Format, Overrides, Strategy, CONFIG_ENV};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "sheafbar", version, about = "Barcodes, interleaving distances, limits and cone tests")]
struct Cli {
    /// TOML config file with defaults for the flags below.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Characteristic of the coefficient field.
    #[arg(long, global = true)]
    field: Option<u32>,
    /// Assignment budget of the exhaustive search.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[arg(long, global = true, value_enum)]
    strategy: Option<Strategy>,
    /// Seed for randomized tie-breaking.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Interleaving distances.
    #[command(subcommand)]
    Dist(DistCommand),
    /// Spectral invariants of a barcode.
    Spectral {
        file: PathBuf,
        #[arg(long, default_value = "left-infinite")]
        convention: sheafbar::spectral::Convention,
        #[arg(long, allow_negative_numbers = true)]
        dim: i32,
    },
    /// Sublevel-set barcode of a piecewise linear function.
    Sublevel { file: PathBuf },
    /// Limit of the tower stored in a directory.
    Limit {
        dir: PathBuf,
        /// Also check the defect bound at this stage.
        #[arg(long)]
        defect: Option<usize>,
        #[arg(long, value_enum, default_value = "exact")]
        mode: LimitModeArg,
    },
    /// Complete the Cauchy sequence `F0.bc, F1.bc, ...` stored in a directory.
    Complete {
        dir: PathBuf,
        #[arg(long)]
        tol: String,
    },
    /// Cone-coisotropy test of a sampled set at a point.
    ConeTest(ConeTestArgs),
    /// Cantor cube families and their displacement bound.
    Cantor(CantorArgs),
    /// Demonstrations.
    #[command(subcommand)]
    Demo(DemoCommand),
    /// Check that a file (or tower directory) parses and is consistent.
    Validate { file: PathBuf },
}

#[derive(Debug, Subcommand)]
enum DistCommand {
    /// The distance gamma, with a certificate file when exact.
    Gamma {
        f: PathBuf,
        g: PathBuf,
        /// Restrict to interleavings with equal shifts.
        #[arg(long)]
        symmetric: bool,
        /// Where to write the certificate; defaults to `<F>_<G>.cert` in the working directory.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Decide whether an (a, b)-interleaving exists.
    Check {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum LimitModeArg {
    Exact,
    Truncated,
}

#[derive(Debug, Args)]
struct ConeTestArgs {
    #[arg(long)]
    cloud: PathBuf,
    /// Base point, comma or space separated.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    /// Coarsest radius; chosen from the nearest neighbours when absent.
    #[arg(long)]
    r0: Option<f64>,
    /// Angular resolution in degrees.
    #[arg(long)]
    theta_res: Option<f64>,
}

#[derive(Debug, Args)]
struct CantorArgs {
    #[arg(long)]
    a: String,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    /// Print the vertices of all cubes as a point cloud.
    #[arg(long, conflicts_with = "bound_table")]
    emit_cloud: bool,
    /// Print the displacement bound for levels 1..=k.
    #[arg(long)]
    bound_table: bool,
}

#[derive(Debug, Subcommand)]
enum DemoCommand {
    /// Truncations of the sum of `k_[x, inf)` over the rationals: distinct, yet gamma <= 1/N.
    RationalDegeneracy {
        #[arg(long)]
        denom_max: u32,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cfg = Config::resolve(
        file,
        Overrides {
            field: cli.field,
            budget: cli.budget,
            strategy: cli.strategy,
            seed: cli.seed,
            format: cli.format,
        },
    )?;
    let out = output::Output::new(cfg.format);
    match cli.command {
        Command::Dist(DistCommand::Gamma { f, g, symmetric, cert }) => {
            commands::dist_gamma(&cfg, &out, &f, &g, symmetric, cert)
        }
        Command::Dist(DistCommand::Check { f, g, a, b, cert }) => commands::dist_check(&cfg, &out, &f, &g, &a, &b, cert),
        Command::Spectral { file, convention, dim } => commands::spectral(&out, &file, convention, dim),
        Command::Sublevel { file } => commands::sublevel(&out, &file),
        Command::Limit { dir, defect, mode } => {
            let mode = match mode {
                LimitModeArg::Exact => sheafbar::limits::LimitMode::Exact,
                LimitModeArg::Truncated => sheafbar::limits::LimitMode::Truncated,
            };
            commands::limit(&cfg, &out, &dir, defect, mode)
        }
        Command::Complete { dir, tol } => commands::complete(&cfg, &out, &dir, &tol),
        Command::ConeTest(args) => {
            let mut params = cfg.cone;
            params.r0 = args.r0;
            if let Some(d) = args.theta_res {
                params.theta_res = d.to_radians();
            }
            commands::cone_test(&out, &args.cloud, &args.point, &params)
        }
        Command::Cantor(args) => commands::cantor(&out, &args.a, args.n, args.k, args.emit_cloud, args.bound_table),
        Command::Demo(DemoCommand::RationalDegeneracy { denom_max }) => {
            commands::rational_degeneracy(&cfg, &out, denom_max)
        }
        Command::Validate { file } => commands::validate(&cfg, &out, &file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commfield_cli::{execute, parse_config, CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "commfield",
    version,
    about = "Cloak and bender experiments for diffusion-governed communication fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cloaked disk in a source-driven rectangle, against the original and blanket media.
    Cloak(RunArgs),
    /// Straight plate bent into a quarter annulus.
    Bender(RunArgs),
    /// Pullback identity of a mapped problem under grid refinement.
    Pullback(RunArgs),
    /// Refinement studies of the solver and the designs.
    Convergence(RunArgs),
    /// User-defined rectangle problem, optionally mapped.
    Custom(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized check points; solver results do not depend on it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn load(kind: &str, args: &RunArgs) -> Result<RunConfig, CliError> {
    let config = match &args.config {
        None => RunConfig::default_for(kind)?,
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            parse_config(&text)?
        }
    };
    if config.kind() != kind {
        return Err(CliError::Config(format!(
            "`scenario`: config is for `{}` but the `{kind}` subcommand was used",
            config.kind()
        )));
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Cloak(a) => ("cloak", a),
        Command::Bender(a) => ("bender", a),
        Command::Pullback(a) => ("pullback", a),
        Command::Convergence(a) => ("convergence", a),
        Command::Custom(a) => ("custom", a),
    };
    let result = load(kind, args).and_then(|config| execute(&config, args.seed, &args.out));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

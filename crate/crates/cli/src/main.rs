use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use osg_cli::{commands, CliError, CommandOutput, RunConfig, OUTPUT_DIR_ENV};
use osg_core::Region;

#[derive(Parser)]
#[command(name = "osg", version, about = "Cavity-QED teleportation with Stern-Gerlach paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; stdout when neither this nor an output directory is set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    trials: Option<u64>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    region: Option<Region>,

    /// Read times as ετ and run with ħ = m = ε = 1.
    #[arg(long, global = true)]
    dimensionless: bool,

    /// Directory for outputs named after the command.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Branch centroids and widths (CSV).
    Paths,
    /// Which-path distinguishability (CSV).
    Distinguishability,
    /// Protocol Monte Carlo and outcome table (JSON).
    Protocol,
    /// Closed forms against the grid solver (JSON, exit 3 on breach).
    OracleCheck,
    /// Probe-atom photon counting (JSON).
    Probe,
    /// Branch overlaps for n = 0, 1 (CSV).
    Overlap,
}

fn run(cli: &Cli) -> Result<CommandOutput, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.trials {
        cfg.n_trials = n;
    }
    if let Some(s) = cli.seed {
        cfg.base_seed = s;
    }
    if let Some(r) = cli.region {
        cfg.region = r;
    }
    cfg.dimensionless |= cli.dimensionless;
    if let Some(o) = &cli.out {
        cfg.output = Some(o.clone());
    }
    let out = match cli.command {
        Command::Paths => commands::cmd_paths(&cfg)?,
        Command::Distinguishability => commands::cmd_distinguishability(&cfg)?,
        Command::Protocol => commands::cmd_protocol(&cfg)?,
        Command::OracleCheck => commands::cmd_oracle_check(&cfg)?,
        Command::Probe => commands::cmd_probe(&cfg)?,
        Command::Overlap => commands::cmd_overlap(&cfg)?,
    };
    let target = cfg.output.clone().or_else(|| cli.output_dir.as_ref().map(|d| d.join(out.default_name)));
    match target {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, &out.text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        None => std::io::stdout().write_all(out.text.as_bytes())?,
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) if out.breach => {
            eprintln!("tolerance breach");
            ExitCode::from(3)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

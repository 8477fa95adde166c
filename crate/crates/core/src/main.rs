use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pbom::cli::{self, RunConfig};
use pbom::sweep::SpectrumKind;
use pbom::Result;

#[derive(Parser)]
#[command(name = "pbom", version, about = "Photon-condensate optomechanics simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON file with parameter overrides.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one parameter, e.g. `--set zeta=1e-3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Grid {
    /// Grid start in units of Omega.
    #[arg(long)]
    omega_min: Option<f64>,
    /// Grid end in units of Omega.
    #[arg(long)]
    omega_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived linear model.
    Model {
        #[command(flatten)]
        common: Common,
    },
    /// Write a spectrum as CSV.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        /// displacement, output, squeezing or response.
        #[arg(long, default_value = "displacement")]
        kind: String,
    },
    /// Print occupations, temperatures, stability and entanglement.
    Steady {
        #[command(flatten)]
        common: Common,
    },
    /// Regenerate the data of a named figure.
    Fig {
        name: String,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a sweep described by a JSON file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn run_config(common: &Common, grid: Option<&Grid>) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(g) = grid {
        cfg.omega_min = g.omega_min.or(cfg.omega_min);
        cfg.omega_max = g.omega_max.or(cfg.omega_max);
        cfg.points = g.points.or(cfg.points);
    }
    for s in &common.set {
        cfg.set(s)?;
    }
    Ok(cfg)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Model { common } => {
            let v = cli::cmd_model(&run_config(&common, None)?)?;
            cli::emit_json(&v, common.out.as_deref())
        }
        Command::Spectrum { common, grid, kind } => {
            let kind = SpectrumKind::parse(&kind)?;
            let text = cli::cmd_spectrum(&run_config(&common, Some(&grid))?, kind)?;
            cli::emit_text(&text, common.out.as_deref())
        }
        Command::Steady { common } => {
            let v = cli::cmd_steady(&run_config(&common, None)?)?;
            cli::emit_json(&v, common.out.as_deref())
        }
        Command::Fig { name, out, workers } => {
            let paths = cli::cmd_fig(&name, &out, cli::resolve_workers(workers)?)?;
            cli::emit_text(&cli::listing(&paths), None::<&Path>)
        }
        Command::Sweep { config, out, workers } => {
            let cfg = cli::load_sweep_config(&config)?;
            let paths = cli::cmd_sweep(&cfg, &out, cli::resolve_workers(workers)?)?;
            cli::emit_text(&cli::listing(&paths), None::<&Path>)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}

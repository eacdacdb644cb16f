use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use passport_cli::sweep::{sweep, Vary};
use passport_cli::{price, surface, verify, CliError, Output, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "passport", version, about = "American passport option pricer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides `mc.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Price the query points.
    Price,
    /// Export the solved surface as CSV.
    Surface,
    /// Run every property report and the Monte Carlo cross-check.
    Verify,
    /// Price over one varying parameter.
    Sweep {
        /// `key=lo:hi:n`, e.g. `model.sigma=0.1:0.4:7`.
        #[arg(long)]
        vary: String,
    },
}

fn run(cli: Cli) -> Result<Output, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    if let Command::Sweep { vary } = &cli.command {
        let vary: Vary = vary.parse()?;
        return sweep(&text, &vary, cli.seed);
    }
    let mut cfg = RunConfig::from_toml(&text)?;
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    let prep = cfg.prepare()?;
    match cli.command {
        Command::Price => price(&prep),
        Command::Surface => surface(&prep),
        Command::Verify => verify(&prep),
        Command::Sweep { .. } => unreachable!(),
    }
}

fn emit(output: &Output, out_dir: Option<&PathBuf>) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io)?;
            fs::write(dir.join(output.file_name), &output.body).map_err(io)
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(&output.body).and_then(|()| stdout.flush()) {
                // A closed reader (`| head`) is not a failure.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(io),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = cli.out.clone();
    let result = run(cli).and_then(|output| emit(&output, out_dir.as_ref()).map(|()| output));
    match result {
        Ok(output) if output.failed => {
            eprintln!("passport: verification failed; see {}", output.file_name);
            ExitCode::from(1)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("passport: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

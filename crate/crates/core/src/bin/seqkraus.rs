use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use seqkraus::commands::{cmd_check, cmd_sample, cmd_sweep, cmd_washout};
use seqkraus::config::{OutputFormat, RunConfig};
use seqkraus::Error;

#[derive(Parser)]
#[command(name = "seqkraus", version, about = "Sequential Gaussian-pointer measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify closed forms and report the operator conditions
    Check(Common),
    /// Tabulate closed forms (and sampled estimates) over the strength grid
    Sweep(Common),
    /// Draw outcome pairs, raw or binned
    Sample(Common),
    /// Grid-refinement study of the weak-limit correction
    Washout(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output file (defaults to the config value, then stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    /// Suppress the summary on stderr
    #[arg(long)]
    quiet: bool,
}

fn run(command: &Command) -> Result<bool, Error> {
    let (Command::Check(args) | Command::Sweep(args) | Command::Sample(args) | Command::Washout(args)) =
        command;
    let mut config = RunConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(samples) = args.samples {
        config.samples = samples;
    }
    let format = match args.format {
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Json) => OutputFormat::Json,
        None => config.output.format,
    };

    let (text, passed, summary) = match command {
        Command::Check(_) => {
            let report = cmd_check(&config)?;
            let verdict = if report.passed() { "PASS" } else { "FAIL" };
            (report.render(format), report.passed(), format!("check: {verdict}"))
        }
        Command::Sweep(_) => {
            let t = cmd_sweep(&config)?;
            let n = t.rows.len();
            (t.render(format), true, format!("sweep: {n} rows"))
        }
        Command::Sample(_) => {
            let t = cmd_sample(&config)?;
            let n = t.rows.len();
            (t.render(format), true, format!("sample: {n} rows, seed {}", config.seed))
        }
        Command::Washout(_) => {
            let t = cmd_washout(&config)?;
            let n = t.rows.len();
            (t.render(format), true, format!("washout: {n} grids"))
        }
    };

    match args.output.clone().or(config.output.path.clone()) {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            if !args.quiet {
                eprintln!("{summary}; wrote {}", path.display());
            }
        }
        None => {
            print!("{text}");
            if !args.quiet {
                eprintln!("{summary}");
            }
        }
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}

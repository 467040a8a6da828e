use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use protective_cli::config::{self, seed_override};
use protective_cli::error::{CliError, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};
use protective_cli::runner::{self, RunOptions};

#[derive(Parser)]
#[command(
    name = "protective",
    version,
    about = "Run seeded protected-measurement experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a configuration and write its output directory.
    Run {
        config: PathBuf,
        /// Exit with a nonzero status if any built-in check fails.
        #[arg(long)]
        check: bool,
        /// Output directory, overriding the configured one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a configuration against its scenario schema without running it.
    Validate { config: PathBuf },
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn validate(path: &Path) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let diagnostics = match serde_json::from_str(&text) {
        Ok(doc) => config::validate(&doc),
        Err(e) => vec![config::Diagnostic {
            key: "<root>".into(),
            message: format!("invalid JSON: {e}"),
        }],
    };
    if diagnostics.is_empty() {
        println!("{}: valid", path.display());
        return Ok(EXIT_OK);
    }
    for d in &diagnostics {
        println!("{d}");
    }
    Ok(EXIT_USAGE)
}

fn run(path: &Path, check: bool, out: Option<PathBuf>) -> Result<i32, CliError> {
    let cfg = config::load(path)?;
    let options = RunOptions {
        out_dir: out,
        seed_override: seed_override()?,
    };
    eprintln!(
        "running {} (seed {})",
        cfg.scenario.name(),
        options.seed_override.unwrap_or(cfg.seed)
    );
    let report = runner::run(cfg, &options)?;
    for c in &report.checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    println!(
        "wrote {} files to {} in {:.2} s",
        report.files.len(),
        report.output_dir.display(),
        report.wall_time_seconds
    );
    if check && !report.all_checks_passed {
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { config, check, out } => run(config, *check, out.clone()),
        Command::Validate { config } => validate(config),
    };
    match outcome {
        Ok(code) => exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            exit(e.exit_code())
        }
    }
}

use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use staticdec::{run_suite, CliError, Suite, SuiteConfig, SuiteReport};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Run a verification suite and report its residuals.
#[derive(Debug, Parser)]
#[command(name = "staticdec", version)]
struct Args {
    /// Suite name, overriding the one in the config.
    suite: Option<String>,
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed, overriding the one in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: &Args) -> Result<SuiteReport, CliError> {
    let mut cfg = match &args.config {
        Some(path) => SuiteConfig::load(path)?,
        None => {
            let name = args
                .suite
                .as_deref()
                .ok_or_else(|| CliError::Config("give a suite or --config".into()))?;
            SuiteConfig::for_suite(name.parse()?)
        }
    };
    if let Some(name) = &args.suite {
        cfg.suite = Some(name.parse::<Suite>()?);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    run_suite(&cfg)
}

fn emit(args: &Args, report: &SuiteReport) -> Result<(), CliError> {
    let body = match args.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    match &args.out {
        Some(path) => std::fs::write(path, body + "\n").map_err(CliError::Output),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{body}").map_err(CliError::Output)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    panic::set_hook(Box::new(|_| {}));
    let result = panic::catch_unwind(AssertUnwindSafe(|| {
        let report = run(&args)?;
        emit(&args, &report)?;
        Ok::<bool, CliError>(report.pass)
    }));
    match result {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(1),
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown failure".into());
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

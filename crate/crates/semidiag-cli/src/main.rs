use clap::Parser;
use semidiag_cli::commands::{run, Cli};
use std::process::ExitCode;

/// Caps the worker pool when SEMIDIAG_THREADS is set; otherwise rayon
/// uses every available core.
fn configure_threads() -> Result<(), String> {
    let raw = match std::env::var("SEMIDIAG_THREADS") {
        Ok(raw) => raw,
        Err(_) => return Ok(()),
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&k| k >= 1)
        .ok_or_else(|| format!("SEMIDIAG_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("cannot configure the thread pool: {e}"))
}

fn main() -> ExitCode {
    if let Err(message) = configure_threads() {
        eprintln!("usage error: {message}");
        return ExitCode::from(1);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let is_usage_failure = err.use_stderr();
            let _ = err.print();
            return if is_usage_failure {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

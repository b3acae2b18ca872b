use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qbatt_core::error::Error;
use qbatt_core::io::{self, Format, Scenario, THREADS_ENV};

const MAX_ECHOED_WARNINGS: usize = 3;

/// Simulate cavity-charged qubit batteries and write result tables.
#[derive(Parser, Debug)]
#[command(name = "qbatt", version)]
struct Cli {
    /// jc-single, sequential, parallel, noise-sweep, speed-compare,
    /// rwa-compare or coupling-profile
    scenario: Scenario,
    /// TOML or JSON configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output table; stdout when absent. A manifest is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    /// Worker threads
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

fn fail(e: &Error) -> ExitCode {
    match e {
        Error::Config(list) => {
            eprintln!("qbatt: invalid configuration:");
            for m in list {
                eprintln!("  {m}");
            }
            ExitCode::from(2)
        }
        other => {
            eprintln!("qbatt: {other}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("qbatt: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match io::parse_config(&text, Some(cli.scenario)) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(t) = cli.threads {
        cfg.output.threads = Some(t);
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if cli.out.is_some() {
        cfg.output.path = cli.out.clone();
    }
    if cfg.output.threads == Some(0) {
        eprintln!("qbatt: --threads must be at least 1");
        return ExitCode::from(2);
    }
    if let Some(t) = cfg.output.threads {
        if let Err(e) = io::configure_threads(t) {
            return fail(&e);
        }
    }

    let out = match io::run(&cfg, &text) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let warnings = &out.manifest.warnings;
    for w in warnings.iter().take(MAX_ECHOED_WARNINGS) {
        eprintln!("qbatt: warning: {w}");
    }
    if warnings.len() > MAX_ECHOED_WARNINGS {
        eprintln!(
            "qbatt: {} more warnings recorded in the manifest",
            warnings.len() - MAX_ECHOED_WARNINGS
        );
    }
    match &cfg.output.path {
        Some(path) => match io::write_outputs(&out, path, cfg.output.format) {
            Ok(mp) => {
                eprintln!("wrote {} and {}", path.display(), mp.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        None => {
            let body = io::render(&out, cfg.output.format);
            if std::io::stdout().write_all(body.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            if cfg.output.format == Format::Csv {
                eprint!("{}", io::render_manifest(&out.manifest));
            }
            ExitCode::SUCCESS
        }
    }
}

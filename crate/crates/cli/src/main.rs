//! Command-line front end: resolves parameters, runs one command, and prints
//! a JSON envelope on stdout.
//!
//! Exit status: 0 on success, 2 on invalid input or configuration, 3 when a
//! result was produced but flagged (non-convergence, rejected hypothesis, or
//! an exhausted budget), 4 on a broken internal invariant.

mod args;
mod config;
mod csvout;
mod run;

use anoslab_core::ErrorKind;
use clap::Parser;
use serde_json::{json, Map};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

fn kind_str(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Invalid => "invalid",
        ErrorKind::Numerical => "numerical",
        ErrorKind::Resource => "resource",
        ErrorKind::Internal => "internal",
    }
}

fn kind_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Invalid => 2,
        ErrorKind::Numerical | ErrorKind::Resource => 3,
        ErrorKind::Internal => 4,
    }
}

/// Prints an error envelope and returns the matching exit code.
fn fail(command: &str, kind: ErrorKind, message: String) -> ExitCode {
    let envelope = json!({
        "command": command,
        "error": message,
        "kind": kind_str(kind),
    });
    println!("{envelope}");
    ExitCode::from(kind_code(kind))
}

/// Honors ANOSLAB_THREADS by sizing the global worker pool; reports the
/// count actually in effect.
fn init_threads() -> Result<usize, String> {
    match std::env::var("ANOSLAB_THREADS") {
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                format!("ANOSLAB_THREADS must be a positive integer, got {raw:?}")
            })?;
            if n == 0 || n > 512 {
                return Err(format!(
                    "ANOSLAB_THREADS must be in 1..=512, got {n}"
                ));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| format!("worker pool setup failed: {e}"))?;
            Ok(n)
        }
        Err(std::env::VarError::NotPresent) => Ok(rayon::current_num_threads()),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err("ANOSLAB_THREADS holds invalid unicode".into())
        }
    }
}

fn main() -> ExitCode {
    let threads = match init_threads() {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    let cli = args::Cli::parse();
    let name = cli.command.name();
    let start = Instant::now();

    let file_map = match &cli.command.common().config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    return fail(
                        name,
                        ErrorKind::Invalid,
                        format!("cannot read config file {path}: {e}"),
                    )
                }
            };
            match config::parse_config_file(&text, path) {
                Ok(m) => m,
                Err(e) => return fail(name, e.kind(), e.to_string()),
            }
        }
        None => Default::default(),
    };
    let mut resolver = match config::Resolver::new(name, cli.command.collect(), file_map) {
        Ok(r) => r,
        Err(e) => return fail(name, e.kind(), e.to_string()),
    };

    // A panic past this point is a library bug; turn it into the internal
    // error status instead of an opaque abort.
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| run::execute(name, &mut resolver)));
    let out = match outcome {
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic with a non-string payload".into());
            return fail(
                name,
                ErrorKind::Internal,
                format!("internal invariant broke: {msg}"),
            );
        }
        Ok(Err(e)) => return fail(name, e.kind(), e.to_string()),
        Ok(Ok(out)) => out,
    };
    if let Err(e) = resolver.reject_unknown() {
        return fail(name, e.kind(), e.to_string());
    }

    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() > resolver.budgets.time_limit_s {
        resolver.clamp(format!(
            "run exceeded the soft time limit of {} s",
            resolver.budgets.time_limit_s
        ));
    }

    let mut versions = Map::new();
    versions.insert("cli".into(), json!(env!("CARGO_PKG_VERSION")));
    versions.insert("core".into(), json!(anoslab_core::VERSION));
    if let Some(conv) = out.convention {
        versions.insert("lattice_convention".into(), json!(conv));
    }
    let envelope = json!({
        "command": name,
        "params": resolver.params_echo(),
        "seed": out.seed,
        "versions": versions,
        "result": out.result,
        "diagnostics": {
            "threads": threads,
            "budget_exhausted": resolver.budget_exhausted,
            "nonconverged": out.nonconverged,
            "notes": resolver.notes,
        },
        "wallclock_ms": elapsed.as_millis() as u64,
    });
    let rendered = envelope.to_string();

    if let Some(path) = &resolver.output.path {
        let payload = match (&resolver.output.format, &out.csv) {
            (config::OutFormat::Csv, Some(csv)) => csv.as_str(),
            // format=json: the file receives a copy of the envelope.
            _ => rendered.as_str(),
        };
        if let Err(e) = std::fs::write(path, payload) {
            return fail(
                name,
                ErrorKind::Invalid,
                format!("cannot write output file {path}: {e}"),
            );
        }
    }

    println!("{rendered}");
    if resolver.budget_exhausted || out.nonconverged {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}

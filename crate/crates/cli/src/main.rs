//! `symplie`: scenario-driven front end to the library.
//!
//! ```text
//! symplie simulate|brackets|check|gnh --scenario <path> [--out <dir>] [--overwrite]
//! ```
//!
//! Exit codes: 0 success, 1 usage or I/O, 2 validation, 3 degeneracy halt,
//! 4 numerical blow-up.

mod commands;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Outcome, EXIT_USAGE, EXIT_VALIDATION};
use scenario::{load_scenario, LoadError};

#[derive(Parser)]
#[command(name = "symplie", version, about = "Hamiltonian dynamics on cotangent bundles of Lie groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario JSON document.
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for the trajectory and report files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Replace existing output files.
    #[arg(long)]
    overwrite: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the flow; writes the trajectory CSV and a report.
    Simulate(Common),
    /// Fundamental bracket table at the initial point.
    Brackets(Common),
    /// Invariant checks at the initial point.
    Check(Common),
    /// Constraint analysis on the degenerate stratum (su2).
    Gnh(Common),
}

fn write_new(path: &Path, contents: &str, overwrite: bool) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
    }
    let mut opts = std::fs::OpenOptions::new();
    opts.write(true);
    if overwrite {
        opts.create(true).truncate(true);
    } else {
        opts.create_new(true);
    }
    let mut f = opts.open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::AlreadyExists {
            format!("{} already exists (use --overwrite to replace it)", path.display())
        } else {
            format!("{}: {e}", path.display())
        }
    })?;
    std::io::Write::write_all(&mut f, contents.as_bytes()).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> i32 {
    let (name, common) = match &cli.command {
        Command::Simulate(c) => ("simulate", c),
        Command::Brackets(c) => ("brackets", c),
        Command::Check(c) => ("check", c),
        Command::Gnh(c) => ("gnh", c),
    };
    let sc = match load_scenario(&common.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprint!("{e}");
            if !matches!(e, LoadError::Invalid(_)) {
                eprintln!();
            }
            return if matches!(e, LoadError::Io(_)) { EXIT_USAGE } else { EXIT_VALIDATION };
        }
    };
    let report_path = common.out.join(&sc.report_path);
    let csv_path = common.out.join(&sc.trajectory_path);
    if !common.overwrite {
        let mut targets = vec![&report_path];
        if name == "simulate" {
            targets.push(&csv_path);
        }
        if let Some(existing) = targets.into_iter().find(|p| p.exists()) {
            eprintln!("{} already exists (use --overwrite to replace it)", existing.display());
            return EXIT_USAGE;
        }
    }

    let Outcome { report, code, csv } = match name {
        "simulate" => commands::simulate(&sc),
        "brackets" => commands::brackets(&sc),
        "check" => commands::check(&sc),
        _ => commands::gnh(&sc),
    };
    if let Some(csv) = csv {
        if let Err(e) = write_new(&csv_path, &csv, common.overwrite) {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    }
    let text = serde_json::to_string_pretty(&report).expect("report is valid JSON") + "\n";
    if let Err(e) = write_new(&report_path, &text, common.overwrite) {
        eprintln!("{e}");
        return EXIT_USAGE;
    }
    if let Some(msg) = report["status"]["message"].as_str() {
        eprintln!("{name}: {msg}");
    }
    code
}

fn main() -> ExitCode {
    let code = match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                0
            }
        }
    };
    ExitCode::from(code as u8)
}

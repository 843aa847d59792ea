mod encode;
mod error;
mod lin;
mod schema;
mod surf;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use error::CliError;
use lin::LinOp;
use surf::SurfaceArgs;

/// Exact linear Dirac calculus and classification of stable Poisson structures on surfaces.
#[derive(Debug, Parser)]
#[command(name = "dirac-kit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Linear Dirac structures, gauge transformations and dual pairs with exact rationals.
    Lin {
        #[arg(value_enum)]
        op: LinOp,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linear pair groupoids.
    Groupoid {
        #[command(subcommand)]
        command: GroupoidCommand,
    },
    /// Poisson structures on the sphere or torus given by `f d/dz ^ d/dtheta`.
    Surf {
        #[command(subcommand)]
        command: SurfCommand,
    },
}

#[derive(Debug, Subcommand)]
enum GroupoidCommand {
    /// Checks the gauged groupoid form and the bimodule form for a base form and a 2-form.
    Check {
        #[arg(long)]
        omega: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum SurfCommand {
    /// Zero curves, modular periods, region tree and regularized volume.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        curves_csv: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Gauge and Morita comparison of two functions.
    Compare {
        #[arg(long, allow_hyphen_values = true)]
        f1: String,
        #[arg(long, allow_hyphen_values = true)]
        f2: String,
        /// Period tolerance relative to the largest period.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Applies the gauge transformation by `b dz ^ dtheta` to `f`.
    Gauge {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let io = |message: String| CliError::Io {
        path: path.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| io(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DIRAC_KIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("DIRAC_KIT_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(e.to_string()))
}

/// Runs the command; returns the output path, diagnostics and the outcome.
fn dispatch(cmd: Command) -> (Option<PathBuf>, Value, Result<Value, CliError>) {
    match cmd {
        Command::Lin { op, input, out } => {
            let diag = json!({"command": format!("lin {}", op.name())});
            let res = read_json(&input).and_then(|doc| lin::run(op, doc));
            (out, diag, res)
        }
        Command::Groupoid {
            command: GroupoidCommand::Check { omega, b, out },
        } => {
            let diag = json!({"command": "groupoid check"});
            let res = read_json(&omega)
                .and_then(|o| Ok((o, read_json(&b)?)))
                .and_then(|(o, b)| lin::groupoid_check(o, b));
            (out, diag, res)
        }
        Command::Surf { command } => {
            let (name, surface, out, res) = match command {
                SurfCommand::Classify {
                    f,
                    surface,
                    out,
                    curves_csv,
                    dot,
                } => {
                    let res = surf::classify_cmd(&f, &surface, curves_csv.as_deref(), dot.as_deref());
                    ("surf classify", surface, out, res)
                }
                SurfCommand::Compare {
                    f1,
                    f2,
                    tol,
                    surface,
                    out,
                } => {
                    let res = surf::compare_cmd(&f1, &f2, tol, &surface);
                    ("surf compare", surface, out, res)
                }
                SurfCommand::Gauge { f, b, surface, out } => {
                    let res = surf::gauge_cmd(&f, &b, &surface);
                    ("surf gauge", surface, out, res)
                }
            };
            let spec = surface.spec();
            let diag = json!({"command": name, "surface": spec.kind, "grid": spec.grid_n});
            (out, diag, res)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, diagnostics, res) = match configure_threads() {
        Ok(()) => dispatch(cli.command),
        Err(e) => (None, json!({}), Err(e)),
    };
    let (mut doc, code) = match res {
        Ok(result) => (json!({"ok": true, "result": result, "diagnostics": diagnostics}), 0),
        Err(e) => {
            eprintln!("dirac-kit: {e}");
            let code = e.exit_code();
            (json!({"ok": false, "error": e.to_json(), "diagnostics": diagnostics}), code)
        }
    };
    schema::round_floats(&mut doc);
    let text = serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n";
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("dirac-kit: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code)
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cylinder_cli::manifest::{BudgetOverrides, Switches};
use cylinder_cli::{run, Command, RunManifest, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "cylinder", version, about = "Checks, games and representation builders for finite algebras of relations")]
struct Cli {
    /// Input files, in the order the subcommand expects them.
    #[arg(long, global = true)]
    input: Vec<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    budget_atoms: Option<usize>,
    /// Cap on memoized game states and enumerated networks.
    #[arg(long, global = true)]
    budget_states: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel scans.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Leave strategies out of game outcomes.
    #[arg(long, global = true)]
    no_strategy: bool,
    /// Accept the red shade in coloured graphs.
    #[arg(long, global = true)]
    allow_shade: bool,
    /// Check axioms on every subset of atoms (at most 16).
    #[arg(long, global = true)]
    full_powerset: bool,
    #[command(subcommand)]
    command: Top,
}

#[derive(Subcommand)]
enum Top {
    #[command(flatten)]
    Run(Command),
    /// Re-run the manifest stored in a manifest or report file.
    Replay { manifest: PathBuf },
}

fn load_manifest(path: &Path) -> Result<RunManifest, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut v: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(inner) = v.get_mut("manifest").map(serde_json::Value::take) {
        v = inner;
    }
    serde_json::from_value(v).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (manifest, target) = match cli.command {
        Top::Run(command) => {
            let m = RunManifest {
                command,
                inputs: cli.input,
                output: cli.output.clone(),
                seed: cli.seed,
                budget: BudgetOverrides {
                    atoms: cli.budget_atoms,
                    states: cli.budget_states,
                },
                jobs: cli.jobs,
                switches: Switches {
                    no_strategy: cli.no_strategy,
                    allow_shade: cli.allow_shade,
                    full_powerset: cli.full_powerset,
                },
            };
            (m, cli.output)
        }
        Top::Replay { manifest } => match load_manifest(&manifest) {
            Ok(m) => {
                // the echo keeps the recorded output path even when redirected
                let target = cli.output.or_else(|| m.output.clone());
                (m, target)
            }
            Err(e) => {
                eprintln!("cylinder: {e}");
                return ExitCode::from(EXIT_USAGE as u8);
            }
        },
    };
    let (code, report) = run(&manifest);
    match target {
        Some(path) => {
            if let Err(e) = fs::write(&path, report) {
                eprintln!("cylinder: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
        None => print!("{report}"),
    }
    eprintln!("cylinder {}: exit {code}", manifest.command.name());
    ExitCode::from(code as u8)
}

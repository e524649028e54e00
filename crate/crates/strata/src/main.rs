use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use strata::analyze::{cmd_analyze, Report};
use strata::scenario::list_dir;
use strata::simulate::{cmd_simulate, Summary};
use strata::sweep::run_sweep;
use strata::CliError;

#[derive(Parser)]
#[command(
    name = "strata",
    version,
    about = "Layered stratified shallow-flow simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario (or run its experiment) and write CSV/JSON output.
    Simulate {
        /// Scenario file; several with --sweep.
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Run every scenario on the worker pool into <output>/<name>.
        #[arg(long)]
        sweep: bool,
    },
    /// Write an analysis report for a scenario.
    Analyze {
        #[arg(value_enum)]
        report: Report,
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Shipped scenario files.
    Scenarios {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// List scenario files with their variant and description.
    List {
        /// Directory to scan.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn event_note(s: &Summary) -> String {
    match s.shock_time {
        Some(t) => format!(" (shock at t = {t:.4})"),
        None if s.status == "hyperbolicity-loss" => " (hyperbolicity lost)".into(),
        None => String::new(),
    }
}

fn default_dir() -> PathBuf {
    let local = Path::new("scenarios");
    if local.is_dir() {
        local.to_path_buf()
    } else {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            scenarios,
            output,
            sweep,
        } => {
            if !sweep {
                if scenarios.len() != 1 {
                    return Err(CliError::Validation(
                        "several scenarios need --sweep".into(),
                    ));
                }
                let s = cmd_simulate(&scenarios[0], &output)?;
                println!("{}: {}{}", s.scenario, s.status, event_note(&s));
                return Ok(());
            }
            let items = run_sweep(&scenarios, &output)?;
            let mut worst: Option<CliError> = None;
            for it in items {
                match it.result {
                    Ok(s) => println!(
                        "{}: {}{} -> {}",
                        s.scenario,
                        s.status,
                        event_note(&s),
                        it.dir.display()
                    ),
                    Err(e) => {
                        eprintln!("{}: {e}", it.path.display());
                        if worst.as_ref().is_none_or(|w| e.exit_code() > w.exit_code()) {
                            worst = Some(e);
                        }
                    }
                }
            }
            worst.map_or(Ok(()), Err)
        }
        Command::Analyze {
            report,
            scenario,
            output,
        } => {
            cmd_analyze(report, &scenario, &output)?;
            println!("{} report written to {}", report.name(), output.display());
            Ok(())
        }
        Command::Scenarios {
            action: ScenarioAction::List { dir },
        } => {
            let dir = dir.unwrap_or_else(default_dir);
            for (path, setup) in list_dir(&dir)? {
                let file = path
                    .file_name()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_default();
                match setup {
                    Ok(s) => println!(
                        "{file:<28} {:<15} {}",
                        s.file.variant.as_str(),
                        s.file.description
                    ),
                    Err(e) => println!("{file:<28} invalid: {e}"),
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("strata: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

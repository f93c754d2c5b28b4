use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vcascade::cli::{cmd_minima, cmd_run, cmd_sweep, write_minima, CliError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "vcascade", version, about = "Two V-type atoms through an intensity-dependent cavity")]
struct Cli {
    /// Worker threads (1 forces sequential evaluation).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Scenario {
    /// Scenario file of `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a key, e.g. `--set delta1=7`. Repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Scenario {
    fn load(&self) -> Result<ScenarioConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::from_file(path)?,
            None => ScenarioConfig::default(),
        };
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// List local minima of the first-passage inversion as tau1 candidates.
    Minima(Scenario),
    /// Run both passages and write the requested observables.
    Run(Scenario),
    /// Repeat `run` over values of one parameter.
    Sweep {
        #[command(flatten)]
        scenario: Scenario,
        /// One of delta1, delta2, lambda1, alpha_sq, tau1.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Minima(s) => {
            let rows = cmd_minima(&s.load()?)?;
            let mut out = std::io::stdout().lock();
            match write_minima(&rows, &mut out) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
                _ => Ok(()),
            }
        }
        Command::Run(s) => {
            let summary = cmd_run(&s.load()?)?;
            if summary.wigner_coverage_warning {
                eprintln!("warning: Wigner grid does not contain the distribution; widen wigner_halfwidth");
            }
            println!(
                "wrote {} files to {} (n_max = {}, detection probability = {:.6e})",
                summary.files.len(),
                summary.out_dir.display(),
                summary.n_max,
                summary.probability
            );
            Ok(())
        }
        Command::Sweep { scenario, axis, values } => {
            let values: Vec<String> = values.into_iter().map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
            let points = cmd_sweep(&scenario.load()?, &axis, &values)?;
            for p in &points {
                match &p.outcome {
                    Ok(s) => println!("{axis} = {}: ok ({})", p.value, s.out_dir.display()),
                    Err(e) => eprintln!("{axis} = {}: failed (exit {}): {e}", p.value, e.exit_code()),
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(5);
        }
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

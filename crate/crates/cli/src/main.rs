use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use maxlab_cli::{list_experiments, resolve_threads, run, EXIT_ERROR, THREADS_ENV};

#[derive(Parser)]
#[command(name = "schro-maxlab", version, about = "Run maximal-estimate experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; falls back to SCHRO_MAXLAB_THREADS.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the registered experiments.
    List,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    match cli.command {
        Command::List => {
            for line in list_experiments() {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, out, threads } => {
            let env = std::env::var(THREADS_ENV).ok();
            let outcome = resolve_threads(threads, env.as_deref())
                .and_then(|threads| run(&config, out.as_deref(), threads));
            match outcome {
                Ok(outcome) => {
                    for check in &outcome.summary.checks {
                        let mark = if check.passed { "PASS" } else { "FAIL" };
                        println!("{mark} {}: {} ({})", check.name, check.observed, check.threshold);
                    }
                    for path in &outcome.written {
                        println!("wrote {}", path.display());
                    }
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_ERROR as u8)
                }
            }
        }
    }
}

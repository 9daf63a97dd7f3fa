use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use diana_cli::error::EXIT_USAGE;
use diana_cli::{cmd_compare, cmd_run, cmd_validate, CliError, Format, Report, RunConfig, Sweep, Verbosity};

#[derive(Parser)]
#[command(name = "diana-sched", version, about = "Data-intensive, network-aware grid scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print nothing but errors.
    #[arg(long, short, global = true, conflicts_with = "verbose")]
    quiet: bool,
    /// Also list written files and run details.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and list every violated constraint.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Simulate one scenario.
    Run(RunArgs),
    /// Simulate every sweep variant and compare them (schedulers by default).
    Compare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory, created if absent.
    #[arg(long, env = "DIANA_SCHED_OUT", default_value = "diana-out")]
    out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv")]
    format: Vec<Format>,
    /// Overrides the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// `path=v1,v2,...`; repeat for a cartesian product.
    #[arg(long)]
    sweep: Vec<Sweep>,
    /// Replace existing output files.
    #[arg(long)]
    overwrite: bool,
    /// Seconds per bucket of the local/migrated series (default: the scenario's estimate_window).
    #[arg(long)]
    bucket: Option<f64>,
    /// Job-count step of the execution-time series.
    #[arg(long, default_value_t = 10)]
    job_step: usize,
}

impl RunArgs {
    fn into_config(self, verbosity: Verbosity) -> RunConfig {
        RunConfig {
            scenario: self.scenario,
            out: self.out,
            formats: self.format.into_iter().collect::<BTreeSet<_>>(),
            sweep: self.sweep,
            seed: self.seed,
            overwrite: self.overwrite,
            verbosity,
            bucket: self.bucket,
            job_step: self.job_step,
        }
    }
}

fn print_report(report: &Report, verbosity: Verbosity) {
    if verbosity == Verbosity::Quiet {
        return;
    }
    print!("{}", report.table);
    for w in &report.warnings {
        eprintln!("{w}");
    }
    if verbosity == Verbosity::Verbose {
        for note in &report.notes {
            eprintln!("{note}");
        }
        for path in &report.written {
            eprintln!("wrote {}", path.display());
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbosity = match (cli.quiet, cli.verbose) {
        (true, _) => Verbosity::Quiet,
        (_, true) => Verbosity::Verbose,
        _ => Verbosity::Normal,
    };
    let result = match cli.command {
        Command::Validate { scenario } => match cmd_validate(&scenario) {
            Ok(()) => {
                if verbosity != Verbosity::Quiet {
                    println!("OK");
                }
                Ok(())
            }
            Err(e @ CliError::Invalid { .. }) => {
                // diagnostics are the command's output, one per line
                println!("{e}");
                return exit(&e);
            }
            Err(e) => Err(e),
        },
        Command::Run(args) => cmd_run(&args.into_config(verbosity)).map(|r| print_report(&r, verbosity)),
        Command::Compare(args) => cmd_compare(&args.into_config(verbosity)).map(|r| print_report(&r, verbosity)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit(&e)
        }
    }
}

fn exit(e: &CliError) -> ExitCode {
    ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(EXIT_USAGE as u8))
}

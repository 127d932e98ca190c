use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use calotrace::cli::{self, RunConfig};

#[derive(Parser)]
#[command(
    name = "calotrace",
    version,
    about = "Trace triples for nonnegative heat-equation solutions: evaluate, extract, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file (JSON); defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the config's probe seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Treat unachievable-tolerance verdicts as failures.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a triple's field on the configured grid (CSV + manifest).
    Eval {
        /// Trace-triple file (measure schema).
        #[arg(long)]
        triple: PathBuf,
    },
    /// Extract the trace triple back from a field and report diagnostics.
    Traces {
        #[arg(long)]
        triple: PathBuf,
    },
    /// Build, extract, and compare: the full both-directions check.
    Roundtrip {
        #[arg(long)]
        triple: PathBuf,
    },
    /// Compare the representation formula against the finite-difference
    /// oracle.
    OracleCompare {
        #[arg(long)]
        triple: PathBuf,
    },
    /// Kernel identity suite (semigroup, symmetry, positivity, bounds).
    KernelCheck,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let config = match &cli.config {
        Some(path) => RunConfig::load(path),
        None => {
            let mut cfg = RunConfig::default();
            cfg.apply_env_overrides().map(|_| cfg)
        }
    };
    let mut config = match config {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }

    let outcome = match &cli.command {
        Command::Eval { triple } => cli::cmd_eval(&config, triple, &cli.out),
        Command::Traces { triple } => cli::cmd_traces(&config, triple, &cli.out),
        Command::Roundtrip { triple } => cli::cmd_roundtrip(&config, triple, &cli.out),
        Command::OracleCompare { triple } => cli::cmd_oracle_compare(&config, triple, &cli.out),
        Command::KernelCheck => cli::cmd_kernel_check(&config, &cli.out),
    };

    match &outcome {
        Ok(out) => {
            if let Some(report) = &out.report {
                print!("{}", report.render_table());
            }
            for f in &out.files {
                eprintln!("wrote {}", f.display());
            }
            if out.non_convergent {
                eprintln!("warning: extraction limits did not converge within the schedule");
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(cli::exit_code_for(&outcome, cli.strict) as u8)
}

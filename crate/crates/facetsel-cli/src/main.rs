//! facetsel: compile dependency-laden fact graphs into macro-facets and
//! select near-optimal subsets under hierarchical quota constraints.

mod commands;
mod diag;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Algo;

#[derive(Parser)]
#[command(
    name = "facetsel",
    version,
    about = "Macro-facet compilation and quota-constrained greedy selection"
)]
struct Cli {
    /// Suppress summaries and warnings on stderr (errors still print).
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Condense a chronicle's implication graph into macro-facets.
    Compile {
        /// Chronicle JSON file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output file for the compiled macro-facet set (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate laminarity, matroid axioms, and utility shape.
    Verify {
        /// Macro-facet JSON file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Constraint JSON file.
        #[arg(long)]
        constraints: PathBuf,
        /// Optional utility JSON file to check for monotone submodularity.
        #[arg(long)]
        utility: Option<PathBuf>,
        /// Seed for the sampled utility check on large grounds.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file for the verdict report (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a selection algorithm over compiled macro-facets.
    Select {
        /// Macro-facet JSON file.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long)]
        utility: PathBuf,
        #[arg(long, value_enum, default_value = "greedy")]
        algo: Algo,
        /// Include the per-iteration decision trace in the output.
        #[arg(long)]
        trace: bool,
        /// Also run the exhaustive optimum and report the ratio.
        #[arg(long)]
        compare: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive optimal selection (brute force over independent sets).
    Optimal {
        /// Macro-facet JSON file.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long)]
        utility: PathBuf,
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the randomized approximation-ratio experiment.
    Simulate {
        #[arg(long, default_value_t = 5000)]
        trials: usize,
        /// Number of macro-facets per instance.
        #[arg(long = "macro", default_value_t = 14)]
        num_macro: usize,
        /// Size of the coverage universe.
        #[arg(long, default_value_t = 120)]
        universe: usize,
        /// Number of partition groups.
        #[arg(long, default_value_t = 4)]
        groups: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Directory for trials.csv, report.json, histogram.csv
        /// (defaults to $FACETSEL_OUT_DIR or the current directory).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.quiet;
    let outcome = match cli.command {
        Command::Compile { input, out } => commands::compile(input, out, quiet),
        Command::Verify {
            input,
            constraints,
            utility,
            seed,
            out,
        } => commands::verify(input, constraints, utility, seed, out, quiet),
        Command::Select {
            input,
            constraints,
            utility,
            algo,
            trace,
            compare,
            out,
        } => commands::select(
            input,
            constraints,
            utility,
            algo,
            trace,
            compare,
            out,
            quiet,
        ),
        Command::Optimal {
            input,
            constraints,
            utility,
            trace,
            out,
        } => commands::select(
            input,
            constraints,
            utility,
            Algo::Optimal,
            trace,
            false,
            out,
            quiet,
        ),
        Command::Simulate {
            trials,
            num_macro,
            universe,
            groups,
            seed,
            out_dir,
        } => commands::simulate(trials, num_macro, universe, groups, seed, out_dir, quiet),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            failure.diagnostic.emit();
            ExitCode::from(failure.exit_code as u8)
        }
    }
}

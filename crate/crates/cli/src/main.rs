//! Batch front end: fraig a netlist, check equivalence of two netlists,
//! or print statistics.
//!
//! Exit codes: 0 success (or circuits equivalent), 1 circuits differ,
//! 2 parse/usage error, 3 I/O error, 4 equivalence undecided.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use aigsweep_core::aig::Aig;
use aigsweep_core::fraig::{self, FraigConfig, MiterOutcome};
use aigsweep_core::session::EngineConfig;

const EXIT_DIFFER: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_UNDECIDED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "aigsweep",
    version,
    about = "AIG SAT sweeping and equivalence checking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EngineKind {
    Embedded,
    External,
}

#[derive(clap::Args)]
struct SweepOpts {
    /// Conflict budget per SAT check.
    #[arg(long, default_value_t = 1000)]
    limit: u64,
    /// Remove the conflict budget entirely.
    #[arg(long, conflicts_with = "limit")]
    no_limit: bool,
    /// Seed for simulation patterns.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// 64-bit simulation words per node.
    #[arg(long, default_value_t = 4)]
    sim_words: usize,
    /// Solver engine; `external` loads IPASIR_SHARED_LIBRARY.
    #[arg(long, value_enum, default_value_t = EngineKind::Embedded)]
    engine: EngineKind,
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep an AIGER netlist, merging provably equivalent nodes.
    Fraig {
        input: PathBuf,
        /// Output AIGER path.
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        opts: SweepOpts,
    },
    /// Check two AIGER netlists for combinational equivalence.
    CheckEquiv {
        first: PathBuf,
        second: PathBuf,
        #[command(flatten)]
        opts: SweepOpts,
    },
    /// Print node counts for an AIGER netlist.
    Stats { input: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Fraig {
            input,
            output,
            opts,
        } => cmd_fraig(&input, &output, &opts),
        Command::CheckEquiv {
            first,
            second,
            opts,
        } => cmd_check_equiv(&first, &second, &opts),
        Command::Stats { input } => cmd_stats(&input),
    }
}

fn read_aig(path: &PathBuf) -> Result<Aig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_IO)
    })?;
    Aig::parse_aiger(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })
}

fn engine_config(opts: &SweepOpts) -> Result<EngineConfig, ExitCode> {
    match opts.engine {
        EngineKind::Embedded => Ok(EngineConfig::Embedded),
        EngineKind::External => {
            if std::env::var_os(aigsweep_core::backend::IPASIR_ENV).is_none() {
                eprintln!(
                    "error: --engine external requires {} to point at a shared library",
                    aigsweep_core::backend::IPASIR_ENV
                );
                return Err(ExitCode::from(EXIT_PARSE));
            }
            Ok(EngineConfig::External { library: None })
        }
    }
}

fn fraig_config(opts: &SweepOpts) -> FraigConfig {
    FraigConfig {
        sim_words: opts.sim_words.max(1),
        solve_limit: if opts.no_limit {
            None
        } else {
            Some(opts.limit)
        },
        rng_seed: opts.seed,
        ..FraigConfig::default()
    }
}

fn cmd_fraig(input: &PathBuf, output: &PathBuf, opts: &SweepOpts) -> ExitCode {
    let g = match read_aig(input) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let engine = match engine_config(opts) {
        Ok(e) => e,
        Err(code) => return code,
    };
    let result = match fraig::sweep_with_engine(&g, &fraig_config(opts), &engine) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let swept = result.aig.prune_unreachable();
    if let Err(e) = std::fs::write(output, swept.write_aiger()) {
        eprintln!("error: cannot write {}: {e}", output.display());
        return ExitCode::from(EXIT_IO);
    }
    let c = result.counters;
    println!("nodes {} -> {}", g.node_count(), swept.node_count());
    println!("ands {} -> {}", g.and_count(), swept.and_count());
    println!(
        "checks: proved {} cex {} limited {} refinements {}",
        c.proved, c.cex, c.limited, c.refinements
    );
    if opts.verbose {
        println!(
            "inputs {} regs {} outputs {}",
            swept.num_inputs(),
            swept.num_regs(),
            swept.outputs().len()
        );
    }
    ExitCode::SUCCESS
}

fn cmd_check_equiv(first: &PathBuf, second: &PathBuf, opts: &SweepOpts) -> ExitCode {
    let g1 = match read_aig(first) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let g2 = match read_aig(second) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let engine = match engine_config(opts) {
        Ok(e) => e,
        Err(code) => return code,
    };
    match fraig::miter_check_with_engine(&g1, &g2, &fraig_config(opts), &engine) {
        Ok(MiterOutcome::Equivalent) => {
            println!("EQUIVALENT");
            ExitCode::SUCCESS
        }
        Ok(MiterOutcome::Differ { invals, regvals }) => {
            println!("DIFFER");
            for (k, v) in invals.iter().enumerate() {
                println!("i{k}={}", *v as u8);
            }
            for (k, v) in regvals.iter().enumerate() {
                println!("r{k}={}", *v as u8);
            }
            ExitCode::from(EXIT_DIFFER)
        }
        Ok(MiterOutcome::Undecided) => {
            println!("UNDECIDED");
            ExitCode::from(EXIT_UNDECIDED)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_PARSE)
        }
    }
}

fn cmd_stats(input: &PathBuf) -> ExitCode {
    let g = match read_aig(input) {
        Ok(g) => g,
        Err(code) => return code,
    };
    println!("nodes {}", g.node_count());
    println!("inputs {}", g.num_inputs());
    println!("registers {}", g.num_regs());
    println!("outputs {}", g.outputs().len());
    println!("ands {}", g.and_count());
    ExitCode::SUCCESS
}

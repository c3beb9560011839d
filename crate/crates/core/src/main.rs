use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wmarg::cli::{self, Failure, Mode, Output, EXIT_PARSE};
use wmarg::Tolerances;

/// Two-party marginals of qubit states and reconstruction of W-class states.
#[derive(Parser)]
#[command(name = "wmarg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output file, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
struct TolArgs {
    /// Threshold below which a matrix entry counts as zero.
    #[arg(long, default_value_t = Tolerances::default().zero)]
    tol_zero: f64,
    /// Allowed mismatch between marginal data and a candidate state.
    #[arg(long, default_value_t = Tolerances::default().consistency)]
    tol_consistency: f64,
}

impl TolArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances::default().with_zero(self.tol_zero).with_consistency(self.tol_consistency)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Mixed,
    PureStar,
}

#[derive(Subcommand)]
enum Command {
    /// Reduced density matrices of a state file on the given subsets.
    Marginals {
        /// State file (pure or w), `-` for stdin.
        state: PathBuf,
        /// Subsets such as `12,34`, `1-12,3-10`, `star` or `all-pairs`.
        #[arg(long)]
        subsets: String,
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruct a W-class state from a marginal file.
    Reconstruct {
        /// Marginal file, `-` for stdin.
        marginals: PathBuf,
        #[arg(long, value_enum, default_value = "mixed")]
        mode: ModeArg,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Sample marginal-preserving directions around a W-class state.
    VerifyUnique {
        /// W-class state file, `-` for stdin.
        state: PathBuf,
        /// Pair set such as `12,34`, `star` or `all-pairs`.
        #[arg(long, default_value = "all-pairs")]
        pairs: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Phase-twist a W-class state block by block and report pair residuals.
    Counterexample {
        /// W-class state file, `-` for stdin.
        state: PathBuf,
        /// Partition of the parties such as `34|12`.
        #[arg(long)]
        blocks: String,
        /// One phase per block, in radians, such as `0.7,1.9`.
        #[arg(long)]
        phases: String,
        #[command(flatten)]
        common: Common,
    },
    /// Multi-start fit of reduced pure states to a marginal file.
    Fit {
        /// Marginal file, `-` for stdin.
        marginals: PathBuf,
        #[arg(long, default_value_t = 16)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        common: Common,
    },
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    let mut text = String::new();
    let res = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Failure { code: EXIT_PARSE, message: format!("cannot read {}: {e}", path.display()) })?;
    Ok(text)
}

fn write_output(path: &PathBuf, text: &str) -> Result<(), Failure> {
    let res = if path.as_os_str() == "-" {
        std::io::stdout().lock().write_all(text.as_bytes())
    } else {
        std::fs::write(path, text)
    };
    res.map_err(|e| Failure { code: EXIT_PARSE, message: format!("cannot write {}: {e}", path.display()) })
}

fn run(cmd: Command) -> Result<i32, Failure> {
    let (out, common): (Output, Common) = match cmd {
        Command::Marginals { state, subsets, common } => (cli::marginals(&read_input(&state)?, &subsets)?, common),
        Command::Reconstruct { marginals, mode, tol, common } => {
            let mode = match mode {
                ModeArg::Mixed => Mode::Mixed,
                ModeArg::PureStar => Mode::PureStar,
            };
            (cli::reconstruct(&read_input(&marginals)?, mode, tol.tolerances())?, common)
        }
        Command::VerifyUnique { state, pairs, samples, seed, tol, common } => {
            (cli::verify_unique(&read_input(&state)?, &pairs, samples, seed, tol.tolerances())?, common)
        }
        Command::Counterexample { state, blocks, phases, common } => {
            (cli::counterexample(&read_input(&state)?, &blocks, &phases)?, common)
        }
        Command::Fit { marginals, starts, seed, tol, common } => {
            (cli::fit(&read_input(&marginals)?, starts, seed, tol.tolerances())?, common)
        }
    };
    write_output(&common.out, &out.text)?;
    Ok(out.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("wmarg: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}

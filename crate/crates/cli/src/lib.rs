//! Command-line front end: argument parsing, file formats and JSON reports.
//!
//! [`run`] never exits the process; `main` turns its [`Outcome`] into output
//! and an exit code. Exit codes: 0 found/true, 1 not found/false or
//! exhausted, 2 capped/partial, 64 usage error.

mod commands;
pub mod formats;
pub mod report;

pub use commands::{check_record, witness_records};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ramsey_core::SearchConfig;
use report::Report;
use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

pub const EXIT_USAGE: i32 = 64;

/// A malformed input; the message names the offending token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UsageError(String);

impl UsageError {
    pub fn new(msg: impl Into<String>) -> Self {
        UsageError(msg.into())
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "ramsey", version, about = "Finite-window searches for arithmetic Ramsey patterns")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Worker threads for parallel searches. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
    workers: u64,
    /// Cap on search-tree nodes.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    max_nodes: Option<u64>,
    /// Largest window [1..n] a search may use.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    max_window: Option<u64>,
    /// Bit cap for exact exponential arithmetic.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    bit_cap: Option<u64>,
    /// Largest cube stored densely.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    max_points: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

impl Global {
    fn config(&self) -> SearchConfig {
        let d = SearchConfig::default();
        SearchConfig {
            workers: self.workers as usize,
            max_nodes: self.max_nodes.unwrap_or(d.max_nodes),
            max_window: self.max_window.map_or(d.max_window, |w| w as usize),
            bit_cap: self.bit_cap.unwrap_or(d.bit_cap),
            max_points: self.max_points.unwrap_or(d.max_points),
            max_family: d.max_family,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct SeqArgs {
    /// Generator sequence, e.g. 1,2,4.
    #[arg(long)]
    seq: String,
    /// Allow repeated generators.
    #[arg(long)]
    allow_repeats: bool,
}

#[derive(Args, Debug, Clone, Copy)]
struct AnchorArgs {
    /// Include the anchor a itself (the default).
    #[arg(long, overrides_with = "no_anchor")]
    anchor: bool,
    /// Leave the anchor out of the configuration.
    #[arg(long, overrides_with = "anchor")]
    no_anchor: bool,
}

impl AnchorArgs {
    fn include(self) -> bool {
        self.anchor || !self.no_anchor
    }
}

/// Where an integer coloring comes from.
#[derive(Args, Debug, Clone)]
struct ColoringSource {
    /// Coloring file.
    #[arg(long, conflicts_with = "rule")]
    coloring: Option<PathBuf>,
    /// Inline rule expression, e.g. mod:2:0,1.
    #[arg(long)]
    rule: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Op {
    Additive,
    Multiplicative,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Finite sums of a sequence.
    Fs(SeqArgs),
    /// Finite products of a sequence.
    Fp(SeqArgs),
    /// Finite exponential towers of a sequence.
    Fep(SeqArgs),
    /// Is y a sum subsystem of x?
    SumsubCheck {
        #[arg(long)]
        y: String,
        #[arg(long)]
        x: String,
    },
    /// First monochromatic polynomial configuration in a coloring.
    FindConfig {
        #[command(flatten)]
        source: ColoringSource,
        /// Polynomial family, e.g. "d,d^2".
        #[arg(long)]
        poly: String,
        #[command(flatten)]
        anchor: AnchorArgs,
        /// Window for rule colorings.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Least n forcing a pattern in every r-coloring of [1..n].
    Threshold {
        /// Registered pattern: vdw, poly, schur or product-schur.
        #[arg(long)]
        kind: String,
        /// Progression length for vdw.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        r: usize,
        /// Largest window tried.
        #[arg(long = "max", default_value_t = 64)]
        n_max: usize,
        /// Polynomial family for poly.
        #[arg(long)]
        poly: Option<String>,
        #[command(flatten)]
        anchor: AnchorArgs,
        /// Schur triples need x < y.
        #[arg(long)]
        distinct: bool,
    },
    /// First monochromatic Schur triple in a coloring.
    Schur {
        #[command(flatten)]
        source: ColoringSource,
        #[arg(long, value_enum, default_value_t = Op::Additive)]
        op: Op,
        /// Accept x = y.
        #[arg(long)]
        allow_equal: bool,
        #[arg(long)]
        window: Option<usize>,
    },
    /// First monochromatic {x, y, x^y} under a rule coloring.
    ExpSearch {
        #[command(flatten)]
        source: ColoringSource,
        #[arg(long)]
        x_max: u64,
        #[arg(long)]
        y_max: u64,
    },
    /// First monochromatic combinatorial line in a cube coloring.
    HjSearch {
        #[arg(long)]
        cube: PathBuf,
    },
    /// Least N forcing a monochromatic line in [t]^N.
    HjNumber {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        t: u32,
        #[arg(long = "max")]
        n_max: usize,
    },
    /// First monochromatic polynomial pattern in a Q(N) coloring.
    PhjSearch {
        #[arg(long)]
        cube: PathBuf,
    },
    /// Embed a Q(N) point, or check the embedding identity exhaustively.
    PhjEmbed {
        /// Point levels, e.g. "1,2;1,1,2,2".
        #[arg(long, required_unless_present = "exhaustive")]
        point: Option<String>,
        #[arg(long, required_unless_present = "exhaustive")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "exhaustive")]
        xs: Option<String>,
        /// Variable set γ; with --c the overwritten point is embedded too.
        #[arg(long, requires = "c")]
        gamma: Option<String>,
        /// Level values c_1..c_d written on γ.
        #[arg(long, requires = "gamma")]
        c: Option<String>,
        #[arg(long, conflicts_with_all = ["point", "gamma"])]
        exhaustive: bool,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        #[arg(long, default_value_t = 2)]
        d_max: usize,
        #[arg(long, default_value_t = 3)]
        q_max: u32,
        #[arg(long, default_value_t = 4)]
        x_max: u64,
    },
    /// The set R of n whose anchor set is piecewise syndetic.
    #[command(name = "config-R")]
    ConfigR {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        poly: String,
        #[arg(long)]
        g: usize,
        #[arg(long)]
        l: usize,
    },
    /// Does a set meet FS of every length-r sequence in its window?
    IpstarCheck {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        allow_repeats: bool,
    },
    /// Least r with R an IP_r* set inside the window.
    IprVerify {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        poly: String,
        #[arg(long)]
        g: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        r_max: usize,
        #[arg(long)]
        allow_repeats: bool,
    },
    /// Sum subsystem of x whose sums and products shift into A.
    SumsubSearch {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        set_b: Option<PathBuf>,
        #[arg(long)]
        x: String,
        #[arg(long)]
        poly: String,
        #[arg(long)]
        n_target: usize,
    },
    /// Evaluate a tower expression, f_k(x), or n^a·b.
    Tower {
        /// Prefix expression, e.g. "(^ 2 (^ 2 3))".
        #[arg(long, group = "what")]
        expr: Option<String>,
        /// k of f_k(x).
        #[arg(long, group = "what", requires = "x")]
        f_seq: Option<usize>,
        #[arg(long)]
        x: Option<u64>,
        /// "n,a,b" for n^a·b.
        #[arg(long, group = "what")]
        star: Option<String>,
    },
    /// Values n^(s)·x_k for every exponent sum s the choices allow.
    PfPattern {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        xs: String,
        /// Families for indices 1..k_max−1, separated by ';'.
        #[arg(long)]
        polys: String,
        #[arg(long)]
        k_max: usize,
    },
    /// Re-check witnesses from a report or witness file.
    VerifyWitness {
        #[arg(long)]
        witness: PathBuf,
        #[command(flatten)]
        source: ColoringSource,
        #[arg(long, conflicts_with_all = ["coloring", "rule"])]
        set: Option<PathBuf>,
        #[arg(long, requires = "set")]
        set_b: Option<PathBuf>,
    },
    /// First sequence whose FEP set is monochromatic.
    FepSearch {
        /// Candidate range lo..hi.
        #[arg(long, group = "cands")]
        range: Option<String>,
        /// Candidate blocks, e.g. "2,3;5,7".
        #[arg(long, group = "cands")]
        blocks: Option<String>,
        #[arg(long)]
        size: usize,
        #[command(flatten)]
        source: ColoringSource,
    },
    /// Is every 2^(Σλ_i a_i)·a_k the color of a_1?
    LambdaCheck {
        #[arg(long)]
        a: String,
        #[arg(long)]
        big_n: u64,
        /// Explicit bounds for i = 2.., comma separated; tower bounds otherwise.
        #[arg(long)]
        bounds: Option<String>,
        #[command(flatten)]
        source: ColoringSource,
        #[arg(long, default_value_t = 1_000_000)]
        max_elements: u64,
    },
}

/// Result of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<Report>,
    /// Usage errors, help and version text.
    pub message: Option<String>,
    pub output: Option<PathBuf>,
}

/// Parse `argv` (program name first) and run the subcommand.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            return Outcome {
                code,
                report: None,
                message: Some(e.to_string()),
                output: None,
            };
        }
    };
    let cfg = cli.global.config();
    let start = Instant::now();
    match commands::dispatch(cli.command, &cfg) {
        Ok(mut report) => {
            report.perf.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            report.perf.workers = cfg.workers;
            Outcome {
                code: report.exit_code(),
                report: Some(report),
                message: None,
                output: cli.global.output,
            }
        }
        Err(e) => Outcome {
            code: EXIT_USAGE,
            report: None,
            message: Some(format!("error: {e}")),
            output: None,
        },
    }
}

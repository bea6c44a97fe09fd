//! Command-line front end.
//!
//! Exit codes: 0 success or match, 1 mismatch or failed verification,
//! 2 usage error, 3 I/O or file format error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::{avalanche, construct_collision, linearity_report};
use crate::bench;
use crate::digest::{Digest, HashParams, Hasher, Model};
use crate::error::Error;
use crate::matfile::{self, MatrixFileError};
use crate::matgen::{gen_noninvertible, Seed, SplitMix64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable consulted for the benchmark buffer seed.
pub const SEED_ENV: &str = "GF2HASH_SEED";

const DEFAULT_BENCH_SIZES: &str = "32,64,128,256,512,1K,2K,4K,8K,16K,32K,64K,128K,256K,1M";

#[derive(Debug, Parser)]
#[command(
    name = "gf2hash",
    version,
    about = "One-way hashing with singular GF(2) matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalyzeMode {
    Collision,
    Avalanche,
    Linearity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Kv,
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse::<Model>().map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a singular matrix as the sum of two seeded permutation matrices.
    Genmat {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hash a file, or standard input when no file is given.
    Hash {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "2", value_parser = parse_model)]
        model: Model,
        /// Print the digest as hex (default).
        #[arg(long, conflicts_with = "bits")]
        hex: bool,
        /// Print the digest as a string of bits.
        #[arg(long)]
        bits: bool,
        file: Option<PathBuf>,
    },
    /// Check a matrix file's checksum and structural invariants.
    VerifyMatrix { path: PathBuf },
    /// Recompute a digest and compare it with an expected value.
    Check {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "2", value_parser = parse_model)]
        model: Model,
        #[arg(long)]
        expected: String,
        file: PathBuf,
    },
    /// Time the hash against SHA-256 over a range of input sizes.
    Bench {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "2", value_parser = parse_model)]
        model: Model,
        /// Comma-separated byte counts; K, M, G suffixes are binary.
        #[arg(long, default_value = DEFAULT_BENCH_SIZES)]
        sizes: String,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Seed for the input buffers.
        #[arg(long, env = SEED_ENV)]
        seed: Option<u64>,
        /// Write the CSV copy here instead of after the table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Collision, avalanche, or linearity analysis.
    Analyze {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "2", value_parser = parse_model)]
        model: Model,
        #[arg(long, value_enum)]
        mode: AnalyzeMode,
        /// Defaults: 10000 for avalanche, 1000 for linearity.
        #[arg(long)]
        trials: Option<usize>,
        /// Message length in bytes for random inputs.
        #[arg(long, default_value_t = 64)]
        len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Base message for collision mode (random `--len` bytes otherwise).
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(EXIT_IO, format!("i/o error: {e}"))
    }
}

impl From<MatrixFileError> for Failure {
    fn from(e: MatrixFileError) -> Self {
        Failure::new(EXIT_IO, format!("matrix file: {e}"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::MatrixFile(_) => EXIT_IO,
            Error::CollisionNotFound(_) => EXIT_MISMATCH,
            _ => EXIT_USAGE,
        };
        Failure::new(code, e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    write!(out, "{e}")
                }
                _ => write!(err, "{e}"),
            };
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command, stdin, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(
    cmd: Command,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    match cmd {
        Command::Genmat {
            size,
            seed,
            out: path,
        } => genmat(size, seed, &path, out),
        Command::Hash {
            matrix,
            model,
            bits,
            file,
            ..
        } => hash_cmd(&matrix, model, bits, file.as_deref(), stdin, out),
        Command::VerifyMatrix { path } => verify_matrix(&path, out),
        Command::Check {
            matrix,
            model,
            expected,
            file,
        } => check(&matrix, model, &expected, &file, out),
        Command::Bench {
            matrix,
            model,
            sizes,
            reps,
            seed,
            csv,
        } => bench_cmd(
            &matrix,
            model,
            &sizes,
            reps,
            seed.unwrap_or(0),
            csv.as_deref(),
            out,
            err,
        ),
        Command::Analyze {
            matrix,
            model,
            mode,
            trials,
            len,
            seed,
            base,
            format,
        } => analyze(
            &matrix,
            model,
            mode,
            trials,
            len,
            seed,
            base.as_deref(),
            format,
            out,
        ),
    }
}

fn load_params(path: &Path, model: Model) -> Result<HashParams, Failure> {
    let p = matfile::read_file(path)?;
    Ok(HashParams::new(p, model)?)
}

fn genmat(size: usize, seed: u64, path: &Path, out: &mut dyn Write) -> CmdResult {
    let p = gen_noninvertible(size, Seed(seed))?;
    matfile::write_file(path, &p)?;
    writeln!(
        out,
        "wrote {} (m = {size}, rank = {}, seed = {seed})",
        path.display(),
        p.rank()
    )?;
    Ok(EXIT_OK)
}

fn digest_reader(params: &HashParams, reader: &mut dyn Read) -> io::Result<Digest> {
    let mut hasher = Hasher::new(params);
    let mut buf = vec![0u8; 1 << 16];
    loop {
        match reader.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => hasher.update(&buf[..n]),
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(hasher.finalize())
}

fn digest_path(params: &HashParams, path: &Path) -> Result<Digest, Failure> {
    let mut file =
        File::open(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    Ok(digest_reader(params, &mut file)?)
}

fn hash_cmd(
    matrix: &Path,
    model: Model,
    bits: bool,
    file: Option<&Path>,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
) -> CmdResult {
    let params = load_params(matrix, model)?;
    let digest = match file {
        Some(path) => digest_path(&params, path)?,
        None => digest_reader(&params, stdin)?,
    };
    if bits {
        writeln!(out, "{}", digest.to_bit_string())?;
    } else {
        writeln!(out, "{digest}")?;
    }
    Ok(EXIT_OK)
}

fn verify_matrix(path: &Path, out: &mut dyn Write) -> CmdResult {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    let report = matfile::inspect(&bytes);
    if let Some(p) = &report.matrix {
        let rank = p.rank();
        writeln!(
            out,
            "m = {}, rank = {rank}, nullity = {}",
            p.rows(),
            p.rows() - rank
        )?;
    }
    for failure in &report.failures {
        writeln!(out, "FAIL: {failure}")?;
    }
    if report.is_valid() {
        writeln!(
            out,
            "OK: checksum valid, matrix singular, row/column weights in {{0, 2}}"
        )?;
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_MISMATCH)
    }
}

fn check(
    matrix: &Path,
    model: Model,
    expected: &str,
    file: &Path,
    out: &mut dyn Write,
) -> CmdResult {
    let params = load_params(matrix, model)?;
    let expected = Digest::parse(expected, params.m())?;
    let actual = digest_path(&params, file)?;
    if actual == expected {
        writeln!(out, "OK {actual}")?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "MISMATCH\nexpected: {expected}\nactual:   {actual}")?;
        Ok(EXIT_MISMATCH)
    }
}

#[allow(clippy::too_many_arguments)]
fn bench_cmd(
    matrix: &Path,
    model: Model,
    sizes: &str,
    reps: usize,
    seed: u64,
    csv: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let params = load_params(matrix, model)?;
    let sizes = bench::parse_sizes(sizes)?;
    let report = bench::run(&params, &sizes, reps, Seed(seed))?;
    for w in &report.warnings {
        writeln!(err, "warning: {w}")?;
    }
    write!(out, "{}", report.to_table())?;
    match csv {
        Some(path) => std::fs::write(path, report.to_csv())?,
        None => write!(out, "\n{}", report.to_csv())?,
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    matrix: &Path,
    model: Model,
    mode: AnalyzeMode,
    trials: Option<usize>,
    len: usize,
    seed: u64,
    base: Option<&Path>,
    format: ReportFormat,
    out: &mut dyn Write,
) -> CmdResult {
    let params = load_params(matrix, model)?;
    let render = |text: String, kv: String| match format {
        ReportFormat::Text => text,
        ReportFormat::Kv => kv,
    };
    match mode {
        AnalyzeMode::Collision => {
            let msg = match base {
                Some(path) => std::fs::read(path)?,
                None => SplitMix64::new(Seed(seed)).bytes(len),
            };
            let pair = construct_collision(&params, &msg)?;
            write!(out, "{}", render(pair.to_text(), pair.to_kv()))?;
            Ok(EXIT_OK)
        }
        AnalyzeMode::Avalanche => {
            let report = avalanche(&params, trials.unwrap_or(10_000), len, Seed(seed))?;
            write!(out, "{}", render(report.to_text(), report.to_kv()))?;
            Ok(EXIT_OK)
        }
        AnalyzeMode::Linearity => {
            let report = linearity_report(&params, trials.unwrap_or(1000), len, Seed(seed))?;
            write!(out, "{}", render(report.to_text(), report.to_kv()))?;
            Ok(if report.holds() {
                EXIT_OK
            } else {
                EXIT_MISMATCH
            })
        }
    }
}

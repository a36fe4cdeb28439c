//! Command-line front end.
//!
//! Standard output carries a `key=value` report; `-v` appends a
//! human-readable rendering. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | I/O or parse failure |
//! | 2 | invalid spectrum or usage |
//! | 3 | exact-search limit exceeded |
//! | 4 | verification failed |
//! | 5 | exact checks requested on an inexact matrix |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use itertools::Itertools;

use crate::analysis::{
    sparsity, verify_approximate, verify_with_limit, ApproximateReport, VerificationReport,
    FLOAT_TOLERANCE,
};
use crate::blocks::{maximal_block_number_with_limit, EigenvalueSpec, DEFAULT_SEARCH_LIMIT};
use crate::error::FrameError;
use crate::io::{export_matrix_with_header, import_matrix_with_header, Format, Header, IoError};
use crate::numeric::{Rational, SignedRoot};
use crate::tetris::{spectral_tetris, CursorTrace, StepCase, SynthesisMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SEARCH_LIMIT: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;
pub const EXIT_INEXACT: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "spectral-tetris",
    version,
    about = "Optimally sparse unit-norm frames with a prescribed spectrum"
)]
pub struct Cli {
    /// Append a human-readable rendering after the report.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a frame and write its synthesis matrix.
    Generate(GenerateArgs),
    /// Print the maximal block number and a blockwise ordering.
    Mu(SpectrumArgs),
    /// Print the sparsity lower bound N + 2(n - mu).
    Bound(SpectrumArgs),
    /// Check a synthesis matrix against a spectrum.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    /// Dimension n.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of frame vectors N.
    #[arg(long)]
    pub count: Option<usize>,
    /// Comma-separated eigenvalues, e.g. 8/3,8/3,8/3,2.
    #[arg(long, value_delimiter = ',', conflicts_with = "tight")]
    pub eigenvalues: Option<Vec<String>>,
    /// Use the tight spectrum N/n repeated n times.
    #[arg(long, requires_all = ["dim", "count"])]
    pub tight: bool,
    /// Maximum number of non-integer eigenvalues for the exact search.
    #[arg(long, default_value_t = DEFAULT_SEARCH_LIMIT)]
    pub limit: usize,
}

impl SpectrumArgs {
    fn given(&self) -> bool {
        self.tight || self.eigenvalues.is_some()
    }

    fn resolve(&self) -> Result<EigenvalueSpec, Failure> {
        if self.tight {
            let (Some(count), Some(dim)) = (self.count, self.dim) else {
                return Err(Failure::usage("--tight needs --dim and --count"));
            };
            return Ok(EigenvalueSpec::tight(count, dim)?);
        }
        let Some(texts) = &self.eigenvalues else {
            return Err(Failure::usage(
                "give exactly one of --eigenvalues or --tight",
            ));
        };
        let lambdas = texts
            .iter()
            .map(|t| Rational::parse(t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::usage(format!("--eigenvalues: {e}")))?;
        if let Some(dim) = self.dim {
            if dim != lambdas.len() {
                return Err(Failure::usage(format!(
                    "--dim {dim} but {} eigenvalues given",
                    lambdas.len()
                )));
            }
        }
        Ok(match self.count {
            Some(count) => EigenvalueSpec::new(lambdas, count)?,
            None => EigenvalueSpec::from_lambdas(lambdas)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderingMode {
    /// Reorder to attain the maximal block number.
    Blockwise,
    /// Use the eigenvalues in the order given.
    AsGiven,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    #[arg(long, value_enum, default_value_t = OrderingMode::Blockwise)]
    pub ordering: OrderingMode,
    #[arg(long, value_enum, default_value_t = Format::ExactJson)]
    pub format: Format,
    /// Output file; `-` writes the matrix to stdout and the report to stderr.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Matrix file to check.
    pub matrix: PathBuf,
    /// Input format; inferred from the extension when omitted
    /// (.mtx, .csv, anything else is exact-json).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Require exact checks; inexact inputs fail with exit code 5.
    #[arg(long)]
    pub exact: bool,
    /// Spectrum to check against; defaults to the one stored in the file.
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(EXIT_INVALID, message)
    }
}

impl From<FrameError> for Failure {
    fn from(err: FrameError) -> Self {
        let code = match err {
            FrameError::SearchLimit { .. } => EXIT_SEARCH_LIMIT,
            FrameError::Inexact => EXIT_INEXACT,
            FrameError::InvalidSpec(_)
            | FrameError::OrderingMismatch
            | FrameError::DimensionMismatch(_)
            | FrameError::Numeric(_) => EXIT_INVALID,
            _ => EXIT_IO,
        };
        Failure::new(code, err.to_string())
    }
}

impl From<IoError> for Failure {
    fn from(err: IoError) -> Self {
        Failure::new(EXIT_IO, err.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                return EXIT_INVALID;
            }
            let _ = write!(out, "{rendered}");
            return EXIT_OK;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let verbose = cli.verbose > 0;
    match &cli.command {
        Command::Generate(args) => generate(args, verbose, out, err),
        Command::Mu(args) => mu(args, verbose, out),
        Command::Bound(args) => bound(args, out),
        Command::Verify(args) => verify_file(args, verbose, out),
    }
}

fn write_failed(e: std::io::Error) -> Failure {
    Failure::new(EXIT_IO, format!("write failed: {e}"))
}

fn join(values: &[Rational]) -> String {
    values.iter().join(",")
}

fn generate(
    args: &GenerateArgs,
    verbose: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let spec = args.spectrum.resolve()?;
    let blocks = maximal_block_number_with_limit(&spec, args.spectrum.limit)?;
    let ordering = match args.ordering {
        OrderingMode::Blockwise => blocks.ordering.clone(),
        OrderingMode::AsGiven => spec.lambdas().to_vec(),
    };
    let (matrix, trace) = spectral_tetris(&spec, &ordering)?;
    let nnz = sparsity(&matrix);
    let bound = spec.count() + 2 * (spec.dim() - blocks.mu);

    let mut report = String::new();
    report.push_str(&format!("n={}\nN={}\n", spec.dim(), spec.count()));
    report.push_str(&format!("mu={}\n", blocks.mu));
    report.push_str(&format!("ordering={}\n", join(&ordering)));
    report.push_str(&format!("sparsity={nnz}\nbound={bound}\n"));
    report.push_str(&format!("optimal={}\n", nnz == bound));
    if verbose {
        report.push('\n');
        report.push_str(&render_trace(&trace));
        report.push('\n');
        report.push_str(&render_matrix(&matrix)?);
    }

    let header = Header {
        spec: Some(spec.lambdas().to_vec()),
        mu: Some(blocks.mu),
    };
    let bytes = export_matrix_with_header(&matrix, args.format, &header)?;
    match args.output.as_deref() {
        Some(path) if path == Path::new("-") => {
            out.write_all(&bytes).map_err(write_failed)?;
            err.write_all(report.as_bytes()).map_err(write_failed)?;
        }
        Some(path) => {
            std::fs::write(path, &bytes).map_err(|e| {
                Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display()))
            })?;
            out.write_all(report.as_bytes()).map_err(write_failed)?;
        }
        None => out.write_all(report.as_bytes()).map_err(write_failed)?,
    }
    Ok(EXIT_OK)
}

fn mu(args: &SpectrumArgs, verbose: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let spec = args.resolve()?;
    let blocks = maximal_block_number_with_limit(&spec, args.limit)?;
    let mut report = format!(
        "mu={}\nordering={}\nrow_bounds={}\ncolumn_bounds={}\n",
        blocks.mu,
        join(&blocks.ordering),
        blocks.row_bounds.iter().join(","),
        blocks.column_bounds.iter().join(","),
    );
    if verbose {
        report.push('\n');
        for (i, block) in blocks.blocks().enumerate() {
            let total: Rational = block.iter().sum();
            report.push_str(&format!(
                "block {}: {} (sum {})\n",
                i + 1,
                join(block),
                total
            ));
        }
    }
    out.write_all(report.as_bytes()).map_err(write_failed)?;
    Ok(EXIT_OK)
}

fn bound(args: &SpectrumArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let spec = args.resolve()?;
    let mu = maximal_block_number_with_limit(&spec, args.limit)?.mu;
    let bound = spec.count() + 2 * (spec.dim() - mu);
    let report = format!(
        "n={}\nN={}\nmu={mu}\nbound={bound}\n",
        spec.dim(),
        spec.count()
    );
    out.write_all(report.as_bytes()).map_err(write_failed)?;
    Ok(EXIT_OK)
}

fn infer_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("mtx") => Format::MatrixMarket,
        Some("csv") => Format::Csv,
        _ => Format::ExactJson,
    }
}

fn verify_file(args: &VerifyArgs, verbose: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let format = args.format.unwrap_or_else(|| infer_format(&args.matrix));
    let bytes = std::fs::read(&args.matrix).map_err(|e| {
        Failure::new(
            EXIT_IO,
            format!("cannot read {}: {e}", args.matrix.display()),
        )
    })?;
    let (matrix, header) = import_matrix_with_header(&bytes, format)?;

    if args.exact && !matrix.is_exact() {
        return Err(FrameError::Inexact.into());
    }
    let spec = if args.spectrum.given() {
        args.spectrum.resolve()?
    } else if let Some(lambdas) = header.spec {
        EigenvalueSpec::from_lambdas(lambdas)?
    } else {
        return Err(Failure::usage(
            "no spectrum in the file; pass --eigenvalues or --tight",
        ));
    };

    let (mut report, passed) = if matrix.is_exact() {
        let r = verify_with_limit(&matrix, &spec, args.spectrum.limit)?;
        (render_exact_report(&r), r.passed())
    } else {
        let r = verify_approximate(&matrix, &spec, FLOAT_TOLERANCE, args.spectrum.limit)?;
        (render_approximate_report(&r), r.passed())
    };
    report.push_str(&format!("passed={passed}\n"));
    if verbose {
        report.push('\n');
        report.push_str(&render_matrix(&matrix)?);
    }
    out.write_all(report.as_bytes()).map_err(write_failed)?;
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn render_exact_report(r: &VerificationReport) -> String {
    format!(
        "mode=exact\nunit_norm_ok={}\nrows_orthogonal_ok={}\nrow_sums={}\nspectrum_matches={}\n\
         sparsity={}\nsparsity_bound={}\noptimal={}\nblock_order={}\nmu={}\n",
        r.unit_norm_ok,
        r.rows_orthogonal_ok,
        join(&r.row_sums),
        r.spectrum_matches,
        r.sparsity,
        r.sparsity_bound,
        r.optimal,
        r.block_order,
        r.mu
    )
}

fn render_approximate_report(r: &ApproximateReport) -> String {
    format!(
        "mode=approximate\ntolerance={:e}\nunit_norm_ok={}\nrows_orthogonal_ok={}\nrow_sums={}\n\
         spectrum_matches={}\nsparsity={}\nsparsity_bound={}\noptimal={}\nblock_order={}\nmu={}\n",
        r.tolerance,
        r.unit_norm_ok,
        r.rows_orthogonal_ok,
        r.row_sums.iter().join(","),
        r.spectrum_matches,
        r.sparsity,
        r.sparsity_bound,
        r.optimal,
        r.block_order,
        r.mu
    )
}

fn render_trace(trace: &CursorTrace) -> String {
    let mut text = String::from("cursor trace (1-based):\n");
    for step in &trace.steps {
        let case = match step.case {
            StepCase::One => "one",
            StepCase::Block => "block",
            StepCase::FinalOne => "final-one",
        };
        text.push_str(&format!(
            "  ({}, {}) {:<9} lambda={}\n",
            step.row + 1,
            step.col + 1,
            case,
            step.lambda_before
        ));
    }
    text
}

fn render_entry(value: &SignedRoot) -> String {
    if value.is_zero() {
        return "0".into();
    }
    let square = value.square();
    let sign = if value.coefficient().is_negative() {
        "-"
    } else {
        ""
    };
    if square == Rational::one() {
        format!("{sign}1")
    } else {
        format!("{sign}sqrt({square})")
    }
}

fn render_matrix(m: &SynthesisMatrix) -> Result<String, Failure> {
    let cells: Vec<Vec<String>> = if m.is_exact() {
        (0..m.dim())
            .map(|i| {
                (0..m.frame_count())
                    .map(|j| m.exact(i, j).map(|v| render_entry(&v)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?
    } else {
        let dense = m.to_dense();
        dense
            .row_iter()
            .map(|row| row.iter().map(|v| format!("{v:.6}")).collect())
            .collect()
    };
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut text = format!("synthesis matrix ({} basis):\n", m.basis_label());
    for row in cells {
        let line = row.iter().map(|c| format!("{c:>width$}")).join(" ");
        text.push_str("  ");
        text.push_str(&line);
        text.push('\n');
    }
    Ok(text)
}

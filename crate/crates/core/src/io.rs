//! Reading and writing synthesis matrices.
//!
//! Three formats:
//!
//! * `exact-json`: every entry as `sign · √(num/den)` with the square in
//!   lowest terms, plus a rendered float. Indices are 1-based and entries
//!   are sorted by `(col, row)`. Import restores exact [`SignedRoot`]s.
//! * `matrix-market`: `%%MatrixMarket matrix coordinate real general`,
//!   1-based indices, 17 significant digits.
//! * `csv`: dense `n × N` grid, row-major, comma separated, no header.
//!
//! The float formats import as inexact matrices.

use std::fmt::Write as _;

use clap::ValueEnum;
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::FrameError;
use crate::numeric::{Rational, Sign, SignedRoot};
use crate::tetris::{SynthesisMatrix, STANDARD_BASIS};

/// Value of the `format` field of exact-json documents.
pub const EXACT_JSON_TAG: &str = "spectral-tetris/exact-json";
pub const EXACT_JSON_VERSION: u32 = 1;

const MATRIX_MARKET_BANNER: &str = "%%MatrixMarket matrix coordinate real general";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    ExactJson,
    MatrixMarket,
    Csv,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("inconsistent document: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IoError {
    fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

impl From<FrameError> for IoError {
    fn from(err: FrameError) -> Self {
        IoError::Inconsistent(err.to_string())
    }
}

/// Optional metadata carried by exact-json headers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Header {
    pub spec: Option<Vec<Rational>>,
    pub mu: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub format: String,
    pub version: u32,
    pub n: usize,
    #[serde(rename = "N")]
    pub count: usize,
    pub basis_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<usize>,
    pub sparsity: usize,
    pub entries: Vec<EntryRecord>,
}

/// One entry `sign · √(radicand_num / radicand_den)`; `row`/`col` are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryRecord {
    pub row: usize,
    pub col: usize,
    pub sign: i64,
    pub radicand_num: String,
    pub radicand_den: String,
    pub value: f64,
}

impl MatrixDocument {
    pub fn from_matrix(m: &SynthesisMatrix, header: &Header) -> Result<Self, FrameError> {
        let mut entries: Vec<EntryRecord> = m
            .exact_entries()?
            .iter()
            .map(|(&(row, col), value)| {
                let square = value.square();
                EntryRecord {
                    row: row + 1,
                    col: col + 1,
                    sign: i64::from(value.sign().as_i8()),
                    radicand_num: square.numer().to_string(),
                    radicand_den: square.denom().to_string(),
                    value: value.to_f64(),
                }
            })
            .collect();
        entries.sort_by_key(|e| (e.col, e.row));
        Ok(MatrixDocument {
            format: EXACT_JSON_TAG.to_string(),
            version: EXACT_JSON_VERSION,
            n: m.dim(),
            count: m.frame_count(),
            basis_label: m.basis_label().to_string(),
            spec: header.spec.clone(),
            mu: header.mu,
            sparsity: m.nnz(),
            entries,
        })
    }

    pub fn to_matrix(&self) -> Result<(SynthesisMatrix, Header), IoError> {
        if self.format != EXACT_JSON_TAG {
            return Err(IoError::Inconsistent(format!(
                "format tag {:?}, expected {EXACT_JSON_TAG:?}",
                self.format
            )));
        }
        if self.version != EXACT_JSON_VERSION {
            return Err(IoError::Inconsistent(format!(
                "unsupported version {}",
                self.version
            )));
        }
        if self.n == 0 || self.count == 0 {
            return Err(IoError::Inconsistent("n and N must be positive".into()));
        }
        if let Some(spec) = &self.spec {
            if spec.len() != self.n {
                return Err(IoError::Inconsistent(format!(
                    "spec lists {} eigenvalues for n = {}",
                    spec.len(),
                    self.n
                )));
            }
        }
        if self.sparsity != self.entries.len() {
            return Err(IoError::Inconsistent(format!(
                "sparsity {} but {} entries listed",
                self.sparsity,
                self.entries.len()
            )));
        }
        let mut values = Vec::with_capacity(self.entries.len());
        let mut seen = std::collections::BTreeSet::new();
        for (k, e) in self.entries.iter().enumerate() {
            let at = |msg: String| IoError::Inconsistent(format!("entry {}: {msg}", k + 1));
            if e.row == 0 || e.row > self.n || e.col == 0 || e.col > self.count {
                return Err(at(format!("position ({}, {}) out of range", e.row, e.col)));
            }
            if !seen.insert((e.row, e.col)) {
                return Err(at(format!("duplicate position ({}, {})", e.row, e.col)));
            }
            let sign = Sign::from_i64(e.sign).ok_or_else(|| at(format!("sign {}", e.sign)))?;
            let num: BigUint = e
                .radicand_num
                .parse()
                .map_err(|_| at(format!("radicand_num {:?}", e.radicand_num)))?;
            let den: BigUint = e
                .radicand_den
                .parse()
                .map_err(|_| at(format!("radicand_den {:?}", e.radicand_den)))?;
            if den.is_zero() {
                return Err(at("zero radicand_den".into()));
            }
            if num.is_zero() {
                return Err(at("zero entries are not stored".into()));
            }
            let square = Rational::new(BigInt::from(num), BigInt::from(den));
            let value = SignedRoot::of(sign, &square).map_err(|err| at(err.to_string()))?;
            values.push(((e.row - 1, e.col - 1), value));
        }
        let matrix = SynthesisMatrix::from_exact(self.n, self.count, values)?
            .with_basis_label(self.basis_label.clone());
        let header = Header {
            spec: self.spec.clone(),
            mu: self.mu,
        };
        Ok((matrix, header))
    }
}

pub fn export_matrix(m: &SynthesisMatrix, format: Format) -> Result<Vec<u8>, IoError> {
    export_matrix_with_header(m, format, &Header::default())
}

/// The header is only written by exact-json.
pub fn export_matrix_with_header(
    m: &SynthesisMatrix,
    format: Format,
    header: &Header,
) -> Result<Vec<u8>, IoError> {
    match format {
        Format::ExactJson => {
            let doc = MatrixDocument::from_matrix(m, header)?;
            let mut bytes = serde_json::to_vec_pretty(&doc).map_err(std::io::Error::from)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::MatrixMarket => Ok(render_matrix_market(m).into_bytes()),
        Format::Csv => Ok(render_csv(m).into_bytes()),
    }
}

pub fn import_matrix(bytes: &[u8], format: Format) -> Result<SynthesisMatrix, IoError> {
    import_matrix_with_header(bytes, format).map(|(m, _)| m)
}

pub fn import_matrix_with_header(
    bytes: &[u8],
    format: Format,
) -> Result<(SynthesisMatrix, Header), IoError> {
    match format {
        Format::ExactJson => {
            let doc: MatrixDocument = serde_json::from_slice(bytes)
                .map_err(|err| IoError::parse(err.line(), err.column(), err.to_string()))?;
            doc.to_matrix()
        }
        Format::MatrixMarket => Ok((parse_matrix_market(text(bytes)?)?, Header::default())),
        Format::Csv => Ok((parse_csv(text(bytes)?)?, Header::default())),
    }
}

fn text(bytes: &[u8]) -> Result<&str, IoError> {
    std::str::from_utf8(bytes).map_err(|err| {
        let upto = &bytes[..err.valid_up_to()];
        let line = upto.iter().filter(|b| **b == b'\n').count() + 1;
        let column = upto.iter().rev().take_while(|b| **b != b'\n').count() + 1;
        IoError::parse(line, column, "invalid UTF-8")
    })
}

/// 17 significant digits.
fn render_float(value: f64) -> String {
    format!("{value:.16e}")
}

fn render_matrix_market(m: &SynthesisMatrix) -> String {
    let mut entries: Vec<((usize, usize), f64)> = m.float_entries().into_iter().collect();
    entries.sort_by_key(|((row, col), _)| (*col, *row));
    let mut out = String::new();
    out.push_str(MATRIX_MARKET_BANNER);
    out.push('\n');
    let _ = writeln!(out, "% basis: {}", m.basis_label());
    let _ = writeln!(out, "{} {} {}", m.dim(), m.frame_count(), entries.len());
    for ((row, col), value) in entries {
        let _ = writeln!(out, "{} {} {}", row + 1, col + 1, render_float(value));
    }
    out
}

fn render_csv(m: &SynthesisMatrix) -> String {
    let dense = m.to_dense();
    let mut out = String::new();
    for row in dense.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Splits a line into whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_matrix_market(input: &str) -> Result<SynthesisMatrix, IoError> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines
        .next()
        .ok_or_else(|| IoError::parse(1, 1, "empty input"))?;
    let banner_words: Vec<String> = banner.split_whitespace().map(str::to_lowercase).collect();
    let expected: Vec<String> = MATRIX_MARKET_BANNER
        .split_whitespace()
        .map(str::to_lowercase)
        .collect();
    if banner_words != expected {
        return Err(IoError::parse(
            1,
            1,
            format!("expected banner {MATRIX_MARKET_BANNER:?}"),
        ));
    }

    let mut basis_label = STANDARD_BASIS.to_string();
    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    let mut last_line = 1;
    for (line_no, line) in lines {
        last_line = line_no;
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('%') {
            if let Some(label) = comment.trim().strip_prefix("basis:") {
                basis_label = label.trim().to_string();
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let toks = tokens(line);
        if toks.len() != 3 {
            let column = toks.get(3).map_or(line.len() + 1, |t| t.0);
            return Err(IoError::parse(line_no, column, "expected three fields"));
        }
        match size {
            None => {
                let mut dims = [0usize; 3];
                for (slot, (column, tok)) in dims.iter_mut().zip(&toks) {
                    *slot = tok.parse().map_err(|_| {
                        IoError::parse(line_no, *column, format!("bad size {tok:?}"))
                    })?;
                }
                size = Some((dims[0], dims[1], dims[2]));
            }
            Some((rows, cols, _)) => {
                let index = |(column, tok): (usize, &str), bound: usize| {
                    tok.parse::<usize>()
                        .ok()
                        .filter(|i| (1..=bound).contains(i))
                        .ok_or_else(|| {
                            IoError::parse(line_no, column, format!("bad index {tok:?}"))
                        })
                };
                let row = index(toks[0], rows)?;
                let col = index(toks[1], cols)?;
                let (column, tok) = toks[2];
                let value: f64 = tok
                    .parse()
                    .map_err(|_| IoError::parse(line_no, column, format!("bad value {tok:?}")))?;
                entries.push(((row - 1, col - 1), value));
            }
        }
    }
    let (rows, cols, nnz) =
        size.ok_or_else(|| IoError::parse(last_line + 1, 1, "missing size line"))?;
    if entries.len() != nnz {
        return Err(IoError::parse(
            last_line + 1,
            1,
            format!("expected {nnz} entries, found {}", entries.len()),
        ));
    }
    let mut seen = std::collections::BTreeSet::new();
    if let Some(dup) = entries.iter().find(|(pos, _)| !seen.insert(*pos)) {
        return Err(IoError::Inconsistent(format!(
            "duplicate entry ({}, {})",
            dup.0 .0 + 1,
            dup.0 .1 + 1
        )));
    }
    Ok(SynthesisMatrix::from_inexact(rows, cols, entries)?.with_basis_label(basis_label))
}

fn parse_csv(input: &str) -> Result<SynthesisMatrix, IoError> {
    let mut entries = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut column = 1;
        let mut cells = 0;
        for (j, cell) in line.split(',').enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| {
                IoError::parse(line_no, column, format!("bad value {:?}", cell.trim()))
            })?;
            if value != 0.0 {
                entries.push(((rows, j), value));
            }
            column += cell.len() + 1;
            cells += 1;
        }
        match width {
            None => width = Some(cells),
            Some(w) if w != cells => {
                return Err(IoError::parse(
                    line_no,
                    1,
                    format!("row has {cells} values, expected {w}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = width.ok_or_else(|| IoError::parse(1, 1, "empty input"))?;
    Ok(SynthesisMatrix::from_inexact(rows, cols, entries)?)
}

//! File formats: sparse network text, JSON for labels / params / reports,
//! CSV for experiment results.
//!
//! Network text format: line 1 is the node count `n`; every following line
//! is `i j c` with 0-based node indices, `i <= j`, and count `c`. Diagonal
//! lines carry the doubled self-loop value and must be even. Omitted pairs
//! are zero. Blank lines and `#` comments are ignored. A dense alternative
//! is accepted on input — rows of comma-separated integers, detected by the
//! comma in the first data line — but sparse is canonical on output.
//!
//! Labels are serialized 0-based. JSON floats use shortest round-trip
//! formatting, so write-then-read is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use dcsbm::selection::SelectionReport;
use dcsbm::stats::SuffStats;
use dcsbm::{Labels, ModelParams, Network};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] dcsbm::Error),
}

pub type IoResult<T> = Result<T, IoError>;

fn read_file(path: &Path) -> IoResult<String> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, content: &str) -> IoResult<()> {
    fs::write(path, content).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

// ---------------------------------------------------------------------------
// Network text format

/// Data lines with original 1-based line numbers; blanks and comments
/// dropped.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(idx, line)| (idx + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
}

pub fn parse_network(text: &str) -> IoResult<Network> {
    let first = data_lines(text).next();
    match first {
        Some((_, line)) if line.contains(',') => parse_network_dense(text),
        Some(_) => parse_network_sparse(text),
        None => Err(IoError::Parse {
            line: 1,
            message: "empty network file".into(),
        }),
    }
}

fn parse_network_sparse(text: &str) -> IoResult<Network> {
    let mut lines = data_lines(text);
    let (header_line, header) = lines.next().expect("caller checked nonempty");
    let n: usize = header.parse().map_err(|_| IoError::Parse {
        line: header_line,
        message: format!("expected node count, got {header:?}"),
    })?;
    if n == 0 {
        return Err(IoError::Parse {
            line: header_line,
            message: "node count must be at least 1".into(),
        });
    }
    let mut counts = vec![0u64; n * n];
    let mut seen = vec![false; n * n];
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(IoError::Parse {
                line: line_no,
                message: format!("expected 'i j count', got {line:?}"),
            });
        }
        let parse = |s: &str, what: &str| -> IoResult<u64> {
            s.parse().map_err(|_| IoError::Parse {
                line: line_no,
                message: format!("invalid {what} {s:?}"),
            })
        };
        let i = parse(fields[0], "node index")? as usize;
        let j = parse(fields[1], "node index")? as usize;
        let c = parse(fields[2], "count")?;
        if i >= n || j >= n {
            return Err(IoError::Parse {
                line: line_no,
                message: format!("node index out of range for n = {n}"),
            });
        }
        if i > j {
            return Err(IoError::Parse {
                line: line_no,
                message: format!("expected i <= j, got {i} > {j}"),
            });
        }
        if i == j && c % 2 != 0 {
            return Err(IoError::Parse {
                line: line_no,
                message: format!("diagonal entry {c} is odd; it stores twice the self-loop count"),
            });
        }
        if seen[i * n + j] {
            return Err(IoError::Parse {
                line: line_no,
                message: format!("duplicate entry for pair ({i}, {j})"),
            });
        }
        seen[i * n + j] = true;
        counts[i * n + j] = c;
        counts[j * n + i] = c;
    }
    Ok(Network::new(n, counts)?)
}

fn parse_network_dense(text: &str) -> IoResult<Network> {
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let mut row_lines: Vec<usize> = Vec::new();
    for (line_no, line) in data_lines(text) {
        let mut row = Vec::new();
        for field in line.split(',') {
            let field = field.trim();
            row.push(field.parse().map_err(|_| IoError::Parse {
                line: line_no,
                message: format!("invalid count {field:?}"),
            })?);
        }
        rows.push(row);
        row_lines.push(line_no);
    }
    let n = rows.len();
    for (idx, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(IoError::Parse {
                line: row_lines[idx],
                message: format!("row has {} entries, expected {n}", row.len()),
            });
        }
    }
    Network::from_rows(&rows).map_err(|e| match e {
        dcsbm::Error::NotSymmetric { i, j } => IoError::Parse {
            line: row_lines[i],
            message: format!("entry ({i}, {j}) is not symmetric"),
        },
        dcsbm::Error::OddDiagonal { i, value } => IoError::Parse {
            line: row_lines[i],
            message: format!("diagonal entry {value} is odd; it stores twice the self-loop count"),
        },
        other => IoError::Model(other),
    })
}

pub fn format_network(x: &Network) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", x.n());
    for (i, j, c) in x.nonzero_upper() {
        let _ = writeln!(out, "{i} {j} {c}");
    }
    out
}

pub fn read_network(path: &Path) -> IoResult<Network> {
    parse_network(&read_file(path)?)
}

pub fn write_network(path: &Path, x: &Network) -> IoResult<()> {
    write_file(path, &format_network(x))
}

// ---------------------------------------------------------------------------
// Labels JSON

#[derive(Serialize, Deserialize)]
struct LabelsFile {
    k: usize,
    z: Vec<usize>,
}

pub fn format_labels(labels: &Labels) -> String {
    let file = LabelsFile {
        k: labels.k(),
        z: labels.as_slice().to_vec(),
    };
    serde_json::to_string_pretty(&file).expect("labels serialize") + "\n"
}

pub fn parse_labels(text: &str) -> IoResult<Labels> {
    let file: LabelsFile = serde_json::from_str(text)?;
    Ok(Labels::new(file.z, file.k)?)
}

pub fn read_labels(path: &Path) -> IoResult<Labels> {
    parse_labels(&read_file(path)?)
}

pub fn write_labels(path: &Path, labels: &Labels) -> IoResult<()> {
    write_file(path, &format_labels(labels))
}

// ---------------------------------------------------------------------------
// Params JSON

#[derive(Serialize, Deserialize)]
struct ParamsFile {
    pi: Vec<f64>,
    lambda_tilde: Vec<Vec<f64>>,
    rho: f64,
    weights: Vec<f64>,
}

pub fn format_params(params: &ModelParams) -> String {
    let k = params.k();
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| params.lambda_tilde(a, b)).collect())
        .collect();
    let file = ParamsFile {
        pi: params.pi().to_vec(),
        lambda_tilde: rows,
        rho: params.rho(),
        weights: params.weights().to_vec(),
    };
    serde_json::to_string_pretty(&file).expect("params serialize") + "\n"
}

pub fn parse_params(text: &str) -> IoResult<ModelParams> {
    let file: ParamsFile = serde_json::from_str(text)?;
    Ok(ModelParams::new(
        file.pi,
        &file.lambda_tilde,
        file.rho,
        file.weights,
    )?)
}

pub fn read_params(path: &Path) -> IoResult<ModelParams> {
    parse_params(&read_file(path)?)
}

/// Params as a JSON value, for embedding in composite outputs.
pub fn params_value(params: &ModelParams) -> serde_json::Value {
    let k = params.k();
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| params.lambda_tilde(a, b)).collect())
        .collect();
    serde_json::json!({
        "pi": params.pi(),
        "lambda_tilde": rows,
        "rho": params.rho(),
        "weights": params.weights(),
    })
}

pub fn write_params(path: &Path, params: &ModelParams) -> IoResult<()> {
    write_file(path, &format_params(params))
}

/// Fixed generator inputs: `pi` and `lambda_tilde` only (weights are chosen
/// by the generator's weight mode, labels are always drawn from `pi`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorModelFile {
    pub pi: Vec<f64>,
    pub lambda_tilde: Vec<Vec<f64>>,
}

pub fn read_generator_model(path: &Path) -> IoResult<GeneratorModelFile> {
    Ok(serde_json::from_str(&read_file(path)?)?)
}

// ---------------------------------------------------------------------------
// Reports and stats JSON

pub fn format_report(report: &SelectionReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialize") + "\n"
}

pub fn parse_report(text: &str) -> IoResult<SelectionReport> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_report(path: &Path, report: &SelectionReport) -> IoResult<()> {
    write_file(path, &format_report(report))
}

pub fn read_report(path: &Path) -> IoResult<SelectionReport> {
    parse_report(&read_file(path)?)
}

fn matrix_rows_u64(flat: &[u64], k: usize) -> Vec<Vec<u64>> {
    (0..k).map(|a| flat[a * k..(a + 1) * k].to_vec()).collect()
}

fn matrix_rows_f64(flat: &[f64], k: usize) -> Vec<Vec<f64>> {
    (0..k).map(|a| flat[a * k..(a + 1) * k].to_vec()).collect()
}

/// Counters plus the bounded-entry flag, as printed by `dcsbm stats`.
pub fn stats_json(x: &Network, stats: &SuffStats) -> serde_json::Value {
    serde_json::json!({
        "n": stats.n,
        "k": stats.k,
        "in_omega": x.in_omega(),
        "total_count": x.total_count(),
        "sizes": stats.sizes,
        "pair_counts": matrix_rows_f64(&stats.pair_counts, stats.k),
        "block_edges": matrix_rows_u64(&stats.block_edges, stats.k),
        "sym_block_edges": matrix_rows_u64(&stats.sym_block_edges, stats.k),
        "degrees": stats.degrees,
        "block_degrees": stats.block_degrees,
    })
}

/// Write `content` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, content: &str) -> IoResult<()> {
    match path {
        Some(p) => write_file(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

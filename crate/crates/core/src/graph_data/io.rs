//! On-disk formats: sparse edge-count JSON, dense count-matrix CSV,
//! covariate CSV, and whitespace-delimited contact logs.

use std::collections::HashMap;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::ingest::ContactRecord;
use super::{CovariateDesign, GraphObservations};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct EdgeCountFile {
    n: usize,
    directed: bool,
    counts: Vec<EdgeCountEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeCountEntry {
    i: usize,
    j: usize,
    y: u64,
    trials: u64,
}

/// Reads the sparse JSON form `{"n", "directed", "counts": [{i, j, y, trials}]}`.
///
/// Node indices are 0-based; pairs absent from `counts` have zero trials.
/// Undirected input may list either or both orientations of a pair, but
/// values given for both must agree.
pub fn parse_edge_counts_json(text: &str) -> Result<GraphObservations> {
    let file: EdgeCountFile = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Syntax | serde_json::error::Category::Eof => Error::Parse {
            line: e.line(),
            message: e.to_string(),
        },
        _ => Error::Schema { message: e.to_string() },
    })?;

    let n = file.n;
    let mut seen: HashMap<(usize, usize), (u64, u64)> = HashMap::new();
    for entry in &file.counts {
        if entry.i >= n || entry.j >= n {
            return Err(Error::Schema {
                message: format!(
                    "count entry ({}, {}) is out of range for n={n}",
                    entry.i, entry.j
                ),
            });
        }
        if seen.insert((entry.i, entry.j), (entry.y, entry.trials)).is_some() {
            return Err(Error::Schema {
                message: format!("duplicate count entry for pair ({}, {})", entry.i, entry.j),
            });
        }
    }

    let mut y = Array2::<u64>::zeros((n.max(1), n.max(1)));
    let mut trials = Array2::<u64>::zeros((n.max(1), n.max(1)));
    if file.directed {
        for (&(i, j), &(ys, ts)) in &seen {
            y[(i, j)] = ys;
            trials[(i, j)] = ts;
        }
    } else {
        for (&(i, j), &(ys, ts)) in &seen {
            if i == j {
                // Leave diagonal handling to validation below.
                y[(i, j)] = ys;
                trials[(i, j)] = ts;
                continue;
            }
            if let Some(&(my, mt)) = seen.get(&(j, i)) {
                if (my, mt) != (ys, ts) {
                    let (a, b) = (i.min(j), i.max(j));
                    return Err(Error::AsymmetricUndirected {
                        i: a,
                        j: b,
                        field: if my != ys { "y" } else { "trials" },
                    });
                }
            }
            y[(i, j)] = ys;
            y[(j, i)] = ys;
            trials[(i, j)] = ts;
            trials[(j, i)] = ts;
        }
    }
    GraphObservations::new(file.directed, y, trials)
}

/// Serializes to the sparse JSON form read by [`parse_edge_counts_json`].
///
/// Pairs with zero trials and zero successes are omitted; undirected graphs
/// emit only the upper triangle. Entries are sorted, so equal graphs always
/// produce identical text.
pub fn write_edge_counts_json(graph: &GraphObservations) -> String {
    let n = graph.n();
    let mut counts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || (!graph.directed() && j < i) {
                continue;
            }
            let (ys, ts) = (graph.y()[(i, j)], graph.trials()[(i, j)]);
            if ys == 0 && ts == 0 {
                continue;
            }
            counts.push(EdgeCountEntry { i, j, y: ys, trials: ts });
        }
    }
    let file = EdgeCountFile { n, directed: graph.directed(), counts };
    let mut text = serde_json::to_string_pretty(&file).expect("edge counts always serialize");
    text.push('\n');
    text
}

/// Reads the dense CSV form:
///
/// ```text
/// n,directed
/// 3,true
/// y
/// <n rows of n comma-separated successes>
/// trials
/// <n rows of n comma-separated trial counts>
/// ```
pub fn parse_dense_csv(text: &str) -> Result<GraphObservations> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(idx, l)| (idx + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut cursor = lines.into_iter();

    let (line_no, header) = cursor.next().ok_or(Error::Schema {
        message: "missing header row `n,directed`".to_string(),
    })?;
    if header != "n,directed" {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected header `n,directed`, found `{header}`"),
        });
    }
    let (line_no, values) = cursor.next().ok_or(Error::Schema {
        message: "missing value row for `n,directed`".to_string(),
    })?;
    let mut parts = values.split(',');
    let n: usize = parts
        .next()
        .unwrap_or("")
        .trim()
        .parse()
        .map_err(|_| Error::Parse { line: line_no, message: "invalid node count".to_string() })?;
    let directed: bool = parts
        .next()
        .unwrap_or("")
        .trim()
        .parse()
        .map_err(|_| Error::Parse {
            line: line_no,
            message: "invalid directed flag (expected true or false)".to_string(),
        })?;

    let mut read_matrix = |name: &str| -> Result<Array2<u64>> {
        match cursor.next() {
            Some((_, marker)) if marker == name => {}
            Some((line, marker)) => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected section marker `{name}`, found `{marker}`"),
                })
            }
            None => {
                return Err(Error::Schema { message: format!("missing `{name}` section") });
            }
        }
        let mut m = Array2::<u64>::zeros((n, n));
        for i in 0..n {
            let (line, row) = cursor.next().ok_or(Error::Schema {
                message: format!("`{name}` section has {i} rows, expected {n}"),
            })?;
            let cells: Vec<&str> = row.split(',').map(str::trim).collect();
            if cells.len() != n {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {n} columns, found {}", cells.len()),
                });
            }
            for (j, cell) in cells.iter().enumerate() {
                m[(i, j)] = cell.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid count `{cell}` in column {j}"),
                })?;
            }
        }
        Ok(m)
    };

    let y = read_matrix("y")?;
    let trials = read_matrix("trials")?;
    GraphObservations::new(directed, y, trials)
}

/// Serializes to the dense CSV form read by [`parse_dense_csv`].
pub fn write_dense_csv(graph: &GraphObservations) -> String {
    let n = graph.n();
    let mut out = String::new();
    out.push_str("n,directed\n");
    out.push_str(&format!("{},{}\n", n, graph.directed()));
    for (name, m) in [("y", graph.y()), ("trials", graph.trials())] {
        out.push_str(name);
        out.push('\n');
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| m[(i, j)].to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

/// Reads an `L x K` covariate matrix from CSV, one graph per row.
pub fn parse_covariates_csv(text: &str, has_header: bool) -> Result<CovariateDesign> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || (has_header && idx == 0) {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if let Some(w) = width {
            if cells.len() != w {
                return Err(Error::Schema {
                    message: format!(
                        "ragged covariate rows: row {} has {} columns, expected {w}",
                        idx + 1,
                        cells.len()
                    ),
                });
            }
        } else {
            width = Some(cells.len());
        }
        let mut row = Vec::with_capacity(cells.len());
        for cell in cells {
            row.push(cell.parse::<f64>().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("invalid covariate value `{cell}`"),
            })?);
        }
        rows.push(row);
    }
    let l = rows.len();
    let k = width.unwrap_or(0);
    let mut x = Array2::<f64>::zeros((l, k));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            x[(i, j)] = *v;
        }
    }
    CovariateDesign::new(x)
}

/// Reads a contact log: one record per line, whitespace- or tab-delimited,
/// with the first three columns holding time (integer seconds) and the two
/// node ids. Extra columns are ignored; blank lines are skipped.
pub fn parse_contacts(text: &str) -> Result<Vec<ContactRecord>> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (t, a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(t), Some(a), Some(b)) => (t, a, b),
            _ => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "expected at least three columns: time, node, node".to_string(),
                })
            }
        };
        let t: i64 = t.parse().map_err(|_| Error::Parse {
            line: idx + 1,
            message: format!("invalid timestamp `{t}`"),
        })?;
        if a == b {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("contact joins node `{a}` with itself"),
            });
        }
        records.push(ContactRecord { t, a: a.to_string(), b: b.to_string() });
    }
    Ok(records)
}

pub fn read_edge_counts_file(path: impl AsRef<Path>) -> Result<GraphObservations> {
    parse_edge_counts_json(&std::fs::read_to_string(path)?)
}

pub fn read_dense_csv_file(path: impl AsRef<Path>) -> Result<GraphObservations> {
    parse_dense_csv(&std::fs::read_to_string(path)?)
}

pub fn read_covariates_file(path: impl AsRef<Path>, has_header: bool) -> Result<CovariateDesign> {
    parse_covariates_csv(&std::fs::read_to_string(path)?, has_header)
}

pub fn read_contacts_file(path: impl AsRef<Path>) -> Result<Vec<ContactRecord>> {
    parse_contacts(&std::fs::read_to_string(path)?)
}

//! MacKay alist and MatrixMarket (coordinate pattern) readers and writers.

use std::fmt::Write as _;

use super::BitMatrix;
use crate::error::{Error, Result};

fn fmt_err(m: impl Into<String>) -> Error {
    Error::Format(m.into())
}

/// Writes `m` in alist form: `ncols nrows`, maximum column/row weights,
/// the weight lists, then zero-padded 1-based index lists per column and per row.
pub fn write_alist(m: &BitMatrix) -> String {
    let col_w = m.col_weights();
    let rows: Vec<Vec<usize>> = m.supports();
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); m.cols()];
    for (r, s) in rows.iter().enumerate() {
        for &c in s {
            cols[c].push(r);
        }
    }
    let max_c = col_w.iter().copied().max().unwrap_or(0);
    let max_r = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    writeln!(out, "{} {}", m.cols(), m.rows()).unwrap();
    writeln!(out, "{max_c} {max_r}").unwrap();
    writeln!(out, "{}", join(col_w.iter().copied())).unwrap();
    writeln!(out, "{}", join(rows.iter().map(Vec::len))).unwrap();
    for c in &cols {
        writeln!(out, "{}", padded(c, max_c)).unwrap();
    }
    for r in &rows {
        writeln!(out, "{}", padded(r, max_r)).unwrap();
    }
    out
}

fn join(it: impl Iterator<Item = usize>) -> String {
    it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn padded(idx: &[usize], width: usize) -> String {
    join(idx.iter().map(|&i| i + 1).chain(std::iter::repeat_n(0, width - idx.len())))
}

/// Reads an alist matrix. Zero padding is optional; the column and row lists
/// must describe the same matrix.
pub fn read_alist(text: &str) -> Result<BitMatrix> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.starts_with('#'));
    let mut nums = |what: &str| -> Result<Vec<usize>> {
        let line = lines.next().ok_or_else(|| fmt_err(format!("alist: missing {what}")))?;
        line.split_whitespace().map(|t| t.parse().map_err(|_| fmt_err(format!("alist: bad number `{t}` in {what}")))).collect()
    };
    let head = nums("dimensions")?;
    let [ncols, nrows] = head[..] else { return Err(fmt_err("alist: first line must be `ncols nrows`")) };
    let maxw = nums("maximum weights")?;
    if maxw.len() != 2 {
        return Err(fmt_err("alist: second line must hold two numbers"));
    }
    let col_w = nums("column weights")?;
    let row_w = nums("row weights")?;
    if col_w.len() != ncols || row_w.len() != nrows {
        return Err(fmt_err("alist: weight list lengths do not match dimensions"));
    }
    let mut m = BitMatrix::zeros(nrows, ncols);
    for (c, &w) in col_w.iter().enumerate() {
        let idx: Vec<usize> = if ncols > 0 { nums("column list")? } else { Vec::new() };
        let nz: Vec<usize> = idx.into_iter().filter(|&i| i != 0).collect();
        if nz.len() != w {
            return Err(fmt_err(format!("alist: column {} lists {} entries, weight says {w}", c + 1, nz.len())));
        }
        for r in nz {
            if r > nrows {
                return Err(fmt_err(format!("alist: row index {r} out of range")));
            }
            m.set(r - 1, c, true);
        }
    }
    for (r, &w) in row_w.iter().enumerate() {
        let idx = nums("row list")?;
        let mut nz: Vec<usize> = idx.into_iter().filter(|&i| i != 0).map(|i| i - 1).collect();
        nz.sort_unstable();
        if nz.len() != w || nz != m.row_support(r) {
            return Err(fmt_err(format!("alist: row {} disagrees with the column lists", r + 1)));
        }
    }
    Ok(m)
}

/// MatrixMarket coordinate pattern; labels travel in `%` comment lines.
pub fn write_mtx(m: &BitMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate pattern general\n");
    if let Some(l) = m.row_labels() {
        writeln!(out, "%row_labels {}", serde_json::to_string(l).unwrap()).unwrap();
    }
    if let Some(l) = m.col_labels() {
        writeln!(out, "%col_labels {}", serde_json::to_string(l).unwrap()).unwrap();
    }
    writeln!(out, "{} {} {}", m.rows(), m.cols(), m.count_ones()).unwrap();
    for r in 0..m.rows() {
        for c in m.row_support(r) {
            writeln!(out, "{} {}", r + 1, c + 1).unwrap();
        }
    }
    out
}

pub fn read_mtx(text: &str) -> Result<BitMatrix> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| fmt_err("mtx: empty input"))?;
    let h = header.to_ascii_lowercase();
    if !h.starts_with("%%matrixmarket") || !h.contains("coordinate") || !h.contains("pattern") {
        return Err(fmt_err("mtx: expected a coordinate pattern header"));
    }
    let mut row_labels = None;
    let mut col_labels = None;
    let mut size: Option<(usize, usize, usize)> = None;
    let mut m: Option<BitMatrix> = None;
    let mut seen = 0usize;
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('%') {
            if let Some(j) = rest.strip_prefix("row_labels ") {
                row_labels = Some(serde_json::from_str::<Vec<String>>(j)?);
            } else if let Some(j) = rest.strip_prefix("col_labels ") {
                col_labels = Some(serde_json::from_str::<Vec<String>>(j)?);
            }
            continue;
        }
        let t: Vec<usize> = line
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| fmt_err(format!("mtx: bad number `{x}`"))))
            .collect::<Result<_>>()?;
        match (&size, &mut m) {
            (None, _) => {
                let [r, c, nnz] = t[..] else { return Err(fmt_err("mtx: size line must be `rows cols nnz`")) };
                size = Some((r, c, nnz));
                m = Some(BitMatrix::zeros(r, c));
            }
            (Some((nr, nc, _)), Some(mat)) => {
                let [r, c] = t[..] else { return Err(fmt_err("mtx: entry lines must be `row col`")) };
                if r == 0 || c == 0 || r > *nr || c > *nc {
                    return Err(fmt_err(format!("mtx: entry ({r},{c}) out of range")));
                }
                if mat.get(r - 1, c - 1) {
                    return Err(fmt_err(format!("mtx: duplicate entry ({r},{c})")));
                }
                mat.set(r - 1, c - 1, true);
                seen += 1;
            }
            _ => unreachable!(),
        }
    }
    let (_, _, nnz) = size.ok_or_else(|| fmt_err("mtx: missing size line"))?;
    if seen != nnz {
        return Err(fmt_err(format!("mtx: expected {nnz} entries, found {seen}")));
    }
    let mut m = m.unwrap();
    if row_labels.as_ref().is_some_and(|l: &Vec<String>| l.len() != m.rows())
        || col_labels.as_ref().is_some_and(|l: &Vec<String>| l.len() != m.cols())
    {
        return Err(fmt_err("mtx: label count mismatch"));
    }
    m.set_row_labels(row_labels);
    m.set_col_labels(col_labels);
    Ok(m)
}

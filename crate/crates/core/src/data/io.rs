//! Dense CSV and sparse `label idx:val` file formats.
//!
//! Dense CSV: a header row, then one comma-separated row per point. When the
//! last header field is `label`, the last column holds a non-negative integer
//! label.
//!
//! Sparse: one point per line, `label idx:val idx:val ...`, indices 0-based and
//! strictly increasing; the leading label is omitted for unlabeled files.
//! Blank lines are skipped.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Rows read from a file, with labels when the file carries them.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDomain {
    pub features: Matrix,
    pub labels: Option<Vec<usize>>,
}

fn parse_label(line: usize, tok: &str) -> Result<usize> {
    tok.trim().parse::<usize>().map_err(|_| Error::Parse {
        line,
        message: format!("label `{tok}` is not a non-negative integer"),
    })
}

fn parse_value(line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{tok}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Input(format!("line {line}: non-finite feature `{tok}`")));
    }
    Ok(v)
}

pub fn read_dense_csv(text: &str) -> Result<RawDomain> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let labeled = headers.iter().last() == Some("label");
    let dim = headers.len() - usize::from(labeled);
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for tok in record.iter().take(dim) {
            data.push(parse_value(line, tok)?);
        }
        if labeled {
            labels.push(parse_label(line, &record[dim])?);
        }
    }
    let rows = data.len() / dim.max(1);
    Ok(RawDomain {
        features: Matrix::from_vec(rows, dim, data)?,
        labels: labeled.then_some(labels),
    })
}

pub fn read_sparse_sv(text: &str, dim: usize) -> Result<RawDomain> {
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut labeled: Option<bool> = None;
    let mut rows = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut tokens = raw.split_whitespace().peekable();
        let has_label = tokens.peek().is_some_and(|t| !t.contains(':'));
        match labeled {
            None => labeled = Some(has_label),
            Some(prev) if prev != has_label => {
                return Err(Error::Parse {
                    line,
                    message: "mixes labeled and unlabeled lines".into(),
                })
            }
            _ => {}
        }
        if has_label {
            labels.push(parse_label(line, tokens.next().unwrap())?);
        }
        let mut row = vec![0.0; dim];
        let mut last: Option<usize> = None;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected idx:val, found `{tok}`"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad index `{idx}`"),
            })?;
            if last.is_some_and(|l| idx <= l) {
                return Err(Error::Parse {
                    line,
                    message: format!("index {idx} is not strictly increasing"),
                });
            }
            if idx >= dim {
                return Err(Error::Input(format!(
                    "line {line}: index {idx} out of range for dimension {dim}"
                )));
            }
            row[idx] = parse_value(line, val)?;
            last = Some(idx);
        }
        data.extend(row);
        rows += 1;
    }
    Ok(RawDomain {
        features: Matrix::from_vec(rows, dim, data)?,
        labels: labeled.unwrap_or(false).then_some(labels),
    })
}

pub fn write_dense_csv(features: &Matrix, labels: Option<&[usize]>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..features.cols()).map(|j| format!("x{j}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header).expect("in-memory write");
    for (r, row) in features.iter_rows().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        if let Some(l) = labels {
            fields.push(l[r].to_string());
        }
        w.write_record(&fields).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 csv")
}

/// Zero entries are omitted.
pub fn write_sparse_sv(features: &Matrix, labels: Option<&[usize]>) -> String {
    let mut out = String::new();
    for (r, row) in features.iter_rows().enumerate() {
        let mut parts: Vec<String> = Vec::new();
        if let Some(l) = labels {
            parts.push(l[r].to_string());
        }
        for (j, v) in row.iter().enumerate() {
            if *v != 0.0 {
                parts.push(format!("{j}:{v:e}"));
            }
        }
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    out
}

pub fn load_dense_csv(path: &Path) -> Result<RawDomain> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_dense_csv(&text)
}

pub fn load_sparse_sv(path: &Path, dim: usize) -> Result<RawDomain> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_sparse_sv(&text, dim)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}

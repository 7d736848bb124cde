//! Point-set text files: one exponent per line as `a,b` (or `a` for m = 1),
//! `#` starts a comment, blank lines are ignored.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PointFileError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no points given")]
    Empty,
}

/// Parses `a,b,...` into integer coordinates.
pub fn parse_point(text: &str) -> Result<Vec<i64>, String> {
    text.split(',')
        .map(|c| {
            let c = c.trim();
            c.parse::<i64>().map_err(|_| format!("bad coordinate {c:?}"))
        })
        .collect()
}

pub fn parse_points(text: &str) -> Result<Vec<Vec<i64>>, PointFileError> {
    let mut points = Vec::new();
    let mut dim = None;
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let line = i + 1;
        let p = parse_point(body).map_err(|msg| PointFileError::Parse { line, msg })?;
        match dim {
            None => dim = Some(p.len()),
            Some(d) if d != p.len() => {
                return Err(PointFileError::Parse {
                    line,
                    msg: format!("expected {d} coordinates, got {}", p.len()),
                })
            }
            _ => {}
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(PointFileError::Empty);
    }
    Ok(points)
}

pub fn read_points(path: &Path) -> Result<Vec<Vec<i64>>, PointFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| PointFileError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_points(&text)
}

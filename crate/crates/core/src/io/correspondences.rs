//! Plain-text correspondence tables.
//!
//! One correspondence per line: `px py pz qx qy qz`, whitespace separated.
//! `#` starts a comment that runs to the end of the line; blank lines are
//! skipped. Line numbers in errors are 1-based.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::geometry::{CorrespondenceSet, Point3};

#[derive(Debug, Error)]
pub enum CorrespondenceFileError {
    #[error("line {line}: expected 6 values, found {found}")]
    WrongFieldCount { line: usize, found: usize },
    #[error("line {line}: '{token}' is not a number")]
    InvalidNumber { line: usize, token: String },
    #[error("line {line}: non-finite value")]
    NonFinite { line: usize },
    #[error("no correspondences found")]
    Empty,
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub fn parse_correspondences(text: &str) -> Result<CorrespondenceSet, CorrespondenceFileError> {
    let mut source = Vec::new();
    let mut target = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 6 {
            return Err(CorrespondenceFileError::WrongFieldCount {
                line,
                found: tokens.len(),
            });
        }
        let mut v = [0.0f64; 6];
        for (slot, tok) in v.iter_mut().zip(&tokens) {
            *slot = tok.parse().map_err(|_| CorrespondenceFileError::InvalidNumber {
                line,
                token: tok.to_string(),
            })?;
            if !slot.is_finite() {
                return Err(CorrespondenceFileError::NonFinite { line });
            }
        }
        source.push(Point3::new(v[0], v[1], v[2]));
        target.push(Point3::new(v[3], v[4], v[5]));
    }
    if source.is_empty() {
        return Err(CorrespondenceFileError::Empty);
    }
    Ok(CorrespondenceSet::new(source, target).expect("rows are paired and finite"))
}

/// Shortest round-trip decimal for every coordinate.
pub fn format_correspondences(corr: &CorrespondenceSet) -> String {
    let mut out = String::from("# px py pz qx qy qz\n");
    for (p, q) in corr.source().iter().zip(corr.target()) {
        let _ = writeln!(out, "{} {} {} {} {} {}", p.x, p.y, p.z, q.x, q.y, q.z);
    }
    out
}

pub fn read_correspondence_file(path: &Path) -> Result<CorrespondenceSet, CorrespondenceFileError> {
    let text = fs::read_to_string(path).map_err(|source| CorrespondenceFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_correspondences(&text)
}

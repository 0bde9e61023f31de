//! Text constraint files: one `ML <i> <j>` or `CL <i> <j>` per line,
//! 0-based indices, `#` comments and blank lines ignored.

use super::IoError;
use crate::model::{ConstraintSet, ValidationError};
use std::path::Path;

pub fn parse_constraints(path: &Path, n: usize) -> Result<ConstraintSet, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_text(&text, n, &path.display().to_string())
}

fn parse_text(text: &str, n: usize, path: &str) -> Result<ConstraintSet, IoError> {
    let mut ml = Vec::new();
    let mut cl = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let tag = parts.next().unwrap_or_default();
        let parse_idx = |tok: Option<&str>| -> Result<usize, IoError> {
            let tok = tok.ok_or_else(|| IoError::Parse {
                path: path.to_string(),
                line: line_no,
                message: "expected two indices".into(),
            })?;
            tok.parse().map_err(|_| IoError::Parse {
                path: path.to_string(),
                line: line_no,
                message: format!("invalid index {tok:?}"),
            })
        };
        let i = parse_idx(parts.next())?;
        let j = parse_idx(parts.next())?;
        if parts.next().is_some() {
            return Err(IoError::Parse {
                path: path.to_string(),
                line: line_no,
                message: "trailing fields after the pair".into(),
            });
        }
        if i >= n || j >= n {
            return Err(IoError::Validation(ValidationError::IndexOutOfRange {
                index: i.max(j),
                n,
            }));
        }
        match tag {
            "ML" => ml.push((i, j)),
            "CL" => cl.push((i, j)),
            other => {
                return Err(IoError::Parse {
                    path: path.to_string(),
                    line: line_no,
                    message: format!("unknown constraint tag {other:?}"),
                })
            }
        }
    }
    Ok(ConstraintSet::new_dedup(ml, cl)?)
}

/// Renders a constraint set in the same text format.
pub fn format_constraints(cons: &ConstraintSet) -> String {
    let mut out = String::new();
    for &(i, j) in cons.ml_pairs() {
        out.push_str(&format!("ML {i} {j}\n"));
    }
    for &(i, j) in cons.cl_pairs() {
        out.push_str(&format!("CL {i} {j}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_pairs() {
        let cons = parse_text("ML 0 1\nCL 1 2\n", 5, "t").unwrap();
        assert_eq!(cons.ml_pairs(), &[(0, 1)]);
        assert_eq!(cons.cl_pairs(), &[(1, 2)]);
    }

    #[test]
    fn comments_blanks_and_normalization() {
        let cons = parse_text("# comment\n\nCL 2 1\n", 5, "t").unwrap();
        assert!(cons.ml_pairs().is_empty());
        assert_eq!(cons.cl_pairs(), &[(1, 2)]);
    }

    #[test]
    fn out_of_range_rejected() {
        let err = parse_text("ML 0 9\n", 5, "t").unwrap_err();
        assert!(matches!(
            err,
            IoError::Validation(ValidationError::IndexOutOfRange { index: 9, n: 5 })
        ));
    }

    #[test]
    fn duplicates_collapse() {
        let cons = parse_text("CL 2 3\nCL 3 2\n", 5, "t").unwrap();
        assert_eq!(cons.cl_pairs(), &[(2, 3)]);
    }

    #[test]
    fn conflict_detected() {
        let err = parse_text("ML 0 1\nCL 1 0\n", 5, "t").unwrap_err();
        assert!(matches!(
            err,
            IoError::Validation(ValidationError::MlClConflict { i: 0, j: 1 })
        ));
    }

    #[test]
    fn round_trips_through_format() {
        let cons = parse_text("ML 0 1\nCL 1 2\nCL 0 3\n", 5, "t").unwrap();
        let text = format_constraints(&cons);
        let again = parse_text(&text, 5, "t").unwrap();
        assert_eq!(cons.ml_pairs(), again.ml_pairs());
        assert_eq!(cons.cl_pairs(), again.cl_pairs());
    }
}

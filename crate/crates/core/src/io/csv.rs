//! Comma-separated dataset loading: numeric rows, optional header
//! (auto-skipped when the first row is non-numeric), optional integer label
//! column last.

use super::IoError;
use crate::model::Dataset;
use std::path::Path;

pub fn load_csv(path: &Path, labels_last: bool) -> Result<Dataset, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&text, labels_last, &path.display().to_string())
}

fn parse_csv(text: &str, labels_last: bool, path: &str) -> Result<Dataset, IoError> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut expected_fields: Option<usize> = None;
    let mut first_data_row = true;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if first_data_row && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            // Header row; skip it.
            first_data_row = false;
            continue;
        }
        first_data_row = false;
        if let Some(expected) = expected_fields {
            if fields.len() != expected {
                return Err(IoError::RaggedRows {
                    path: path.to_string(),
                    line: line_no,
                    got: fields.len(),
                    expected,
                });
            }
        } else {
            let min_fields = if labels_last { 2 } else { 1 };
            if fields.len() < min_fields {
                return Err(IoError::Parse {
                    path: path.to_string(),
                    line: line_no,
                    message: format!("need at least {min_fields} columns"),
                });
            }
            expected_fields = Some(fields.len());
        }
        let coord_count = fields.len() - usize::from(labels_last);
        let mut row = Vec::with_capacity(coord_count);
        for field in &fields[..coord_count] {
            let v: f64 = field.parse().map_err(|_| IoError::Parse {
                path: path.to_string(),
                line: line_no,
                message: format!("invalid number {field:?}"),
            })?;
            row.push(v);
        }
        if labels_last {
            let field = fields[coord_count];
            let label: usize = field.parse().map_err(|_| IoError::Parse {
                path: path.to_string(),
                line: line_no,
                message: format!("invalid integer label {field:?}"),
            })?;
            labels.push(label);
        }
        points.push(row);
    }

    let labels = if labels_last { Some(labels) } else { None };
    Ok(Dataset::new(points, labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_rows() {
        let data = parse_csv("0,0\n2,0\n", false, "t").unwrap();
        assert_eq!(data.n(), 2);
        assert_eq!(data.dim(), 2);
        assert_eq!(data.point(1), &[2.0, 0.0]);
    }

    #[test]
    fn header_skipped() {
        let data = parse_csv("x,y\n1,2\n3,4\n", false, "t").unwrap();
        assert_eq!(data.n(), 2);
        assert_eq!(data.point(0), &[1.0, 2.0]);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = parse_csv("1,2\n3\n", false, "t").unwrap_err();
        match err {
            IoError::RaggedRows { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn labels_last_column() {
        let data = parse_csv("1.5,2.5,0\n3.5,4.5,1\n", true, "t").unwrap();
        assert_eq!(data.dim(), 2);
        assert_eq!(data.labels(), Some(&[0usize, 1][..]));
    }

    #[test]
    fn bad_number_reports_line() {
        let err = parse_csv("1,2\n3,oops\n", false, "t").unwrap_err();
        match err {
            IoError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }
}

//! Comma-separated numeric tables. A first line with any non-numeric field
//! is treated as a header and skipped.

use std::fs::File;
use std::path::Path;

use super::CliError;

/// Rows of a numeric CSV file, all of equal length.
pub fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(k + 1, |p| p.line() as usize);
        let parsed: Vec<Option<f64>> = record.iter().map(|f| f.trim().parse::<f64>().ok()).collect();
        if k == 0 && parsed.iter().any(Option::is_none) {
            continue;
        }
        let values = parsed
            .iter()
            .enumerate()
            .map(|(col, v)| {
                v.filter(|x| x.is_finite()).ok_or_else(|| {
                    CliError::Usage(format!(
                        "{}: line {line}, column {}: `{}` is not a finite number",
                        path.display(),
                        col + 1,
                        record.get(col).unwrap_or("").trim()
                    ))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(CliError::Usage(format!(
                    "{}: line {line} has {} fields, expected {w}",
                    path.display(),
                    values.len()
                )))
            }
            _ => {}
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(CliError::Usage(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

/// Shortest round-trip decimal form; `NA` for non-finite values.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "NA".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file_with(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn header_detected_and_skipped() {
        let f = file_with("a,b\n1,2\n3,4.5\n");
        assert_eq!(read_numeric_csv(f.path()).unwrap(), vec![vec![1.0, 2.0], vec![3.0, 4.5]]);
        let f = file_with("1,2\n3,4\n");
        assert_eq!(read_numeric_csv(f.path()).unwrap().len(), 2);
    }

    #[test]
    fn ragged_and_non_numeric_rejected() {
        let err = read_numeric_csv(file_with("1,2\n3\n").path()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = read_numeric_csv(file_with("x,y\n1,2\n3,oops\n").path()).unwrap_err();
        assert!(err.to_string().contains("line 3, column 2"), "{err}");
        assert!(read_numeric_csv(file_with("1,nan\n").path()).is_err());
        assert!(read_numeric_csv(file_with("a,b\n").path()).is_err());
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(0.1), "0.1");
        assert_eq!(fmt_num(2.0), "2");
        assert_eq!(fmt_num(f64::NAN), "NA");
    }
}

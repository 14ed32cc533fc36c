//! Training data ingestion.

use std::io::Read;
use std::path::Path;

use cpskit::Observation;

use crate::CliError;

/// Reads `x1,...,xd,y` rows. The header must name `d >= 1` predictor
/// columns followed by `y`.
pub fn read_training(path: &Path) -> Result<Vec<Observation>, CliError> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map_err(CliError::data)?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    }
    parse_training(&text)
}

pub fn parse_training(text: &str) -> Result<Vec<Observation>, CliError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(CliError::data)?.clone();
    let cols = header.len();
    if cols < 2 || &header[cols - 1] != "y" {
        return Err(CliError::data("header must be x1,...,xd,y with d >= 1"));
    }
    for (i, name) in header.iter().take(cols - 1).enumerate() {
        if name != format!("x{}", i + 1) {
            return Err(CliError::data(format!("expected column 'x{}', found '{name}'", i + 1)));
        }
    }
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(CliError::data)?;
        let mut values = Vec::with_capacity(cols);
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| CliError::data(format!("row {}: cannot parse '{field}' as a number", row + 1)))?;
            values.push(v);
        }
        let y = values.pop().expect("header has a y column");
        out.push(Observation::new(values, y).map_err(|e| CliError::data(format!("row {}: {e}", row + 1)))?);
    }
    if out.is_empty() {
        return Err(CliError::data("training data has no rows"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows() {
        let d = parse_training("x1,x2,y\n0.5,1,3\n-1, 2 ,4.5\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d[1].x, vec![-1.0, 2.0]);
        assert_eq!(d[1].y, 4.5);
    }

    #[test]
    fn rejects_bad_input() {
        for text in ["y\n1\n", "x1,z\n1,2\n", "x2,y\n1,2\n", "x1,y\n1,abc\n", "x1,y\n1,2,3\n", "x1,y\n", "x1,y\nnan,1\n"] {
            let e = parse_training(text).unwrap_err();
            assert_eq!(e.code, 2, "{text:?}");
        }
    }
}

//! Delimited-text ingestion with a header row.

use std::fs::File;
use std::path::Path;

use crate::boundary::{Dataset, Observation, OutcomeRange};
use crate::error::{Error, Result};

use super::config::ColumnMap;

fn open(path: &Path) -> Result<csv::Reader<File>> {
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(e.to_string()))
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn line_of(rec: &csv::StringRecord, fallback: usize) -> usize {
    rec.position().map_or(fallback, |p| p.line() as usize)
}

fn number(rec: &csv::StringRecord, idx: usize, name: &str, line: usize) -> Result<f64> {
    let raw = rec.get(idx).unwrap_or("");
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::ParseError {
            line,
            message: format!("column `{name}`: `{raw}` is not a finite number"),
        }),
    }
}

fn treatment(rec: &csv::StringRecord, idx: usize, name: &str, line: usize) -> Result<bool> {
    let raw = rec.get(idx).unwrap_or("");
    match raw.to_ascii_lowercase().as_str() {
        "1" | "1.0" | "true" => Ok(true),
        "0" | "0.0" | "false" => Ok(false),
        _ => Err(Error::ParseError {
            line,
            message: format!("column `{name}`: `{raw}` is not a 0/1 treatment indicator"),
        }),
    }
}

fn records(
    reader: &mut csv::Reader<File>,
) -> impl Iterator<Item = Result<(csv::StringRecord, usize)>> + '_ {
    reader.records().enumerate().map(|(i, r)| match r {
        Ok(rec) => {
            let line = line_of(&rec, i + 2);
            Ok((rec, line))
        }
        Err(e) => Err(Error::ParseError {
            line: e.position().map_or(i + 2, |p| p.line() as usize),
            message: e.to_string(),
        }),
    })
}

/// Reads `(x, y, [d], covariates)` per the column mapping.
///
/// Rows whose running variable or outcome is not a finite number are
/// rejected with their line number.
pub fn ingest(
    path: &Path,
    columns: &ColumnMap,
    cutoff: f64,
    range: Option<OutcomeRange>,
) -> Result<Dataset> {
    let mut reader = open(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Io(e.to_string()))?
        .clone();
    let ix = column(&headers, &columns.x)?;
    let iy = column(&headers, &columns.y)?;
    let id = columns
        .d
        .as_deref()
        .map(|d| column(&headers, d))
        .transpose()?;
    let icov: Vec<usize> = columns
        .covariates
        .iter()
        .map(|c| column(&headers, c))
        .collect::<Result<_>>()?;
    let mut obs = Vec::new();
    for item in records(&mut reader) {
        let (rec, line) = item?;
        let x = number(&rec, ix, &columns.x, line)?;
        let y = number(&rec, iy, &columns.y, line)?;
        let d = match (id, columns.d.as_deref()) {
            (Some(k), Some(name)) => Some(treatment(&rec, k, name, line)?),
            _ => None,
        };
        let covariates = icov
            .iter()
            .zip(&columns.covariates)
            .map(|(&k, name)| number(&rec, k, name, line))
            .collect::<Result<Vec<f64>>>()?;
        obs.push(Observation {
            x,
            y,
            d,
            covariates,
        });
    }
    if obs.is_empty() {
        return Err(Error::InvalidDataset(format!(
            "{} has no data rows",
            path.display()
        )));
    }
    Dataset::new(obs, columns.covariates.clone(), cutoff, range)
}

/// The running-variable column alone.
pub fn read_running(path: &Path, col_x: &str) -> Result<Vec<f64>> {
    let mut reader = open(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Io(e.to_string()))?
        .clone();
    let ix = column(&headers, col_x)?;
    let mut xs = Vec::new();
    for item in records(&mut reader) {
        let (rec, line) = item?;
        xs.push(number(&rec, ix, col_x, line)?);
    }
    Ok(xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_fixture() {
        let f = write("x,y,w\n-0.5,0.1,3\n0.25,0.9,4\n1,0.5,5\n");
        let cols = ColumnMap {
            covariates: vec!["w".into()],
            ..Default::default()
        };
        let data = ingest(f.path(), &cols, 0.0, None).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(data.observations()[1].covariates, vec![4.0]);
        assert!(!data.has_treatment());
    }

    #[test]
    fn errors() {
        let f = write("x,outcome\n0.1,0.2\n");
        assert_eq!(
            ingest(f.path(), &ColumnMap::default(), 0.0, None).unwrap_err(),
            Error::MissingColumn("y".into())
        );
        let f = write("x,y\n0.1,0.2\n0.3,abc\n");
        match ingest(f.path(), &ColumnMap::default(), 0.0, None).unwrap_err() {
            Error::ParseError { line, .. } => assert_eq!(line, 3),
            e => panic!("{e:?}"),
        }
        let f = write("x,y\n");
        assert!(matches!(
            ingest(f.path(), &ColumnMap::default(), 0.0, None),
            Err(Error::InvalidDataset(_))
        ));
        assert!(matches!(
            ingest(
                Path::new("/nonexistent/file.csv"),
                &ColumnMap::default(),
                0.0,
                None
            ),
            Err(Error::FileNotFound(_))
        ));
        let f = write("x,y,d\n0.1,0.2,maybe\n");
        let cols = ColumnMap {
            d: Some("d".into()),
            ..Default::default()
        };
        assert!(matches!(
            ingest(f.path(), &cols, 0.0, None),
            Err(Error::ParseError { line: 2, .. })
        ));
    }
}

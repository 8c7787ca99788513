//! CSV ingestion and output.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::exit::CliError;

/// Numeric table read from a CSV file with a header row.
pub struct Table {
    pub headers: Vec<String>,
    /// Column-major values, one `Vec` per header.
    pub columns: Vec<Vec<f64>>,
    pub rows: usize,
}

fn parse_number(s: &str) -> Option<f64> {
    let v: f64 = s.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

impl Table {
    pub fn read_header(path: &Path) -> Result<Vec<String>, CliError> {
        let file =
            File::open(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(file);
        let headers = reader
            .headers()
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Ok(headers.iter().map(|h| h.trim().to_string()).collect())
    }

    /// Reads every column except `skip`, which are never parsed.
    pub fn read(path: &Path, skip: &[String]) -> Result<Table, CliError> {
        let file =
            File::open(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(file);
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(CliError::input(format!(
                "{}: missing header row",
                path.display()
            )));
        }
        for (i, h) in headers.iter().enumerate() {
            if headers[..i].contains(h) {
                return Err(CliError::input(format!(
                    "{}: duplicate column '{h}'",
                    path.display()
                )));
            }
        }
        let keep: Vec<bool> = headers.iter().map(|h| !skip.contains(h)).collect();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
        let mut rows = 0;
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                CliError::input(format!("{}: line {line}: {e}", path.display()))
            })?;
            let line = record.position().map_or(rows + 2, |p| p.line() as usize);
            for (j, field) in record.iter().enumerate() {
                if !keep[j] {
                    continue;
                }
                let v = parse_number(field).ok_or_else(|| {
                    CliError::input(format!(
                        "{}: line {line}, column '{}': cannot parse '{field}' as a finite number \
                         (use --exclude for non-numeric columns)",
                        path.display(),
                        headers[j]
                    ))
                })?;
                columns[j].push(v);
            }
            rows += 1;
        }
        if rows == 0 {
            return Err(CliError::input(format!("{}: no data rows", path.display())));
        }
        Ok(Table {
            headers,
            columns,
            rows,
        })
    }

    pub fn index(&self, name: &str) -> Result<usize, CliError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::input(format!("column '{name}' not found")))
    }

    pub fn column(&self, name: &str) -> Result<&[f64], CliError> {
        Ok(&self.columns[self.index(name)?])
    }

    /// Design matrix from the named columns, in order.
    pub fn matrix(&self, names: &[String]) -> Result<DMatrix<f64>, CliError> {
        let mut x = DMatrix::zeros(self.rows, names.len());
        for (k, name) in names.iter().enumerate() {
            let col = self.column(name)?;
            x.column_mut(k).copy_from_slice(col);
        }
        Ok(x)
    }
}

/// Writes `rows` under `header` to `path`, or to stdout when `path` is `None`.
pub fn write_rows(
    path: Option<&Path>,
    header: &[String],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => {
            Box::new(File::create(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?)
        }
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| CliError::input(format!("writing CSV: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::input(format!("writing CSV: {e}")))?;
    Ok(())
}

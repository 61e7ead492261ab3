//! Rectangular numeric data with named columns, read from and written to
//! header-first CSV.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    /// Every value is 0 or 1.
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub values: Vec<f64>,
}

/// Named columns of equal length holding finite numbers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataTable {
    columns: Vec<Column>,
}

fn infer_kind(values: &[f64]) -> ColumnKind {
    if !values.is_empty() && values.iter().all(|v| *v == 0.0 || *v == 1.0) {
        ColumnKind::Binary
    } else {
        ColumnKind::Numeric
    }
}

impl DataTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a column; its kind is inferred from the values.
    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::Data("column names must be nonempty".into()));
        }
        if self.column(&name).is_some() {
            return Err(Error::Data(format!("duplicate column '{name}'")));
        }
        if let Some(first) = self.columns.first() {
            if first.values.len() != values.len() {
                return Err(Error::Data(format!(
                    "column '{name}' has {} rows, expected {}",
                    values.len(),
                    first.values.len()
                )));
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("column '{name}' has a non-finite value at row {}", pos + 1)));
        }
        let kind = infer_kind(&values);
        self.columns.push(Column { name, kind, values });
        Ok(())
    }

    pub fn with_column(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        self.push_column(name, values)?;
        Ok(self)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Values of a required column, or a schema error naming it.
    pub fn values(&self, name: &str) -> Result<&[f64]> {
        self.column(name)
            .map(|c| c.values.as_slice())
            .ok_or_else(|| Error::Schema(format!("missing column '{name}'")))
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Csv { line: 1, message: e.to_string() })?
            .iter()
            .map(str::to_string)
            .collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(Error::Csv { line: 1, message: "missing header row".into() });
        }
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                Error::Csv { line, message: e.to_string() }
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != headers.len() {
                return Err(Error::Csv {
                    line,
                    message: format!("expected {} fields, found {}", headers.len(), record.len()),
                });
            }
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Csv {
                    line,
                    message: format!("field '{}' is not a number: '{field}'", headers[j]),
                })?;
                if !v.is_finite() {
                    return Err(Error::Csv { line, message: format!("non-finite value in '{}'", headers[j]) });
                }
                cols[j].push(v);
            }
        }
        let mut table = DataTable::new();
        for (name, values) in headers.into_iter().zip(cols) {
            table.push_column(name, values).map_err(|e| Error::Csv { line: 1, message: e.to_string() })?;
        }
        Ok(table)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().from_writer(writer);
        let io_err = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
        w.write_record(self.columns.iter().map(|c| c.name.as_str())).map_err(io_err)?;
        for i in 0..self.n_rows() {
            w.write_record(self.columns.iter().map(|c| format_number(c.values[i]))).map_err(io_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.to_csv_writer(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Shortest decimal form that parses back to the identical `f64`.
pub fn format_number(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

//! CSV and JSON interchange for tabular data.
//!
//! Dialect: comma-separated, mandatory header row, UTF-8, "." decimal point.
//! Numbers are written in Rust's shortest round-trip form.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use super::schema::{CellValue, ColumnKind, ColumnSpec, Row, TableSchema};
use super::{Result, TabularError};

pub fn format_cell(cell: &CellValue) -> String {
    match cell {
        CellValue::Number(v) => format!("{v}"),
        CellValue::Category(s) => s.clone(),
    }
}

pub fn parse_cell(col: &ColumnSpec, raw: &str) -> Result<CellValue> {
    match col.kind {
        ColumnKind::Numerical => {
            let v: f64 = raw.parse().map_err(|_| TabularError::Schema(format!(
                "column '{}': cannot parse '{raw}' as a number",
                col.name
            )))?;
            if !v.is_finite() {
                return Err(TabularError::NonFinite {
                    column: col.name.clone(),
                });
            }
            Ok(CellValue::Number(v))
        }
        ColumnKind::Categorical => {
            if col.category_index(raw).is_none() {
                return Err(TabularError::UnknownCategory {
                    column: col.name.clone(),
                    value: raw.to_string(),
                });
            }
            Ok(CellValue::Category(raw.to_string()))
        }
    }
}

/// Writes rows with a header of schema column names.
pub fn write_rows_csv(path: &Path, schema: &TableSchema, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(schema.column_names())?;
    for row in rows {
        w.write_record(row.iter().map(format_cell))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows, checking the header and every cell against the schema.
pub fn read_rows_csv(path: &Path, schema: &TableSchema) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let header: Vec<String> = r.headers()?.iter().map(|s| s.to_string()).collect();
    let expected = schema.column_names();
    if header != expected {
        return Err(TabularError::Schema(format!(
            "csv header {header:?} does not match schema columns {expected:?}"
        )));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        if record.len() != schema.columns.len() {
            return Err(TabularError::RowLength {
                expected: schema.columns.len(),
                got: record.len(),
            });
        }
        let row: Row = schema
            .columns
            .iter()
            .zip(record.iter())
            .map(|(col, raw)| parse_cell(col, raw))
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_schema_json(path: &Path, schema: &TableSchema) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, schema)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn read_schema_json(path: &Path) -> Result<TableSchema> {
    let schema: TableSchema = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    schema.validate()?;
    Ok(schema)
}

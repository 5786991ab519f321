//! CSV and schema-file I/O. CSV files carry a header row matching the schema
//! column names in order; numeric cells use the shortest round-trip decimal
//! rendering, so save-then-load reproduces a dataset exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use super::{ColumnKind, DataError, Dataset, Record, TabularSchema, Value};

pub fn load_schema(path: impl AsRef<Path>) -> Result<TabularSchema, DataError> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(DataError::MissingFile {
            path: path.display().to_string(),
        });
    }
    let reader = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(reader)?)
}

pub fn save_schema(schema: &TabularSchema, path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut writer = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut writer, schema)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn load_csv(path: impl AsRef<Path>, schema: &TabularSchema) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(DataError::MissingFile {
            path: path.display().to_string(),
        });
    }
    let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path)?));

    let expected: Vec<&str> = schema.columns().iter().map(|c| c.name.as_str()).collect();
    let found: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if found != expected {
        return Err(DataError::HeaderMismatch {
            expected: expected.join(","),
            found: found.join(","),
        });
    }

    let mut rows = Vec::new();
    for (row_idx, result) in reader.records().enumerate() {
        let row_number = row_idx + 1; // 1-based data row, header excluded
        let record = result?;
        let mut values = Vec::with_capacity(schema.len());
        for (col, cell) in schema.columns().iter().zip(record.iter()) {
            values.push(parse_cell(cell, col.name.as_str(), &col.kind, row_number)?);
        }
        rows.push(Record::new(values));
    }
    Dataset::new(schema.clone(), rows)
}

fn parse_cell(
    cell: &str,
    column: &str,
    kind: &ColumnKind,
    row: usize,
) -> Result<Value, DataError> {
    match kind {
        ColumnKind::Numeric { .. } => {
            let parsed: f64 = cell.parse().map_err(|_| DataError::BadCell {
                row,
                column: column.to_string(),
                reason: format!("not a number: {cell:?}"),
            })?;
            if !parsed.is_finite() {
                return Err(DataError::BadCell {
                    row,
                    column: column.to_string(),
                    reason: format!("not a finite number: {cell:?}"),
                });
            }
            Ok(Value::Number(parsed))
        }
        ColumnKind::Categorical { levels } => {
            match levels.iter().position(|l| l == cell) {
                Some(idx) => Ok(Value::Category(idx)),
                None => Err(DataError::BadCell {
                    row,
                    column: column.to_string(),
                    reason: format!("unknown level {cell:?}"),
                }),
            }
        }
    }
}

pub fn save_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let names: Vec<&str> = dataset
        .schema()
        .columns()
        .iter()
        .map(|c| c.name.as_str())
        .collect();
    writer.write_record(&names)?;
    for row in dataset.rows() {
        let cells: Vec<String> = dataset
            .schema()
            .columns()
            .iter()
            .zip(row.values())
            .map(|(col, value)| render_cell(&col.kind, value))
            .collect();
        writer.write_record(&cells)?;
    }
    writer.flush()?;
    Ok(())
}

fn render_cell(kind: &ColumnKind, value: &Value) -> String {
    match (kind, value) {
        (ColumnKind::Categorical { levels }, Value::Category(idx)) => levels[*idx].clone(),
        (ColumnKind::Numeric { .. }, Value::Number(v)) => format!("{v}"),
        _ => unreachable!("dataset rows are schema-validated"),
    }
}

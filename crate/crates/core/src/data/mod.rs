//! Tabular data model shared by every other module: schemas over mixed
//! categorical/numeric columns, validated records and datasets, deterministic
//! randomness, Gower-style distances, and CSV/JSON I/O.

mod csv_io;
mod distance;
mod rng;

pub use csv_io::{load_csv, load_schema, save_csv, save_schema};
pub use distance::{
    distance, nearest_neighbors, nearest_neighbors_reference, proximity_count, ColumnScale,
    DistanceConfig,
};
pub(crate) use distance::{by_distance_then_index, column_distance};
pub use rng::SeededRng;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("file not found: {path}")]
    MissingFile { path: String },
    #[error("header mismatch: expected [{expected}], found [{found}]")]
    HeaderMismatch { expected: String, found: String },
    #[error("bad cell at row {row}, column {column}: {reason}")]
    BadCell {
        row: usize,
        column: String,
        reason: String,
    },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("k={k} out of range for corpus of {n} rows")]
    KTooLarge { k: usize, n: usize },
    #[error("need at least 2 rows to split, got {n}")]
    TooFewRows { n: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("csv: {0}")]
    Csv(#[from] ::csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Column payload: an ordered categorical level set or a numeric range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical { levels: Vec<String> },
    Numeric { min: f64, max: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

impl Column {
    pub fn numeric(name: &str, min: f64, max: f64) -> Column {
        Column {
            name: name.to_string(),
            kind: ColumnKind::Numeric { min, max },
        }
    }

    pub fn categorical(name: &str, levels: &[&str]) -> Column {
        Column {
            name: name.to_string(),
            kind: ColumnKind::Categorical {
                levels: levels.iter().map(|s| s.to_string()).collect(),
            },
        }
    }
}

/// Ordered column declarations. Constructing via [`TabularSchema::new`]
/// enforces: unique non-empty names, non-empty duplicate-free level lists,
/// and finite `min <= max` ranges (`min == max` declares a constant column).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TabularSchema {
    columns: Vec<Column>,
}

impl TabularSchema {
    pub fn new(columns: Vec<Column>) -> Result<Self, DataError> {
        if columns.is_empty() {
            return Err(DataError::InvalidSchema("no columns".into()));
        }
        for (i, col) in columns.iter().enumerate() {
            if col.name.is_empty() {
                return Err(DataError::InvalidSchema(format!("column {i} has an empty name")));
            }
            if columns[..i].iter().any(|c| c.name == col.name) {
                return Err(DataError::InvalidSchema(format!(
                    "duplicate column name {:?}",
                    col.name
                )));
            }
            match &col.kind {
                ColumnKind::Categorical { levels } => {
                    if levels.is_empty() {
                        return Err(DataError::InvalidSchema(format!(
                            "column {:?} has no levels",
                            col.name
                        )));
                    }
                    for (j, level) in levels.iter().enumerate() {
                        if levels[..j].contains(level) {
                            return Err(DataError::InvalidSchema(format!(
                                "column {:?} has duplicate level {:?}",
                                col.name, level
                            )));
                        }
                    }
                }
                ColumnKind::Numeric { min, max } => {
                    if !min.is_finite() || !max.is_finite() || min > max {
                        return Err(DataError::InvalidSchema(format!(
                            "column {:?} has invalid range [{min}, {max}]",
                            col.name
                        )));
                    }
                }
            }
        }
        Ok(TabularSchema { columns })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Checks arity, kind agreement, level-index bounds, and finiteness.
    pub fn validate_record(&self, record: &Record) -> Result<(), DataError> {
        if record.values().len() != self.columns.len() {
            return Err(DataError::SchemaMismatch(format!(
                "record has {} values, schema has {} columns",
                record.values().len(),
                self.columns.len()
            )));
        }
        for (col, value) in self.columns.iter().zip(record.values()) {
            match (&col.kind, value) {
                (ColumnKind::Categorical { levels }, Value::Category(idx)) => {
                    if *idx >= levels.len() {
                        return Err(DataError::SchemaMismatch(format!(
                            "category index {idx} out of range for column {:?}",
                            col.name
                        )));
                    }
                }
                (ColumnKind::Numeric { .. }, Value::Number(v)) => {
                    if !v.is_finite() {
                        return Err(DataError::SchemaMismatch(format!(
                            "non-finite value in column {:?}",
                            col.name
                        )));
                    }
                }
                _ => {
                    return Err(DataError::SchemaMismatch(format!(
                        "value kind does not match column {:?}",
                        col.name
                    )));
                }
            }
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for TabularSchema {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            columns: Vec<Column>,
        }
        let raw = Raw::deserialize(deserializer)?;
        TabularSchema::new(raw.columns).map_err(serde::de::Error::custom)
    }
}

/// One cell: an index into the column's level list or a finite real.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Category(usize),
    Number(f64),
}

/// One individual's row; validated against a schema on dataset construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Record {
    values: Vec<Value>,
}

impl Record {
    pub fn new(values: Vec<Value>) -> Record {
        Record { values }
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn value(&self, index: usize) -> Value {
        self.values[index]
    }
}

/// Hashable key with the same equality as `Record` comparison by value
/// (`-0.0` folded onto `0.0`; non-finite values never occur in valid data).
pub(crate) fn row_key(record: &Record) -> Vec<u64> {
    let mut key = Vec::with_capacity(record.values().len() * 2);
    for v in record.values() {
        match v {
            Value::Category(i) => {
                key.push(0);
                key.push(*i as u64);
            }
            Value::Number(x) => {
                let x = if *x == 0.0 { 0.0 } else { *x };
                key.push(1);
                key.push(x.to_bits());
            }
        }
    }
    key
}

/// Immutable, schema-validated collection of records.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    schema: TabularSchema,
    rows: Vec<Record>,
}

impl Dataset {
    pub fn new(schema: TabularSchema, rows: Vec<Record>) -> Result<Dataset, DataError> {
        for (i, row) in rows.iter().enumerate() {
            schema.validate_record(row).map_err(|e| {
                DataError::SchemaMismatch(format!("row {i}: {e}"))
            })?;
        }
        Ok(Dataset { schema, rows })
    }

    pub fn schema(&self) -> &TabularSchema {
        &self.schema
    }

    pub fn rows(&self) -> &[Record] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// True if `record` equals some row of this dataset exactly.
    pub fn contains(&self, record: &Record) -> bool {
        self.rows.iter().any(|r| r == record)
    }
}

/// Random permutation, then the first `ceil(n/2)` rows become the train
/// split and the remainder the test split. For odd `n` the train side gets
/// the extra row, so `|train| - |test|` is 0 or 1.
pub fn split_train_test(
    d: &Dataset,
    rng: &mut SeededRng,
) -> Result<(Dataset, Dataset), DataError> {
    if d.n() < 2 {
        return Err(DataError::TooFewRows { n: d.n() });
    }
    let mut order: Vec<usize> = (0..d.n()).collect();
    rng.shuffle(&mut order);
    let cut = d.n().div_ceil(2);
    let train_rows = order[..cut].iter().map(|&i| d.rows[i].clone()).collect();
    let test_rows = order[cut..].iter().map(|&i| d.rows[i].clone()).collect();
    Ok((
        Dataset::new(d.schema.clone(), train_rows)?,
        Dataset::new(d.schema.clone(), test_rows)?,
    ))
}

/// `n` rows sampled i.i.d. from a 2-d standard normal (Box-Muller pairs),
/// in columns `x` and `y` declared over `[-8, 8]`.
pub fn gaussian2d_sample(n: usize, rng: &mut SeededRng) -> Result<Dataset, DataError> {
    if n == 0 {
        return Err(DataError::EmptyDataset);
    }
    let schema = TabularSchema::new(vec![
        Column::numeric("x", -8.0, 8.0),
        Column::numeric("y", -8.0, 8.0),
    ])?;
    let rows = (0..n)
        .map(|_| {
            let (x, y) = rng.normal_pair();
            Record::new(vec![Value::Number(x), Value::Number(y)])
        })
        .collect();
    Dataset::new(schema, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_numeric_schema() -> TabularSchema {
        TabularSchema::new(vec![
            Column::numeric("x", 0.0, 1.0),
            Column::numeric("y", 0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn schema_rejects_duplicate_names() {
        let err = TabularSchema::new(vec![
            Column::numeric("x", 0.0, 1.0),
            Column::numeric("x", 0.0, 1.0),
        ])
        .unwrap_err();
        assert!(matches!(err, DataError::InvalidSchema(_)));
    }

    #[test]
    fn schema_rejects_inverted_range_and_bad_levels() {
        assert!(TabularSchema::new(vec![Column::numeric("x", 1.0, 0.0)]).is_err());
        assert!(TabularSchema::new(vec![Column::categorical("c", &[])]).is_err());
        assert!(TabularSchema::new(vec![Column::categorical("c", &["a", "a"])]).is_err());
        // constant column is allowed
        assert!(TabularSchema::new(vec![Column::numeric("x", 5.0, 5.0)]).is_ok());
    }

    #[test]
    fn record_validation_catches_kind_and_range_errors() {
        let schema = TabularSchema::new(vec![
            Column::numeric("x", 0.0, 1.0),
            Column::categorical("c", &["a", "b"]),
        ])
        .unwrap();
        let ok = Record::new(vec![Value::Number(0.5), Value::Category(1)]);
        schema.validate_record(&ok).unwrap();
        let bad_kind = Record::new(vec![Value::Category(0), Value::Category(1)]);
        assert!(schema.validate_record(&bad_kind).is_err());
        let bad_index = Record::new(vec![Value::Number(0.5), Value::Category(2)]);
        assert!(schema.validate_record(&bad_index).is_err());
        let non_finite = Record::new(vec![Value::Number(f64::NAN), Value::Category(0)]);
        assert!(schema.validate_record(&non_finite).is_err());
        let short = Record::new(vec![Value::Number(0.5)]);
        assert!(schema.validate_record(&short).is_err());
    }

    #[test]
    fn split_partitions_evenly_and_deterministically() {
        let schema = two_numeric_schema();
        let rows: Vec<Record> = (0..20)
            .map(|i| {
                Record::new(vec![
                    Value::Number(i as f64 / 20.0),
                    Value::Number(i as f64 / 40.0),
                ])
            })
            .collect();
        let d = Dataset::new(schema, rows).unwrap();

        let mut rng = SeededRng::new(7);
        let (train, test) = split_train_test(&d, &mut rng).unwrap();
        assert_eq!(train.n(), 10);
        assert_eq!(test.n(), 10);

        let mut union: Vec<Vec<u64>> = train
            .rows()
            .iter()
            .chain(test.rows())
            .map(row_key)
            .collect();
        union.sort_unstable();
        let mut original: Vec<Vec<u64>> = d.rows().iter().map(row_key).collect();
        original.sort_unstable();
        assert_eq!(union, original);

        let mut rng2 = SeededRng::new(7);
        let (train2, test2) = split_train_test(&d, &mut rng2).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
    }

    #[test]
    fn split_gives_train_the_extra_row_for_odd_n() {
        let schema = TabularSchema::new(vec![Column::numeric("x", 0.0, 30.0)]).unwrap();
        let rows: Vec<Record> = (0..21)
            .map(|i| Record::new(vec![Value::Number(i as f64)]))
            .collect();
        let d = Dataset::new(schema, rows).unwrap();
        let (train, test) = split_train_test(&d, &mut SeededRng::new(1)).unwrap();
        assert_eq!(train.n(), 11);
        assert_eq!(test.n(), 10);
    }

    #[test]
    fn split_rejects_tiny_datasets() {
        let schema = TabularSchema::new(vec![Column::numeric("x", 0.0, 1.0)]).unwrap();
        let d = Dataset::new(schema, vec![Record::new(vec![Value::Number(0.0)])]).unwrap();
        assert!(matches!(
            split_train_test(&d, &mut SeededRng::new(0)),
            Err(DataError::TooFewRows { n: 1 })
        ));
    }

    #[test]
    fn gaussian_sample_is_deterministic_and_calibrated() {
        let mut rng = SeededRng::new(13);
        let d = gaussian2d_sample(10, &mut rng).unwrap();
        assert_eq!(d.n(), 10);
        for coord in 0..2 {
            let mean: f64 = d
                .rows()
                .iter()
                .map(|r| match r.value(coord) {
                    Value::Number(v) => v,
                    _ => unreachable!(),
                })
                .sum::<f64>()
                / 10.0;
            assert!(mean.abs() <= 1.2, "coordinate {coord} mean {mean}");
        }

        let mut rng2 = SeededRng::new(13);
        let d2 = gaussian2d_sample(10, &mut rng2).unwrap();
        assert_eq!(d, d2);

        assert!(matches!(
            gaussian2d_sample(0, &mut SeededRng::new(0)),
            Err(DataError::EmptyDataset)
        ));
    }

    #[test]
    fn gaussian_sample_variance_near_one_at_scale() {
        let mut rng = SeededRng::new(2024);
        let d = gaussian2d_sample(100_000, &mut rng).unwrap();
        for coord in 0..2 {
            let values: Vec<f64> = d
                .rows()
                .iter()
                .map(|r| match r.value(coord) {
                    Value::Number(v) => v,
                    _ => unreachable!(),
                })
                .collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var =
                values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
            assert!(
                (0.98..=1.02).contains(&var),
                "coordinate {coord} variance {var}"
            );
        }
    }
}

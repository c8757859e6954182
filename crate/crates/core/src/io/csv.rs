//! CSV datasets: header of lowercase input names followed by one
//! `<target>_do` column, e.g. `sa,lcd,scl,sts,slp_do`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::dataset::{Dataset, Record};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("non-numeric cell {value:?} at line {line}, column {column}")]
    NonNumericCell { line: usize, column: String, value: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn read_csv_dataset(path: impl AsRef<Path>) -> Result<Dataset, CsvError> {
    read_csv_from(File::open(path)?)
}

pub fn read_csv_from(reader: impl Read) -> Result<Dataset, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(CsvError::SchemaMismatch("missing header row".into()));
    }
    let target_cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.to_ascii_lowercase().ends_with("_do"))
        .map(|(i, _)| i)
        .collect();
    if target_cols.len() != 1 || target_cols[0] != headers.len() - 1 {
        return Err(CsvError::SchemaMismatch(format!(
            "expected exactly one trailing *_do column, header is {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    if headers.len() < 2 {
        return Err(CsvError::SchemaMismatch("no input columns".into()));
    }
    let last = &headers[headers.len() - 1];
    let target = last[..last.len() - 3].to_ascii_uppercase();
    let schema: Vec<String> = headers.iter().take(headers.len() - 1).map(|h| h.to_ascii_uppercase()).collect();

    let mut ds = Dataset::new(schema, target);
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        if rec.len() != headers.len() {
            return Err(CsvError::SchemaMismatch(format!(
                "line {line} has {} cells, header has {}",
                rec.len(),
                headers.len()
            )));
        }
        let mut values = Vec::with_capacity(rec.len());
        for (cell, column) in rec.iter().zip(headers.iter()) {
            let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                CsvError::NonNumericCell {
                    line,
                    column: column.to_string(),
                    value: cell.to_string(),
                }
            })?;
            values.push(v);
        }
        let desired = values.pop().expect("at least two columns");
        ds.records.push(Record { inputs: values, desired });
    }
    Ok(ds)
}

pub fn write_csv_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), CsvError> {
    write_csv_to(dataset, File::create(path)?)
}

pub fn write_csv_to(dataset: &Dataset, writer: impl Write) -> Result<(), CsvError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let mut header: Vec<String> = dataset.schema.iter().map(|s| s.to_ascii_lowercase()).collect();
    header.push(format!("{}_do", dataset.target.to_ascii_lowercase()));
    w.write_record(&header)?;
    for r in &dataset.records {
        if r.inputs.len() != dataset.schema.len() {
            return Err(CsvError::SchemaMismatch(format!(
                "record has {} inputs, schema has {}",
                r.inputs.len(),
                dataset.schema.len()
            )));
        }
        w.write_record(r.inputs.iter().chain(std::iter::once(&r.desired)).map(|v| format!("{v}")))?;
    }
    w.flush()?;
    Ok(())
}

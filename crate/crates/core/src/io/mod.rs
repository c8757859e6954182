//! File formats: FML knowledge bases and CSV datasets.

pub mod csv;
pub mod fml;

pub use self::csv::{read_csv_dataset, read_csv_from, write_csv_dataset, write_csv_to, CsvError};
pub use self::fml::{parse_fml, parse_fml_with, read_fml_file, serialize_fml, write_fml_file, FmlError, ParseOptions};

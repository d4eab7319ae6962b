//! Storage: the MFB binary format, delimited-text conversion and the data
//! generator.

pub mod csv;
pub mod gen;
pub mod mfb;

pub use self::csv::{csv_to_mfb, read_csv, write_csv, ConversionReport, CsvSchema, CsvType};
pub use gen::{gen_tables, gen_tpch_mini, GenManifest, TABLES};
pub use mfb::{read_directory, read_mfb, read_mfb_all, write_mfb, IoStats, MfbDirectory};

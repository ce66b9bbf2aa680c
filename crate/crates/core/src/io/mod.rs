//! CSV ingestion, run manifests and report emission.

mod ingest;
mod manifest;
mod report;

pub use ingest::{ingest_csv, ingest_reader, ColumnMapping};
pub use manifest::RunManifest;
pub use report::{run, write_report, ReportBundle, OUTPUT_FILES};

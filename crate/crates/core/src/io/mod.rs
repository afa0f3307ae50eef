//! File formats: prediction CSVs, rendered reports and SVG plots.

mod csv;
pub mod report;
pub mod svg;

pub use self::csv::{load_csv, load_csv_path, write_dataset_csv, write_simulated_csv};
pub use report::{
    parse_report_json, render_report, render_suite_table, ReportFormat, SCHEMA_VERSION,
};

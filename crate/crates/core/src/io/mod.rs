//! File formats: survival tables, imputation, scenario configs and reports.

pub mod config;
pub mod impute;
pub mod report;
pub mod table;

pub use config::ScenarioConfig;
pub use impute::{knn_impute, KNN_KERNEL};
pub use report::{
    fmt_f64, read_json, read_report_csv, read_screening_csv, screening_rows, write_json,
    write_report_csv, write_screening_csv, ScreeningRow,
};
pub use table::{load_survival_csv, parse_survival_table, RawTable};

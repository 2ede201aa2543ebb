//! Experiment driver: parameter sweeps and page-gap calibration over either
//! backend, written out as CSV.

mod report;
mod settings;
mod sweep;

pub use report::{emit_report, summary_table, write_csv, write_single, CSV_HEADER};
pub use settings::{parse_duration_ns, parse_size, Settings};
pub use sweep::{
    calibrate_page_gap, run_sweep, Aggregate, Backend, Calibration, SweepResult, SweepRow, SweepSpec, SweepVariable,
};

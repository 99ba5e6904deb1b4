//! Scenario sweeps over a perturbation scale, rate fits and report files.

mod report;
mod scenario;
mod sweep;

pub use report::{emit_report, parse_formats, to_csv, to_svg, Format, CSV_HEADER};
pub use scenario::{Perturbation, Scenario, PRESETS};
pub use sweep::{fit_rate, run_sweep, RateFit, RowFailure, RunMetadata, SweepReport, SweepRow, MAX_FAILED_FRACTION};

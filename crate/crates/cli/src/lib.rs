//! Experiment runner: graphs in, per-trial metrics and oracle verdicts out.

pub mod report;
pub mod runner;
pub mod spec;

pub use report::{Format, ReportRow, SweepReport, SweepRow};
pub use runner::{cmd_run, cmd_sweep, run_algorithm, TrialOutcome};
pub use spec::{Algorithm, ExperimentSpec, GraphSource, SpecError, SweepSpec};

pub fn render_run(rows: &[ReportRow], format: Format) -> Result<String, SpecError> {
    match format {
        Format::Json => report::to_json(rows),
        Format::Csv => report::to_csv(rows),
        Format::Text => Ok(report::rows_text(rows)),
    }
}

/// JSON carries the trials as well; CSV and text show the per-size summary.
pub fn render_sweep(rep: &SweepReport, format: Format) -> Result<String, SpecError> {
    match format {
        Format::Json => report::to_json(rep),
        Format::Csv => report::to_csv(&rep.sizes),
        Format::Text => Ok(report::sweep_text(&rep.sizes)),
    }
}

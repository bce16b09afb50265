//! Configuration, figure recipes, drive sweeps and column-data output.

mod analysis;
mod config;
mod data;
mod pulse;
mod run;

pub use analysis::{
    anticrossing, band_integral, central_linewidth, compare_peaks, local_minima, lower_sideband_gap, splittings,
    AntiCrossing, Comparison, ComparisonRow, Splittings, SIDEBAND_HALF_WINDOW,
};
pub use config::{DriveAxis, FitKind, Scenario, ScenarioConfig, Truncation};
pub use data::{format_float, DataTable};
pub use pulse::{run_pulse_program, MeasurementWindow, PulseProgram, PulseRun, Segment, PI_AREA_TOL};
pub use run::{
    compare_analytic, drive_point, relax_run, run_scenario, spectrum_plan, sweep_spectra, RelaxFit, ScenarioOutput,
};

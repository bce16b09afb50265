//! Two-time correlations by quantum regression, g¹(τ), incoherent emission
//! spectra (static and periodically modulated), and waveguide output traces.

mod fft;
mod modulated;
mod output;
mod regression;
mod spectrum;

pub use fft::{fft_lines, FftLines, SpectralPart};
pub use modulated::{
    calibrate_pump, mean_photons, modulated_spectrum, period_average, periodic_steady_state, pumped_spectrum, ModulatedOptions, PeriodicState, PumpCalibration,
    PumpOptions, DEFAULT_T0_SAMPLES, PSS_DRIFT_TOL,
};
pub use output::{output_field_trace, output_power_trace, FieldTrace, PowerTraces};
pub use regression::{
    g1, two_time_correlation, two_time_correlation_with, CorrelationTrace, LiouvillianModes, ModeExpansion,
    STATIONARITY_TOL,
};
pub use spectrum::{
    default_tau_grid, emission_spectrum, find_peaks, frequency_grid, stationary_spectrum, Peak, PeakOptions,
    SpectrumOptions, SpectrumPlan, SpectrumResult, Window, TAIL_TOL,
};

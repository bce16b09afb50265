//! Device formulas (transmon spectrum, waveguide reflection) and the
//! least-squares fitters used across the crate.

mod fits;
mod lm;

pub use fits::{
    fit_exponential, fit_lorentzian, fit_lorentzian_sum, fit_reflection, complex_lorentzian, fit_transmon, lorentzian, reflection_coefficient,
    reflection_weak, transmon_transition, ReflectionSample, TransmonParams, TransmonSample, LORENTZIAN_SHAPE_TOL,
};
pub(crate) use fits::half_height_width;
pub use lm::{levenberg_marquardt, FitReport, LmOptions, Model};

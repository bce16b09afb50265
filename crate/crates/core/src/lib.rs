//! Resonance fluorescence of a driven two-level atom coupled to a detuned
//! cavity: master-equation dynamics, emission spectra, dressed-state theory
//! and device characterization.
//!
//! Units: frequencies and rates are angular (rad/µs), times are µs. Spectral
//! axes are reported as ordinary frequency offsets in MHz.

pub mod error;
pub mod hilbert;
pub mod lindblad;
pub mod correlation;
pub mod device;
pub mod dressed;
pub mod linalg;
pub mod scenarios;

pub use error::{Error, Result};
pub use hilbert::{mhz, to_mhz, DephasingConvention, HilbertSpec, Operator, OperatorSet, SystemSpec};
pub use lindblad::{DensityMatrix, Liouvillian};
pub use scenarios::{run_scenario, Scenario, ScenarioConfig, ScenarioOutput};

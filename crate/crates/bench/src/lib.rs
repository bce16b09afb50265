//! Fixtures shared by the solver benchmarks.

use fluor_core::hilbert::{mhz, SystemSpec};

/// Device parameters driven at Ω = Δ₀, with `levels` cavity levels.
pub fn doubly_dressed(levels: usize) -> SystemSpec {
    SystemSpec::default().with_rabi(mhz(37.0)).with_cavity_levels(levels).expect("valid truncation")
}

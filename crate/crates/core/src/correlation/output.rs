use crate::error::{Error, Result};
use crate::hilbert::SystemSpec;
use crate::lindblad::Trajectory;
use crate::linalg::C64;

/// Waveguide output power after a preparation at the first trajectory time.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerTraces {
    pub times: Vec<f64>,
    /// (γ₁/4)(1 + ⟨σ_z⟩) e^{−γ₁t}, in units of ħω_a per µs.
    pub literal: Vec<f64>,
    /// γ_e⟨σ₊σ₋⟩ = γ_e(1 + ⟨σ_z⟩)/2, photons per µs into the waveguide.
    pub physical: Vec<f64>,
}

pub fn output_power_trace(traj: &Trajectory, spec: &SystemSpec) -> Result<PowerTraces> {
    let sz = traj
        .real_series("sigma_z")
        .ok_or_else(|| Error::InsufficientData("trajectory does not record sigma_z".into()))?;
    let t0 = traj.times.first().copied().unwrap_or(0.0);
    let literal = traj
        .times
        .iter()
        .zip(&sz)
        .map(|(t, z)| 0.25 * spec.gamma_1 * (1.0 + z) * (-spec.gamma_1 * (t - t0)).exp())
        .collect();
    let physical = sz.iter().map(|z| 0.5 * spec.gamma_e * (1.0 + z)).collect();
    Ok(PowerTraces { times: traj.times.clone(), literal, physical })
}

/// Emitted field in arbitrary units: the prefactor ħ/φ_p is set to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldTrace {
    pub times: Vec<f64>,
    /// iγ₁⟨σ₋⟩e^{ik|x|} in the drive frame.
    pub field: Vec<C64>,
    /// √(γ_e/2)⟨σ₋⟩
    pub b_out: Vec<C64>,
    /// ⟨σ_y⟩ ≡ Im⟨σ₋⟩
    pub sigma_y: Vec<f64>,
    pub prefactor: f64,
}

/// `kx` is the propagation phase k|x| in radians.
pub fn output_field_trace(traj: &Trajectory, spec: &SystemSpec, kx: f64) -> Result<FieldTrace> {
    let sm = traj
        .series("sigma_minus")
        .ok_or_else(|| Error::InsufficientData("trajectory does not record sigma_minus".into()))?;
    let phase = C64::new(0.0, 1.0) * C64::from_polar(1.0, kx) * spec.gamma_1;
    let scale = (0.5 * spec.gamma_e).sqrt();
    Ok(FieldTrace {
        times: traj.times.clone(),
        field: sm.iter().map(|s| phase * s).collect(),
        b_out: sm.iter().map(|s| s * scale).collect(),
        sigma_y: sm.iter().map(|s| s.im).collect(),
        prefactor: spec.gamma_1,
    })
}

//! Truncated atom⊗cavity Hilbert space, its operators, and the physical
//! parameter set.
//!
//! Units: every frequency, rate and coupling is an angular value in rad/µs,
//! i.e. a quoted "X MHz" in the 2π·MHz convention is stored as `2π·X`. Time is
//! in µs. Basis order is atom slowest (|g⟩, |e⟩) and cavity Fock index fastest,
//! so the state |s, n⟩ lives at index `s·N_c + n`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ONE};

/// Angular frequency (rad/µs) from a value in MHz.
#[inline]
pub fn mhz(f: f64) -> f64 {
    TAU * f
}

/// MHz from an angular frequency in rad/µs.
#[inline]
pub fn to_mhz(w: f64) -> f64 {
    w / TAU
}

pub const ATOM_LEVELS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpec {
    cavity_levels: usize,
}

impl HilbertSpec {
    pub fn new(cavity_levels: usize) -> Result<Self> {
        if cavity_levels < 2 {
            return Err(Error::InvalidSpace(format!(
                "cavity truncation must be at least 2 levels, got {cavity_levels}"
            )));
        }
        Ok(Self { cavity_levels })
    }

    #[inline]
    pub fn cavity_levels(&self) -> usize {
        self.cavity_levels
    }

    #[inline]
    pub fn atom_levels(&self) -> usize {
        ATOM_LEVELS
    }

    #[inline]
    pub fn dim(&self) -> usize {
        ATOM_LEVELS * self.cavity_levels
    }

    /// Index of |atom, n⟩ with atom 0 = g, 1 = e.
    #[inline]
    pub fn index(&self, atom: usize, n: usize) -> usize {
        atom * self.cavity_levels + n
    }
}

/// An operator on the full truncated space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: HilbertSpec,
    mat: CMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpec, mat: CMatrix) -> Result<Self> {
        if mat.dim() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: mat.dim() });
        }
        if !mat.is_finite() {
            return Err(Error::InvalidSpec("operator has non-finite entries".into()));
        }
        Ok(Self { space, mat })
    }

    /// `atom ⊗ cavity` with the factor dimensions checked against `space`.
    pub fn from_factors(space: HilbertSpec, atom: &CMatrix, cavity: &CMatrix) -> Result<Self> {
        if atom.dim() != ATOM_LEVELS {
            return Err(Error::DimensionMismatch { expected: ATOM_LEVELS, got: atom.dim() });
        }
        if cavity.dim() != space.cavity_levels() {
            return Err(Error::DimensionMismatch {
                expected: space.cavity_levels(),
                got: cavity.dim(),
            });
        }
        Self::new(space, tensor(atom, cavity))
    }

    pub fn identity(space: HilbertSpec) -> Self {
        Self { space, mat: CMatrix::identity(space.dim()) }
    }

    pub fn zeros(space: HilbertSpec) -> Self {
        Self { space, mat: CMatrix::zeros(space.dim()) }
    }

    #[inline]
    pub fn space(&self) -> HilbertSpec {
        self.space
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space, mat: self.mat.adjoint() }
    }

    pub fn mul(&self, rhs: &Operator) -> Self {
        Self { space: self.space, mat: self.mat.matmul(&rhs.mat) }
    }

    pub fn add(&self, rhs: &Operator) -> Self {
        Self { space: self.space, mat: self.mat.add(&rhs.mat) }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_c(C64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self { space: self.space, mat: self.mat.scale(s) }
    }

    pub fn add_scaled(&mut self, rhs: &Operator, s: C64) {
        self.mat.add_scaled(&rhs.mat, s);
    }

    pub fn commutator(&self, rhs: &Operator) -> Self {
        Self { space: self.space, mat: self.mat.commutator(&rhs.mat) }
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.mat.hermiticity_deviation()
    }
}

impl std::ops::Index<(usize, usize)> for Operator {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.mat[idx]
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

/// Single-factor matrices.
pub mod factor {
    use super::*;

    /// Cavity annihilation operator on `n` Fock levels.
    pub fn annihilation(n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n);
        for k in 1..n {
            m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
        }
        m
    }

    /// σ₋ = |g⟩⟨e| with g at index 0.
    pub fn sigma_minus() -> CMatrix {
        let mut m = CMatrix::zeros(2);
        m[(0, 1)] = ONE;
        m
    }

    /// σ_z = |e⟩⟨e| − |g⟩⟨g|.
    pub fn sigma_z() -> CMatrix {
        CMatrix::from_diagonal(&[-ONE, ONE])
    }
}

/// The six standard operators on a given space.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub a: Operator,
    pub a_dag: Operator,
    pub sigma_minus: Operator,
    pub sigma_plus: Operator,
    pub sigma_z: Operator,
    pub identity: Operator,
}

impl OperatorSet {
    /// a†a
    pub fn number(&self) -> Operator {
        self.a_dag.mul(&self.a)
    }

    /// σ₊σ₋ = |e⟩⟨e|
    pub fn excited_projector(&self) -> Operator {
        self.sigma_plus.mul(&self.sigma_minus)
    }

    /// σ_x = σ₊ + σ₋
    pub fn sigma_x(&self) -> Operator {
        self.sigma_plus.add(&self.sigma_minus)
    }
}

pub fn build_operators(space: HilbertSpec) -> Result<OperatorSet> {
    // re-validate so a hand-built spec cannot slip through
    let space = HilbertSpec::new(space.cavity_levels())?;
    let n = space.cavity_levels();
    let id_a = CMatrix::identity(2);
    let id_c = CMatrix::identity(n);
    let a = Operator::from_factors(space, &id_a, &factor::annihilation(n))?;
    let sm = Operator::from_factors(space, &factor::sigma_minus(), &id_c)?;
    let sz = Operator::from_factors(space, &factor::sigma_z(), &id_c)?;
    Ok(OperatorSet {
        a_dag: a.adjoint(),
        a,
        sigma_plus: sm.adjoint(),
        sigma_minus: sm,
        sigma_z: sz,
        identity: Operator::identity(space),
    })
}

/// How the pure-dephasing dissipator is normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DephasingConvention {
    /// Coefficient γ_φ/4 on D(σ_z) with D(A)ρ = 2AρA† − {A†A, ρ}: the atomic
    /// coherence decays at γ₂ = γ₁/2 + γ_φ.
    #[default]
    Rates,
    /// Coefficient γ_φ on D(σ_z) exactly as the generator is usually printed:
    /// coherence decays at γ₁/2 + 4γ_φ.
    Literal,
}

impl DephasingConvention {
    /// Prefactor multiplying D(σ_z).
    pub fn coefficient(self, gamma_phi: f64) -> f64 {
        match self {
            DephasingConvention::Rates => gamma_phi / 4.0,
            DephasingConvention::Literal => gamma_phi,
        }
    }
}

/// Full physical parameter set (angular units, rad/µs).
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    /// Atom transition frequency ω_a.
    pub omega_a: f64,
    /// Cavity frequency ω_c.
    pub omega_c: f64,
    /// Drive frequency ω_d; defines the rotating frame.
    pub omega_d: f64,
    /// Cavity pump frequency ω_pc.
    pub omega_pc: f64,
    pub gamma_1: f64,
    pub gamma_phi: f64,
    /// Radiative decay into the waveguide.
    pub gamma_e: f64,
    pub kappa: f64,
    pub g_c: f64,
    /// Rabi drive Ω applied directly to the atom.
    pub rabi: f64,
    /// Cavity-port drive amplitude Ω_c.
    pub port_drive: f64,
    /// Phase of both drive terms, radians.
    pub drive_phase: f64,
    /// Cavity pump amplitude.
    pub pump_amp: f64,
    /// Mean thermal photon number of the cavity bath.
    pub n_th: f64,
    pub dephasing: DephasingConvention,
    pub hilbert: HilbertSpec,
}

/// Default cavity truncation for vacuum-cavity scenarios.
pub const VACUUM_CAVITY_LEVELS: usize = 12;
/// Default cavity truncation for pumped-cavity scenarios.
pub const PUMPED_CAVITY_LEVELS: usize = 24;

impl Default for SystemSpec {
    /// The device parameter table, drive resonant with the atom and all drives off.
    fn default() -> Self {
        let omega_a = mhz(6814.0);
        let omega_c = mhz(6777.0);
        Self {
            omega_a,
            omega_c,
            omega_d: omega_a,
            omega_pc: omega_c,
            gamma_1: mhz(3.6),
            gamma_phi: mhz(1.0),
            gamma_e: mhz(3.5),
            kappa: mhz(1.5),
            g_c: mhz(7.5),
            rabi: 0.0,
            port_drive: 0.0,
            drive_phase: 0.0,
            pump_amp: 0.0,
            n_th: 0.0,
            dephasing: DephasingConvention::Rates,
            hilbert: HilbertSpec { cavity_levels: VACUUM_CAVITY_LEVELS },
        }
    }
}

impl SystemSpec {
    /// Δ_a = ω_a − ω_d
    pub fn delta_a(&self) -> f64 {
        self.omega_a - self.omega_d
    }

    /// Δ_c = ω_c − ω_d
    pub fn delta_c(&self) -> f64 {
        self.omega_c - self.omega_d
    }

    /// Δ₀ = ω_a − ω_c
    pub fn delta_0(&self) -> f64 {
        self.omega_a - self.omega_c
    }

    /// γ₂ = γ₁/2 + γ_φ
    pub fn gamma_2(&self) -> f64 {
        self.gamma_1 / 2.0 + self.gamma_phi
    }

    /// Pump detuning from the drive, ω_pc − ω_d.
    pub fn pump_detuning(&self) -> f64 {
        self.omega_pc - self.omega_d
    }

    pub fn with_rabi(mut self, rabi: f64) -> Self {
        self.rabi = rabi;
        self
    }

    pub fn with_cavity_levels(mut self, levels: usize) -> Result<Self> {
        self.hilbert = HilbertSpec::new(levels)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_a", self.omega_a),
            ("omega_c", self.omega_c),
            ("omega_d", self.omega_d),
            ("omega_pc", self.omega_pc),
            ("gamma_1", self.gamma_1),
            ("gamma_phi", self.gamma_phi),
            ("gamma_e", self.gamma_e),
            ("kappa", self.kappa),
            ("g_c", self.g_c),
            ("rabi", self.rabi),
            ("port_drive", self.port_drive),
            ("drive_phase", self.drive_phase),
            ("pump_amp", self.pump_amp),
            ("n_th", self.n_th),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidSpec(format!("{name} is not finite")));
            }
        }
        for (name, v) in [
            ("gamma_1", self.gamma_1),
            ("gamma_phi", self.gamma_phi),
            ("gamma_e", self.gamma_e),
            ("kappa", self.kappa),
            ("n_th", self.n_th),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidSpec(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.gamma_e > self.gamma_1 * (1.0 + 1e-12) {
            return Err(Error::InvalidSpec(format!(
                "gamma_e ({}) exceeds gamma_1 ({})",
                self.gamma_e, self.gamma_1
            )));
        }
        HilbertSpec::new(self.hilbert.cavity_levels())?;
        Ok(())
    }
}

/// Smallest |Δ_c| accepted by [`displace_frame`], rad/µs.
pub const DEFAULT_PORT_DETUNING_FLOOR: f64 = TAU * 0.1;

/// Moves the cavity-port drive onto the atom: Ω_c → 0 and Ω += −g_c Ω_c/Δ_c.
pub fn displace_frame(spec: &SystemSpec) -> Result<SystemSpec> {
    displace_frame_with_floor(spec, DEFAULT_PORT_DETUNING_FLOOR)
}

pub fn displace_frame_with_floor(spec: &SystemSpec, floor: f64) -> Result<SystemSpec> {
    spec.validate()?;
    let mut out = spec.clone();
    if spec.port_drive == 0.0 {
        return Ok(out);
    }
    let dc = spec.delta_c();
    if dc.abs() < floor {
        return Err(Error::ResonantPortDrive { detuning: dc.abs(), floor });
    }
    // both drive terms share drive_phase, so the amplitudes add directly
    out.rabi = spec.rabi - spec.g_c * spec.port_drive / dc;
    out.port_drive = 0.0;
    Ok(out)
}

/// Exact displacement a → a + α with the damped coherent amplitude
/// α = −(Ω_c/2)e^{iφ}/(Δ_c − iκ/2). The atom drive picks up 2g_cα, so the
/// new amplitude and phase follow from Ω e^{iφ} − g_cΩ_c e^{iφ}/(Δ_c − iκ/2).
/// Reduces to [`displace_frame`] at κ = 0.
pub fn displace_frame_exact(spec: &SystemSpec) -> Result<SystemSpec> {
    spec.validate()?;
    let mut out = spec.clone();
    if spec.port_drive == 0.0 {
        return Ok(out);
    }
    let dc = spec.delta_c();
    if dc.abs() < DEFAULT_PORT_DETUNING_FLOOR {
        return Err(Error::ResonantPortDrive { detuning: dc.abs(), floor: DEFAULT_PORT_DETUNING_FLOOR });
    }
    let total = C64::new(spec.rabi, 0.0) - spec.g_c * spec.port_drive / C64::new(dc, -0.5 * spec.kappa);
    out.rabi = total.norm();
    out.drive_phase = spec.drive_phase + total.arg();
    out.port_drive = 0.0;
    Ok(out)
}

/// Port-drive amplitude Ω_c that produces atom drive `rabi` under [`displace_frame`].
pub fn port_drive_for_rabi(spec: &SystemSpec, rabi: f64) -> Result<f64> {
    let dc = spec.delta_c();
    if dc.abs() < DEFAULT_PORT_DETUNING_FLOOR {
        return Err(Error::ResonantPortDrive { detuning: dc.abs(), floor: DEFAULT_PORT_DETUNING_FLOOR });
    }
    if spec.g_c == 0.0 {
        return Err(Error::InvalidSpec("port drive cannot reach a decoupled atom (g_c = 0)".into()));
    }
    Ok(-rabi * dc / spec.g_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn space(n: usize) -> HilbertSpec {
        HilbertSpec::new(n).unwrap()
    }

    #[test]
    fn rejects_short_truncation() {
        assert!(HilbertSpec::new(1).is_err());
        assert!(HilbertSpec::new(0).is_err());
    }

    #[test]
    fn number_operator_two_levels() {
        let ops = build_operators(space(2)).unwrap();
        let n = ops.number();
        let diag: Vec<f64> = (0..4).map(|i| n[(i, i)].re).collect();
        assert_eq!(diag, vec![0.0, 1.0, 0.0, 1.0]);
        let mut sorted = diag.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted, vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(n.matrix().sub(&CMatrix::from_diagonal(&diag.iter().map(|&d| C64::new(d, 0.0)).collect::<Vec<_>>())).max_abs(), 0.0);
    }

    #[test]
    fn sigma_anticommutator_is_identity() {
        let ops = build_operators(space(3)).unwrap();
        let anti = ops.sigma_plus.mul(&ops.sigma_minus).add(&ops.sigma_minus.mul(&ops.sigma_plus));
        assert_eq!(anti, ops.identity);
    }

    #[test]
    fn bosonic_commutator_has_truncation_corner() {
        // hand expansion: (a a†)_{kk} = k+1 for k < N-1 and 0 at the top;
        // (a† a)_{kk} = k, so [a, a†]_{kk} = 1 except the corner = −(N−1).
        let n = 4;
        let a = factor::annihilation(n);
        let comm = a.commutator(&a.adjoint());
        for i in 0..n {
            for j in 0..n {
                let expected = if i != j {
                    0.0
                } else if i == n - 1 {
                    -((n - 1) as f64)
                } else {
                    1.0
                };
                assert!((comm[(i, j)] - C64::new(expected, 0.0)).norm() < 1e-12, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn sigma_z_tensor_layout() {
        let op = Operator::from_factors(space(3), &factor::sigma_z(), &CMatrix::identity(3)).unwrap();
        let diag: Vec<f64> = (0..6).map(|i| op[(i, i)].re).collect();
        assert_eq!(diag, vec![-1.0, -1.0, -1.0, 1.0, 1.0, 1.0]);
        assert_eq!(op.matrix().trace(), ZERO);
    }

    #[test]
    fn from_factors_checks_dimensions() {
        let err = Operator::from_factors(space(3), &CMatrix::identity(2), &CMatrix::identity(4));
        assert!(matches!(err, Err(Error::DimensionMismatch { expected: 3, got: 4 })));
        let err = Operator::from_factors(space(3), &CMatrix::identity(3), &CMatrix::identity(3));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn displacement_with_zero_port_drive_is_identity() {
        let spec = SystemSpec::default();
        assert_eq!(displace_frame(&spec).unwrap(), spec);
    }

    #[test]
    fn displacement_at_device_point() {
        // g_c = 7.5, Δ_c = −37 → Ω_c = 37·37/7.5 = 182.53 MHz (182.5 to the quoted digits)
        let spec = SystemSpec::default();
        assert!((to_mhz(spec.delta_c()) + 37.0).abs() < 1e-9);
        let port = port_drive_for_rabi(&spec, mhz(37.0)).unwrap();
        assert!((to_mhz(port) - 37.0 * 37.0 / 7.5).abs() < 1e-9);
        assert!((to_mhz(port) - 182.5).abs() < 0.05);
        let mut driven = spec.clone();
        driven.port_drive = port;
        let displaced = displace_frame(&driven).unwrap();
        assert_eq!(displaced.port_drive, 0.0);
        assert!((to_mhz(displaced.rabi) - 37.0).abs() < 1e-9);
        let mut rest = displaced.clone();
        rest.rabi = spec.rabi;
        rest.port_drive = spec.port_drive;
        assert_eq!(rest, spec);
    }

    #[test]
    fn displacement_rejects_resonant_port() {
        let mut spec = SystemSpec::default();
        spec.omega_d = spec.omega_c + mhz(0.05);
        spec.port_drive = mhz(10.0);
        assert!(matches!(displace_frame(&spec), Err(Error::ResonantPortDrive { .. })));
    }

    #[test]
    fn spec_validation() {
        let mut spec = SystemSpec::default();
        assert!(spec.validate().is_ok());
        assert!((to_mhz(spec.gamma_2()) - 2.8).abs() < 1e-12);
        spec.gamma_e = spec.gamma_1 * 2.0;
        assert!(spec.validate().is_err());
        let mut spec = SystemSpec::default();
        spec.kappa = -1.0;
        assert!(spec.validate().is_err());
    }
}

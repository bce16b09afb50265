use crate::error::Result;
use crate::hilbert::{build_operators, Operator, SystemSpec};
use crate::linalg::{CMatrix, CsrMatrix, C64, I, ONE, ZERO};

/// `H(t) = H₀ + X e^{iδt} + X† e^{−iδt}` in the frame rotating at ω_d.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub static_part: Operator,
    pub periodic: Option<PeriodicTerm>,
}

#[derive(Clone, Debug)]
pub struct PeriodicTerm {
    /// X in `X e^{iδt} + h.c.`
    pub coupling: Operator,
    /// δ = ω_pc − ω_d
    pub angular_freq: f64,
}

pub fn build_hamiltonian(spec: &SystemSpec) -> Result<Hamiltonian> {
    spec.validate()?;
    let ops = build_operators(spec.hilbert)?;
    let phase = C64::from_polar(1.0, spec.drive_phase);

    let mut h = ops.number().scale(spec.delta_c());
    h.add_scaled(&ops.sigma_z, C64::new(spec.delta_a() / 2.0, 0.0));
    let jc = ops.a_dag.mul(&ops.sigma_minus).add(&ops.a.mul(&ops.sigma_plus));
    h.add_scaled(&jc, C64::new(spec.g_c, 0.0));
    if spec.rabi != 0.0 {
        h.add_scaled(&ops.sigma_plus, phase * (spec.rabi / 2.0));
        h.add_scaled(&ops.sigma_minus, phase.conj() * (spec.rabi / 2.0));
    }
    if spec.port_drive != 0.0 {
        h.add_scaled(&ops.a_dag, phase * (spec.port_drive / 2.0));
        h.add_scaled(&ops.a, phase.conj() * (spec.port_drive / 2.0));
    }

    let periodic = (spec.pump_amp != 0.0).then(|| PeriodicTerm {
        coupling: ops.a.scale(spec.pump_amp / 2.0),
        angular_freq: spec.pump_detuning(),
    });
    Ok(Hamiltonian { static_part: h, periodic })
}

/// One time-periodic piece of the generator, `e^{iωt}·S`.
#[derive(Clone, Debug)]
pub struct Modulation {
    pub generator: CsrMatrix,
    pub angular_freq: f64,
}

/// Vectorized Lindblad generator acting on row-major `vec(ρ)`, index `i·d + j`.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    dim: usize,
    pub generator: CsrMatrix,
    pub modulation: Vec<Modulation>,
}

impl Liouvillian {
    pub fn new(dim: usize, generator: CsrMatrix, modulation: Vec<Modulation>) -> Self {
        assert_eq!(generator.dim(), dim * dim);
        Self { dim, generator, modulation }
    }

    /// Hilbert-space dimension d (the superoperator is d²×d²).
    #[inline]
    pub fn hilbert_dim(&self) -> usize {
        self.dim
    }

    pub fn is_static(&self) -> bool {
        self.modulation.is_empty()
    }

    /// Period of the modulation, if any.
    pub fn period(&self) -> Option<f64> {
        let w = self
            .modulation
            .iter()
            .map(|m| m.angular_freq.abs())
            .filter(|w| *w > 0.0)
            .fold(0.0, f64::max);
        (w > 0.0).then(|| std::f64::consts::TAU / w)
    }

    /// Drops the periodic part.
    pub fn static_part(&self) -> Liouvillian {
        Liouvillian { dim: self.dim, generator: self.generator.clone(), modulation: Vec::new() }
    }

    /// out = L(t) x
    pub fn apply(&self, t: f64, x: &[C64], out: &mut [C64]) {
        out.fill(ZERO);
        self.generator.mul_add(x, ONE, out);
        for m in &self.modulation {
            m.generator.mul_add(x, C64::from_polar(1.0, m.angular_freq * t), out);
        }
    }

    pub fn dense_static(&self) -> faer::Mat<C64> {
        self.generator.to_dense()
    }

    /// max |L₀ vec(ρ)|
    pub fn residual(&self, rho: &CMatrix) -> f64 {
        crate::linalg::max_abs(&self.generator.mul(rho.as_slice()))
    }
}

/// Accumulates superoperator entries for terms `c·AρB`.
pub(crate) struct SuperBuilder {
    d: usize,
    triplets: Vec<(usize, usize, C64)>,
}

fn nonzeros(m: &CMatrix) -> Vec<(usize, usize, C64)> {
    let d = m.dim();
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let v = m[(i, j)];
            if v != ZERO {
                out.push((i, j, v));
            }
        }
    }
    out
}

impl SuperBuilder {
    pub fn new(d: usize) -> Self {
        Self { d, triplets: Vec::new() }
    }

    /// c·Aρ
    pub fn left(&mut self, a: &CMatrix, c: C64) {
        let d = self.d;
        for (i, k, v) in nonzeros(a) {
            for j in 0..d {
                self.triplets.push((i * d + j, k * d + j, c * v));
            }
        }
    }

    /// c·ρB
    pub fn right(&mut self, b: &CMatrix, c: C64) {
        let d = self.d;
        for (l, j, v) in nonzeros(b) {
            for i in 0..d {
                self.triplets.push((i * d + j, i * d + l, c * v));
            }
        }
    }

    /// c·AρB
    pub fn sandwich(&mut self, a: &CMatrix, b: &CMatrix, c: C64) {
        let d = self.d;
        let bn = nonzeros(b);
        for (i, k, av) in nonzeros(a) {
            for &(l, j, bv) in &bn {
                self.triplets.push((i * d + j, k * d + l, c * av * bv));
            }
        }
    }

    /// −i[H, ρ]
    pub fn hamiltonian(&mut self, h: &CMatrix) {
        self.left(h, -I);
        self.right(h, I);
    }

    /// c·D(A)ρ with D(A)ρ = 2AρA† − A†Aρ − ρA†A.
    pub fn dissipator(&mut self, a: &CMatrix, c: f64) {
        if c == 0.0 {
            return;
        }
        let ad = a.adjoint();
        let ada = ad.matmul(a);
        self.sandwich(a, &ad, C64::new(2.0 * c, 0.0));
        self.left(&ada, C64::new(-c, 0.0));
        self.right(&ada, C64::new(-c, 0.0));
    }

    pub fn finish(self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.d * self.d, self.triplets)
    }
}

/// L[ρ] = −i[H,ρ] + (γ₁/2)D(σ₋)ρ + c_φ D(σ_z)ρ + (κ(n_th+1)/2)D(a)ρ + (κ n_th/2)D(a†)ρ,
/// with c_φ set by `SystemSpec::dephasing`.
pub fn build_liouvillian(h: &Hamiltonian, spec: &SystemSpec) -> Result<Liouvillian> {
    spec.validate()?;
    let ops = build_operators(spec.hilbert)?;
    let d = spec.hilbert.dim();

    let mut sb = SuperBuilder::new(d);
    sb.hamiltonian(h.static_part.matrix());
    sb.dissipator(ops.sigma_minus.matrix(), spec.gamma_1 / 2.0);
    sb.dissipator(ops.sigma_z.matrix(), spec.dephasing.coefficient(spec.gamma_phi));
    sb.dissipator(ops.a.matrix(), spec.kappa * (spec.n_th + 1.0) / 2.0);
    sb.dissipator(ops.a_dag.matrix(), spec.kappa * spec.n_th / 2.0);
    let generator = sb.finish();

    let mut modulation = Vec::new();
    if let Some(p) = &h.periodic {
        for (x, w) in [
            (p.coupling.matrix().clone(), p.angular_freq),
            (p.coupling.matrix().adjoint(), -p.angular_freq),
        ] {
            let mut sb = SuperBuilder::new(d);
            sb.hamiltonian(&x);
            modulation.push(Modulation { generator: sb.finish(), angular_freq: w });
        }
    }
    Ok(Liouvillian::new(d, generator, modulation))
}

/// Hamiltonian and generator in one call.
pub fn build_system(spec: &SystemSpec) -> Result<Liouvillian> {
    let h = build_hamiltonian(spec)?;
    build_liouvillian(&h, spec)
}

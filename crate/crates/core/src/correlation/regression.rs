use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::hilbert::Operator;
use crate::lindblad::ode::{integrate, OdeOptions};
use crate::lindblad::{right_multiply, DensityMatrix, Liouvillian};
use crate::linalg::{C64, ZERO};

/// Largest max|L ρ_ss| accepted as stationary.
pub const STATIONARITY_TOL: f64 = 1e-8;

/// ⟨A(t)B(t+τ)⟩ at stationarity on a τ grid starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTrace {
    pub tau: Vec<f64>,
    pub values: Vec<C64>,
    /// ⟨A⟩⟨B⟩, the τ → ∞ limit.
    pub asymptote: C64,
    pub normalized: bool,
}

impl CorrelationTrace {
    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

/// w with tr(B X) = Σ w_k vec(X)_k for row-major vec.
fn trace_weights(b: &Operator) -> Vec<C64> {
    let d = b.dim();
    let m = b.matrix();
    let mut w = vec![ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            w[i * d + j] = m[(j, i)];
        }
    }
    w
}

fn dot(w: &[C64], x: &[C64]) -> C64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn check_inputs(l: &Liouvillian, rho_ss: &DensityMatrix, ops: &[&Operator], tau: &[f64]) -> Result<()> {
    let d = rho_ss.space().dim();
    if l.hilbert_dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: l.hilbert_dim() });
    }
    for op in ops {
        if op.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: op.dim() });
        }
    }
    if tau.first() != Some(&0.0) {
        return Err(Error::InvalidGrid("τ grid must start at 0".into()));
    }
    if tau.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("τ grid must be strictly increasing".into()));
    }
    if !l.is_static() {
        return Err(Error::TimeDependentGenerator);
    }
    let residual = l.residual(rho_ss.matrix());
    if !(residual <= STATIONARITY_TOL) {
        return Err(Error::NotStationary { residual });
    }
    Ok(())
}

/// tr[B e^{Lτ}(ρ_ss A)] by propagating the vectorized initial condition.
pub fn two_time_correlation(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    a: &Operator,
    b: &Operator,
    tau: &[f64],
) -> Result<CorrelationTrace> {
    two_time_correlation_with(l, rho_ss, a, b, tau, &OdeOptions::default())
}

pub fn two_time_correlation_with(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    a: &Operator,
    b: &Operator,
    tau: &[f64],
    ode: &OdeOptions,
) -> Result<CorrelationTrace> {
    check_inputs(l, rho_ss, &[a, b], tau)?;
    let x0 = right_multiply(rho_ss, a).into_vec();
    let w = trace_weights(b);
    let mut values = Vec::with_capacity(tau.len());
    integrate(|t, x, out| l.apply(t, x, out), tau, x0, ode, |_, _, x| {
        values.push(dot(&w, x));
        Ok(())
    })?;
    Ok(CorrelationTrace { tau: tau.to_vec(), values, asymptote: rho_ss.expect(a) * rho_ss.expect(b), normalized: false })
}

/// g¹(τ): the trace divided by its τ = 0 value.
pub fn g1(trace: &CorrelationTrace) -> Result<CorrelationTrace> {
    let v0 = *trace.values.first().ok_or_else(|| Error::InvalidGrid("empty trace".into()))?;
    let scale = trace.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(v0.norm() > 1e-14 * scale.max(1e-300)) || v0.norm() < 1e-300 {
        return Err(Error::ZeroCoincidence);
    }
    Ok(CorrelationTrace {
        tau: trace.tau.clone(),
        values: trace.values.iter().map(|v| v / v0).collect(),
        asymptote: trace.asymptote / v0,
        normalized: true,
    })
}

/// Eigendecomposition L = V Λ V⁻¹ of a static generator.
pub struct LiouvillianModes {
    lambda: Vec<C64>,
    vectors: Mat<C64>,
    lu: faer::linalg::solvers::PartialPivLu<C64>,
}

/// g(τ) = Σ_k c_k e^{λ_k τ}.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeExpansion {
    pub terms: Vec<(C64, C64)>,
    /// Index of the stationary mode (smallest |λ|).
    pub stationary: usize,
}

impl LiouvillianModes {
    pub fn new(l: &Liouvillian) -> Result<Self> {
        if !l.is_static() {
            return Err(Error::TimeDependentGenerator);
        }
        let evd = l.dense_static().eigen().map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        let n = l.hilbert_dim().pow(2);
        let lambda: Vec<C64> = (0..n).map(|i| evd.S().column_vector()[i]).collect();
        let vectors = evd.U().to_owned();
        let lu = vectors.partial_piv_lu();
        Ok(Self { lambda, vectors, lu })
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.lambda
    }

    /// Smallest decay rate among the non-stationary modes.
    pub fn slowest_decay(&self) -> f64 {
        let mut re: Vec<f64> = self.lambda.iter().map(|l| -l.re).collect();
        re.sort_by(f64::total_cmp);
        re.get(1).copied().unwrap_or(0.0)
    }

    pub fn correlation(&self, rho_ss: &DensityMatrix, a: &Operator, b: &Operator) -> Result<ModeExpansion> {
        let d = rho_ss.space().dim();
        if self.lambda.len() != d * d || a.dim() != d || b.dim() != d {
            return Err(Error::DimensionMismatch { expected: self.lambda.len(), got: d * d });
        }
        let x0 = right_multiply(rho_ss, a).into_vec();
        let rhs = Mat::from_fn(d * d, 1, |i, _| x0[i]);
        let coeff = self.lu.solve(&rhs);
        let w = trace_weights(b);
        let n = d * d;
        let terms = (0..n)
            .map(|k| {
                let left: C64 = (0..n).map(|i| w[i] * self.vectors[(i, k)]).sum();
                (self.lambda[k], left * coeff[(k, 0)])
            })
            .collect::<Vec<_>>();
        let stationary = (0..n).min_by(|&i, &j| self.lambda[i].norm().total_cmp(&self.lambda[j].norm())).unwrap();
        Ok(ModeExpansion { terms, stationary })
    }
}

impl ModeExpansion {
    pub fn eval(&self, tau: f64) -> C64 {
        self.terms.iter().map(|(l, c)| c * (l * tau).exp()).sum()
    }

    pub fn trace(&self, tau: &[f64], asymptote: C64) -> CorrelationTrace {
        CorrelationTrace { tau: tau.to_vec(), values: tau.iter().map(|t| self.eval(*t)).collect(), asymptote, normalized: false }
    }

    /// π⁻¹ Re ∫₀^∞ g(τ) e^{iωτ} dτ with the stationary mode removed.
    pub fn incoherent_density(&self, omega: f64) -> f64 {
        let s: C64 = self
            .terms
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != self.stationary)
            .map(|(_, (l, c))| c / (-l - C64::new(0.0, omega)))
            .sum();
        s.re / std::f64::consts::PI
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_operators, mhz, SystemSpec};
    use crate::lindblad::{build_system, steady_state};

    fn atom(rabi_mhz: f64, detuning_mhz: f64) -> SystemSpec {
        let mut spec = SystemSpec::default().with_cavity_levels(2).unwrap();
        spec.g_c = 0.0;
        spec.rabi = mhz(rabi_mhz);
        spec.omega_d = spec.omega_a - mhz(detuning_mhz);
        spec
    }

    /// Weak-drive two-level regression: the coherence obeys
    /// d⟨σ₋⟩/dτ = −(γ₂ + iΔ_a)⟨σ₋⟩ to first order in Ω.
    #[test]
    fn weak_drive_decays_at_gamma_2() {
        let spec = atom(0.01, 3.0);
        let l = build_system(&spec).unwrap();
        let rho = steady_state(&l, spec.hilbert).unwrap();
        let ops = build_operators(spec.hilbert).unwrap();
        let tau: Vec<f64> = (0..200).map(|k| k as f64 * 0.002).collect();
        let c = two_time_correlation(&l, &rho, &ops.sigma_plus, &ops.sigma_minus, &tau).unwrap();
        let inc0 = c.values[0] - c.asymptote;
        for (t, v) in tau.iter().zip(&c.values) {
            let want = inc0 * (C64::new(-spec.gamma_2(), -spec.delta_a()) * *t).exp();
            assert!(((v - c.asymptote) - want).norm() < 1e-3 * inc0.norm().max(c.asymptote.norm()), "τ={t}");
        }
    }

    #[test]
    fn coincidence_and_factorization_limits() {
        let spec = atom(14.5, 0.0);
        let l = build_system(&spec).unwrap();
        let rho = steady_state(&l, spec.hilbert).unwrap();
        let ops = build_operators(spec.hilbert).unwrap();
        let slowest = spec.gamma_2().min(spec.gamma_1);
        let tau = vec![0.0, 5.0 / slowest, 10.0 / slowest, 20.0 / slowest];
        let c = two_time_correlation(&l, &rho, &ops.sigma_plus, &ops.sigma_minus, &tau).unwrap();
        let coincidence = rho.expect(&ops.sigma_plus.mul(&ops.sigma_minus));
        assert!((c.values[0] - coincidence).norm() < 1e-12);
        let asym = rho.expect(&ops.sigma_plus) * rho.expect(&ops.sigma_minus);
        assert!((c.values[3] - asym).norm() <= 1e-6 * asym.norm());
    }

    #[test]
    fn regression_matches_eigen_expansion() {
        let mut spec = SystemSpec::default().with_cavity_levels(4).unwrap();
        spec.rabi = mhz(20.0);
        let l = build_system(&spec).unwrap();
        let rho = steady_state(&l, spec.hilbert).unwrap();
        let ops = build_operators(spec.hilbert).unwrap();
        let tau: Vec<f64> = (0..300).map(|k| k as f64 * 0.003).collect();
        let qrt = two_time_correlation(&l, &rho, &ops.sigma_plus, &ops.sigma_minus, &tau).unwrap();
        let modes = LiouvillianModes::new(&l).unwrap();
        let exp = modes.correlation(&rho, &ops.sigma_plus, &ops.sigma_minus).unwrap();
        assert!((exp.terms[exp.stationary].1 - qrt.asymptote).norm() < 1e-8);
        for (t, v) in tau.iter().zip(&qrt.values) {
            assert!((exp.eval(*t) - v).norm() < 1e-7, "τ={t}");
        }
    }

    #[test]
    fn g1_normalizes_and_rejects_dark_atom() {
        let spec = atom(14.5, 0.0);
        let l = build_system(&spec).unwrap();
        let rho = steady_state(&l, spec.hilbert).unwrap();
        let ops = build_operators(spec.hilbert).unwrap();
        let tau = [0.0, 0.01, 0.02];
        let c = two_time_correlation(&l, &rho, &ops.sigma_plus, &ops.sigma_minus, &tau).unwrap();
        let g = g1(&c).unwrap();
        assert_eq!(g.values[0], C64::new(1.0, 0.0));
        assert!(g.normalized);

        let dark = atom(0.0, 0.0);
        let l = build_system(&dark).unwrap();
        let rho = steady_state(&l, dark.hilbert).unwrap();
        let c = two_time_correlation(&l, &rho, &ops.sigma_plus, &ops.sigma_minus, &tau).unwrap();
        assert!(matches!(g1(&c), Err(Error::ZeroCoincidence)));
    }

    #[test]
    fn non_stationary_state_rejected() {
        let spec = atom(14.5, 0.0);
        let l = build_system(&spec).unwrap();
        let ops = build_operators(spec.hilbert).unwrap();
        let ground = DensityMatrix::ground(spec.hilbert);
        let r = two_time_correlation(&l, &ground, &ops.sigma_plus, &ops.sigma_minus, &[0.0, 0.1]);
        assert!(matches!(r, Err(Error::NotStationary { .. })));
    }
}

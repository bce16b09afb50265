//! Closed-form doubly-dressed-state theory: energies, transition rates,
//! populations, sideband spectra and peak predictions.
//!
//! Manifold labels are signed integers: `+n` and `−n` are the two branches of
//! manifold `n ≥ 1`, `0` is the unsplit bottom state.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::hilbert::{displace_frame, SystemSpec};
use crate::lindblad::build_hamiltonian;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedParams {
    pub omega: f64,
    pub delta_a: f64,
    /// Atom–cavity detuning Δ₀ = ω_a − ω_c.
    pub delta_0: f64,
    pub g_c: f64,
    /// Atom relaxation rate γ₁; pure dephasing has no place in this branch.
    pub gamma: f64,
    pub kappa: f64,
}

impl DressedParams {
    pub fn new(omega: f64, delta_a: f64, delta_0: f64, g_c: f64, gamma: f64, kappa: f64) -> Result<Self> {
        let p = Self { omega, delta_a, delta_0, g_c, gamma, kappa };
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidSpec(format!("dressed theory needs Ω > 0, got {omega}")));
        }
        if p.delta().abs() >= 1.0 {
            return Err(Error::InvalidSpec(format!("|Δa/Ω| = {} must be below 1", p.delta().abs())));
        }
        if gamma < 0.0 || kappa < 0.0 || g_c < 0.0 {
            return Err(Error::InvalidSpec("rates and coupling must be non-negative".into()));
        }
        Ok(p)
    }

    /// Atom drive from the displaced frame, so a port-driven spec works too.
    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        let s = if spec.port_drive != 0.0 { displace_frame(spec)? } else { spec.clone() };
        Self::new(s.rabi.abs(), s.delta_a(), s.delta_0(), s.g_c, s.gamma_1, s.kappa)
    }

    /// δ = Δa/Ω
    pub fn delta(&self) -> f64 {
        self.delta_a / self.omega
    }

    pub fn cos2_phi(&self) -> f64 {
        0.5 - self.delta_a / (2.0 * self.omega)
    }

    pub fn sin2_phi(&self) -> f64 {
        1.0 - self.cos2_phi()
    }

    /// Ω̃ = (Ω/2)√(1+δ²)
    pub fn omega_tilde(&self) -> f64 {
        0.5 * self.omega * (1.0 + self.delta().powi(2)).sqrt()
    }

    /// g₁ = g_c cos²φ
    pub fn g1(&self) -> f64 {
        self.g_c * self.cos2_phi()
    }

    /// Offset of the sideband groups from the drive, 2Ω̃.
    pub fn sideband_offset(&self) -> f64 {
        2.0 * self.omega_tilde()
    }

    /// 2Ω̃ + Δ_c, zero when a dressed transition is resonant with the cavity.
    pub fn resonance_mismatch(&self) -> f64 {
        self.sideband_offset() - (self.delta_0 - self.delta_a)
    }

    pub fn check_resonance(&self) -> Result<()> {
        let m = self.resonance_mismatch();
        if m.abs() > 1e-6 * self.omega {
            return Err(Error::InvalidSpec(format!(
                "dressed transition off resonance with the cavity by {:.4} MHz",
                m / TAU
            )));
        }
        Ok(())
    }
}

/// E_{N,±n} = N·ω_d − (2n−1)Ω̃ ± g₁√n; no splitting for n = 0.
pub fn doubly_dressed_energy(p: &DressedParams, big_n: i64, n_signed: i64, omega_d: f64) -> f64 {
    let n = n_signed.unsigned_abs() as f64;
    let split = if n_signed == 0 { 0.0 } else { n_signed.signum() as f64 * p.g1() * n.sqrt() };
    big_n as f64 * omega_d - (2.0 * n - 1.0) * p.omega_tilde() + split
}

/// Emission offset from the drive for |N, upper⟩ → |N−1, lower⟩.
pub fn transition_offset(p: &DressedParams, upper: i64, lower: i64) -> f64 {
    doubly_dressed_energy(p, 1, upper, 0.0) - doubly_dressed_energy(p, 0, lower, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionRates {
    pub gamma: f64,
    pub kappa: f64,
}

fn branch(n_signed: i64) -> (u64, i64) {
    (n_signed.unsigned_abs(), n_signed.signum())
}

/// Rates for |N, upper⟩ → |N−1, lower⟩ via σ₊ (case table) and a† (from the
/// state vectors).
pub fn transition_rates(p: &DressedParams, upper: i64, lower: i64) -> Result<TransitionRates> {
    let (n, s) = branch(upper);
    let (m, t) = branch(lower);
    let (c2, s2) = (p.cos2_phi(), p.sin2_phi());
    let kd = |a: u64| if a == 0 { 1.0 } else { 0.0 };
    let gamma = if n == m && (n == 0 || s == -t) {
        p.gamma * s2 * c2
    } else if n == m {
        0.0
    } else if m + 1 == n {
        0.25 * p.gamma * s2 * s2 * (1.0 + kd(m))
    } else if n + 1 == m {
        0.25 * p.gamma * c2 * c2 * (1.0 + kd(n))
    } else {
        return Err(Error::UnsupportedTransition(format!("{upper} -> {lower}")));
    };
    Ok(TransitionRates { gamma, kappa: p.kappa * cavity_matrix_element(upper, lower).powi(2) })
}

/// ⟨N,upper| a† |N−1,lower⟩ from the doubly-dressed state vectors.
pub fn cavity_matrix_element(upper: i64, lower: i64) -> f64 {
    let (n, s) = branch(upper);
    let (m, t) = branch(lower);
    if n == 0 || m + 1 != n {
        return 0.0;
    }
    if m == 0 {
        return std::f64::consts::FRAC_1_SQRT_2;
    }
    0.5 * ((n as f64).sqrt() + (s * t) as f64 * (m as f64).sqrt())
}

/// One κ entry where the printed case table and the state-vector element disagree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaDiscrepancy {
    pub upper: i64,
    pub lower: i64,
    /// Table entry read as a rate, κ × entry.
    pub printed: f64,
    pub computed: f64,
}

/// Compares the printed κ table (entries taken as coefficients of κ) with
/// κ|⟨·|a†|·⟩|² for all n ≤ n_max.
pub fn kappa_table_discrepancies(p: &DressedParams, n_max: u64) -> Vec<KappaDiscrepancy> {
    let mut out = Vec::new();
    for n in 1..=n_max as i64 {
        for s in [1, -1] {
            for t in [1, -1] {
                let upper = s * n;
                let lower = if n == 1 { 0 } else { t * (n - 1) };
                if n == 1 && t == -1 {
                    continue;
                }
                let nf = n as f64;
                let printed = p.kappa
                    * if n == 1 {
                        std::f64::consts::FRAC_1_SQRT_2
                    } else if s == t {
                        0.5 * ((nf + 1.0).sqrt() + nf.sqrt())
                    } else {
                        0.5 * ((nf + 1.0).sqrt() - nf.sqrt())
                    };
                let computed = p.kappa * cavity_matrix_element(upper, lower).powi(2);
                if (printed - computed).abs() > 1e-12 * p.kappa.max(1e-300) {
                    out.push(KappaDiscrepancy { upper, lower, printed, computed });
                }
            }
        }
    }
    out
}

/// Γ_{±n}: γ/2 + κ(2n−1)/2 for n ≠ 0, γcos²φ for n = 0.
pub fn total_decay(p: &DressedParams, n: u64) -> f64 {
    if n == 0 {
        p.gamma * p.cos2_phi()
    } else {
        0.5 * p.gamma + 0.5 * p.kappa * (2.0 * n as f64 - 1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DressedPopulations {
    /// Π_n for n = 0..=n_max; Π_{−n} = Π_n.
    pub pi: Vec<f64>,
}

impl DressedPopulations {
    pub fn get(&self, n_signed: i64) -> f64 {
        self.pi.get(n_signed.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }

    /// Π₀ + 2ΣΠ_n
    pub fn total(&self) -> f64 {
        self.pi[0] + 2.0 * self.pi[1..].iter().sum::<f64>()
    }

    pub fn ratio_1_0(&self) -> f64 {
        if self.pi.len() < 2 || self.pi[0] == 0.0 {
            0.0
        } else {
            self.pi[1] / self.pi[0]
        }
    }
}

/// Π_n = Π₀ ∏_{m=1}^{n} γsin⁴φ / (γcos⁴φ + (2m−1)κ), normalized to Π₀ + 2ΣΠ_n = 1.
pub fn dressed_populations(p: &DressedParams, n_max: usize) -> DressedPopulations {
    let (c2, s2) = (p.cos2_phi(), p.sin2_phi());
    let mut pi = Vec::with_capacity(n_max + 1);
    pi.push(1.0);
    for m in 1..=n_max {
        let num = p.gamma * s2 * s2;
        let den = p.gamma * c2 * c2 + (2.0 * m as f64 - 1.0) * p.kappa;
        let r = if den > 0.0 { num / den } else { 1.0 };
        pi.push(pi[m - 1] * r);
    }
    let total = pi[0] + 2.0 * pi[1..].iter().sum::<f64>();
    for v in &mut pi {
        *v /= total;
    }
    DressedPopulations { pi }
}

/// The alternative Π₁/Π₀ = γ/(γ+2κ) stated alongside the population formula,
/// kept as a diagnostic next to [`DressedPopulations::ratio_1_0`].
pub fn alternative_population_ratio(p: &DressedParams) -> f64 {
    p.gamma / (p.gamma + 2.0 * p.kappa)
}

/// HWHM of the Lorentzians in the sideband sums for ladder index n.
pub fn sideband_linewidth(p: &DressedParams, n: u64) -> f64 {
    if n == 0 {
        0.5 * p.gamma * (0.5 + p.sin2_phi()) + 0.25 * p.kappa
    } else {
        0.5 * p.gamma + n as f64 * p.kappa
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SidebandLine {
    pub offset_mhz: f64,
    /// HWHM in rad/µs.
    pub hwhm: f64,
    pub weight: f64,
    pub n: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SidebandSpectrum {
    pub freq_mhz: Vec<f64>,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    pub right_lines: Vec<SidebandLine>,
    pub left_lines: Vec<SidebandLine>,
}

impl SidebandSpectrum {
    /// Integrated weights ∫S dω of each group (exact, from line weights).
    pub fn integrated(&self, gamma: f64) -> (f64, f64) {
        let sum = |ls: &[SidebandLine]| ls.iter().map(|l| l.weight).sum::<f64>() / gamma;
        (sum(&self.right_lines), sum(&self.left_lines))
    }

    /// Right-to-left integrated intensity.
    pub fn asymmetry(&self, gamma: f64) -> f64 {
        let (r, l) = self.integrated(gamma);
        r / l
    }
}

fn ladder_offsets(n: u64) -> Vec<f64> {
    let (a, b) = (((n + 1) as f64).sqrt(), (n as f64).sqrt());
    if n == 0 {
        vec![a, -a]
    } else {
        vec![a + b, a - b, -(a - b), -(a + b)]
    }
}

/// Right group around +2Ω̃ (weights γ_{n,n+1}Π_n) and left group around −2Ω̃
/// (weights γ_{n+1,n}Π_{n+1}), each a sum of Lorentzians
/// `(1/πγ)·w·Γ/(Δω² + Γ²)` in units of 1/(rad/µs).
pub fn analytic_sideband_spectrum(p: &DressedParams, n_max: usize, freq_mhz: &[f64]) -> Result<SidebandSpectrum> {
    p.check_resonance()?;
    if !(p.gamma > 0.0) {
        return Err(Error::InvalidSpec("analytic spectrum needs γ > 0".into()));
    }
    let pops = dressed_populations(p, n_max + 1);
    let center = p.sideband_offset();
    let mut right_lines = Vec::new();
    let mut left_lines = Vec::new();
    for n in 0..=n_max as u64 {
        let hw = sideband_linewidth(p, n);
        let up = transition_rates(p, n as i64, n as i64 + 1)?.gamma * pops.get(n as i64);
        let down = transition_rates(p, n as i64 + 1, n as i64)?.gamma * pops.get(n as i64 + 1);
        for o in ladder_offsets(n) {
            let shift = o * p.g1();
            right_lines.push(SidebandLine { offset_mhz: (center + shift) / TAU, hwhm: hw, weight: up, n });
            left_lines.push(SidebandLine { offset_mhz: (-center + shift) / TAU, hwhm: hw, weight: down, n });
        }
    }
    let eval = |lines: &[SidebandLine]| -> Vec<f64> {
        freq_mhz
            .iter()
            .map(|f| {
                lines
                    .iter()
                    .map(|l| {
                        let dw = TAU * (f - l.offset_mhz);
                        l.weight * l.hwhm / (PI * p.gamma * (dw * dw + l.hwhm * l.hwhm))
                    })
                    .sum()
            })
            .collect()
    };
    Ok(SidebandSpectrum {
        freq_mhz: freq_mhz.to_vec(),
        right: eval(&right_lines),
        left: eval(&left_lines),
        right_lines,
        left_lines,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// ⟨n⟩ < 1: manifolds up to n = 1.
    Vacuum,
    /// ⟨n⟩ ≥ 1: manifolds up to n = 2.
    Pumped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictedPeak {
    pub label: String,
    pub upper: i64,
    pub lower: i64,
    pub offset_mhz: f64,
    /// Γ_upper + Γ_lower, as FWHM in MHz.
    pub linewidth_mhz: f64,
    pub weight: f64,
    pub merged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultipletPrediction {
    pub regime: Regime,
    pub peaks: Vec<PredictedPeak>,
}

impl MultipletPrediction {
    pub fn offsets_mhz(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.offset_mhz).collect()
    }
}

fn signed_label(n: i64) -> String {
    match n.signum() {
        1 => format!("+{n}"),
        _ => format!("{n}"),
    }
}

/// Transition offsets between adjacent manifolds. Transitions with zero σ₊
/// rate are skipped, and lines closer than 1e−9 MHz are listed once.
///
/// A line is flagged `merged` when a neighbour sits closer than FWHM/√3 (mean
/// of the pair), below which two Lorentzians show no dip between them.
pub fn predict_peaks(p: &DressedParams, regime: Regime) -> Result<MultipletPrediction> {
    let top: i64 = match regime {
        Regime::Vacuum => 1,
        Regime::Pumped => 2,
    };
    let pops = dressed_populations(p, top as usize);
    let states: Vec<i64> = (-top..=top).collect();
    let mut peaks: Vec<PredictedPeak> = Vec::new();
    for &u in &states {
        for &l in &states {
            let (n, m) = (u.unsigned_abs(), l.unsigned_abs());
            if n.abs_diff(m) > 1 {
                continue;
            }
            let rate = transition_rates(p, u, l)?.gamma;
            if rate <= 0.0 {
                continue;
            }
            let offset_mhz = transition_offset(p, u, l) / TAU;
            if peaks.iter().any(|q| (q.offset_mhz - offset_mhz).abs() < 1e-9) {
                continue;
            }
            let width = (total_decay(p, n) + total_decay(p, m)) / TAU;
            peaks.push(PredictedPeak {
                label: format!("{}->{}", signed_label(u), signed_label(l)),
                upper: u,
                lower: l,
                offset_mhz,
                linewidth_mhz: width,
                weight: rate * pops.get(u),
                merged: false,
            });
        }
    }
    peaks.sort_by(|a, b| a.offset_mhz.total_cmp(&b.offset_mhz));
    let flags: Vec<bool> = (0..peaks.len())
        .map(|i| {
            [i.checked_sub(1), (i + 1 < peaks.len()).then_some(i + 1)].into_iter().flatten().any(|j| {
                let sep = (peaks[i].offset_mhz - peaks[j].offset_mhz).abs();
                sep < 0.5 * (peaks[i].linewidth_mhz + peaks[j].linewidth_mhz) / 3f64.sqrt()
            })
        })
        .collect();
    for (pk, f) in peaks.iter_mut().zip(flags) {
        pk.merged = f;
    }
    Ok(MultipletPrediction { regime, peaks })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrosscheckReport {
    pub max_deviation: f64,
    /// (n, numeric eigenvalues, analytic eigenvalues), energies relative to the manifold frame.
    pub manifolds: Vec<(u64, Vec<f64>, Vec<f64>)>,
}

/// Diagonalizes the displaced Hamiltonian of `spec` and compares the manifolds
/// n ≤ n_max with `−(2n−1)Ω̃ ± g₁√n`.
pub fn numeric_crosscheck(p: &DressedParams, spec: &SystemSpec, n_max: u64) -> Result<CrosscheckReport> {
    p.check_resonance()?;
    let s = if spec.port_drive != 0.0 { displace_frame(spec)? } else { spec.clone() };
    if s.hilbert.cavity_levels() < n_max as usize + 2 {
        return Err(Error::SubspaceIdentification(format!(
            "{} cavity levels cannot hold manifold {n_max} and its neighbours",
            s.hilbert.cavity_levels()
        )));
    }
    let mut s = s;
    s.pump_amp = 0.0;
    let h = build_hamiltonian(&s)?;
    let (ev, _) = h.static_part.matrix().hermitian_eigen()?;
    let half = p.omega_tilde();
    let mut manifolds = Vec::new();
    let mut max_dev: f64 = 0.0;
    for n in 0..=n_max {
        let centre = -(2.0 * n as f64 - 1.0) * p.omega_tilde();
        let mut numeric: Vec<f64> = ev.iter().copied().filter(|e| (e - centre).abs() < half).collect();
        numeric.sort_by(f64::total_cmp);
        let mut analytic: Vec<f64> = if n == 0 {
            vec![centre]
        } else {
            let sp = p.g1() * (n as f64).sqrt();
            vec![centre - sp, centre + sp]
        };
        analytic.sort_by(f64::total_cmp);
        if numeric.len() != analytic.len() {
            return Err(Error::SubspaceIdentification(format!(
                "manifold {n}: found {} eigenvalues near {:.3} MHz, expected {}",
                numeric.len(),
                centre / TAU,
                analytic.len()
            )));
        }
        for (a, b) in numeric.iter().zip(&analytic) {
            max_dev = max_dev.max((a - b).abs());
        }
        manifolds.push((n, numeric, analytic));
    }
    Ok(CrosscheckReport { max_deviation: max_dev, manifolds })
}

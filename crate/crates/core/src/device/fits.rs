use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::C64;

use super::lm::{levenberg_marquardt, FitReport, LmOptions, Model};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransmonParams {
    /// GHz
    pub e_j: f64,
    /// GHz
    pub e_c: f64,
}

impl TransmonParams {
    pub fn new(e_j: f64, e_c: f64) -> Result<Self> {
        if !(e_c > 0.0 && e_j > e_c) {
            return Err(Error::InvalidSpec(format!("transmon needs E_J > E_C > 0 (E_J={e_j}, E_C={e_c})")));
        }
        Ok(Self { e_j, e_c })
    }
}

/// E_{n,n+1} = √(8 E_J E_C cos(π δφ/φ₀)) − E_C(n+1), GHz.
pub fn transmon_transition(p: &TransmonParams, flux: f64, n: u32) -> Result<f64> {
    let c = (PI * flux).cos();
    if !(c >= 0.0) {
        return Err(Error::OutOfBranch(c));
    }
    Ok((8.0 * p.e_j * p.e_c * c).sqrt() - p.e_c * (n as f64 + 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransmonSample {
    /// δφ/φ₀
    pub flux: f64,
    /// 0 for E01, 1 for E12.
    pub level: u32,
    /// GHz
    pub freq: f64,
}

struct TransmonModel<'a>(&'a [TransmonSample]);

impl Model for TransmonModel<'_> {
    fn data_norm(&self) -> f64 {
        self.0.iter().map(|s| s.freq * s.freq).sum::<f64>().sqrt()
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for (o, s) in out.iter_mut().zip(self.0) {
            let c = (PI * s.flux).cos();
            *o = (8.0 * p[0] * p[1] * c).max(0.0).sqrt() - p[1] * (s.level as f64 + 1.0) - s.freq;
        }
    }
    fn jacobian(&self, p: &[f64], out: &mut [f64]) {
        for (i, s) in self.0.iter().enumerate() {
            let c = (PI * s.flux).cos();
            let root = (8.0 * p[0] * p[1] * c).max(1e-300).sqrt();
            out[2 * i] = 4.0 * p[1] * c / root;
            out[2 * i + 1] = 4.0 * p[0] * c / root - (s.level as f64 + 1.0);
        }
    }
}

/// Least squares on E_{n,n+1}(δφ) over both branches.
pub fn fit_transmon(samples: &[TransmonSample]) -> Result<FitReport> {
    if samples.len() < 4 {
        return Err(Error::InsufficientData(format!("{} samples, need at least 4", samples.len())));
    }
    for s in samples {
        let c = (PI * s.flux).cos();
        if !(c > 0.0) {
            return Err(Error::OutOfBranch(c));
        }
    }
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| {
        let c = (PI * s.flux).cos();
        (a.min(c), b.max(c))
    });
    if hi - lo < 1e-9 {
        return Err(Error::DegenerateDesign("all samples share one flux bias".into()));
    }
    let lowest = samples
        .iter()
        .min_by(|a, b| (PI * a.flux).cos().total_cmp(&(PI * b.flux).cos()))
        .unwrap();
    let highest = samples
        .iter()
        .max_by(|a, b| (PI * a.flux).cos().total_cmp(&(PI * b.flux).cos()))
        .unwrap();

    // E_C from the branch gap at the nearest pair of E01/E12 samples, else a typical E_C/E01 ratio
    let mut e_c0 = highest.freq / 12.0;
    let mut best = f64::INFINITY;
    for a in samples.iter().filter(|s| s.level == 0) {
        for b in samples.iter().filter(|s| s.level == 1) {
            let d = (a.flux - b.flux).abs();
            if d < best && a.freq > b.freq {
                best = d;
                e_c0 = a.freq - b.freq;
            }
        }
    }
    // plasma frequency ∝ √cos at the two extreme-flux samples
    let plasma = |s: &TransmonSample| s.freq + e_c0 * (s.level as f64 + 1.0);
    let e_j0 = [lowest, highest]
        .iter()
        .map(|s| plasma(s).powi(2) / (8.0 * e_c0 * (PI * s.flux).cos()))
        .sum::<f64>()
        / 2.0;

    let report = levenberg_marquardt(&TransmonModel(samples), &["E_J", "E_C"], &[e_j0, e_c0], &LmOptions::default())?;
    Ok(report)
}

/// r_e = 1 − (γ_e/γ₂)(1 − iδω/γ₂)/(1 + (δω/γ₂)² + Ω²/(γ₁γ₂))
pub fn reflection_coefficient(delta_omega: f64, omega: f64, gamma_1: f64, gamma_2: f64, gamma_e: f64) -> C64 {
    let x = delta_omega / gamma_2;
    let den = 1.0 + x * x + omega * omega / (gamma_1 * gamma_2);
    C64::new(1.0, 0.0) - C64::new(1.0, -x) * (gamma_e / gamma_2 / den)
}

/// Weak-probe form r_e ≈ 1 − (γ_e/γ₂)/(1 + iδω/γ₂).
pub fn reflection_weak(delta_omega: f64, gamma_2: f64, gamma_e: f64) -> C64 {
    C64::new(1.0, 0.0) - C64::new(gamma_e / gamma_2, 0.0) / C64::new(1.0, delta_omega / gamma_2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflectionSample {
    pub delta_omega: f64,
    pub r: C64,
}

struct ReflectionModel<'a> {
    data: &'a [ReflectionSample],
    omega: f64,
    /// γ₁ held fixed (weak-drive mode) or fitted as the third parameter.
    fixed_gamma_1: Option<f64>,
}

impl ReflectionModel<'_> {
    fn unpack(&self, p: &[f64]) -> (f64, f64, f64) {
        (p[0], p[1], self.fixed_gamma_1.unwrap_or_else(|| p[2]))
    }
}

impl Model for ReflectionModel<'_> {
    fn data_norm(&self) -> f64 {
        self.data.iter().map(|s| s.r.norm_sqr()).sum::<f64>().sqrt()
    }
    fn len(&self) -> usize {
        2 * self.data.len()
    }
    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        let (ge, g2, g1) = self.unpack(p);
        for (i, s) in self.data.iter().enumerate() {
            let d = reflection_coefficient(s.delta_omega, self.omega, g1, g2, ge) - s.r;
            out[2 * i] = d.re;
            out[2 * i + 1] = d.im;
        }
    }
    fn jacobian(&self, p: &[f64], out: &mut [f64]) {
        let (ge, g2, g1) = self.unpack(p);
        let n = if self.fixed_gamma_1.is_some() { 2 } else { 3 };
        let w2 = self.omega * self.omega;
        for (i, s) in self.data.iter().enumerate() {
            // r = 1 − ge·(g2 − iδ)/D with D = g2² + δ² + Ω² g2/g1
            let d = s.delta_omega;
            let num = C64::new(g2, -d);
            let den = g2 * g2 + d * d + w2 * g2 / g1;
            let q = num / den;
            let d_ge = -q;
            let dnum_dg2 = C64::new(1.0, 0.0);
            let dden_dg2 = 2.0 * g2 + w2 / g1;
            let d_g2 = -(dnum_dg2 * den - num * dden_dg2) / (den * den) * ge;
            let dden_dg1 = -w2 * g2 / (g1 * g1);
            let d_g1 = num * dden_dg1 / (den * den) * ge;
            let cols = [d_ge, d_g2, d_g1];
            for j in 0..n {
                out[(2 * i) * n + j] = cols[j].re;
                out[(2 * i + 1) * n + j] = cols[j].im;
            }
        }
    }
}

/// Complex least squares of the reflection model. With `fixed_gamma_1` the
/// parameters are (γ_e, γ₂); otherwise (γ_e, γ₂, γ₁). Reports η = γ_e/2γ₂.
pub fn fit_reflection(data: &[ReflectionSample], omega: f64, fixed_gamma_1: Option<f64>) -> Result<FitReport> {
    if data.len() < 6 {
        return Err(Error::InsufficientData(format!("{} samples, need at least 6", data.len())));
    }
    if let Some(g1) = fixed_gamma_1 {
        if !(g1 > 0.0) {
            return Err(Error::InvalidSpec("fixed γ₁ must be positive".into()));
        }
    }
    // γ₂ from the half-height width of |1 − r|², depth from its peak
    let mut pts: Vec<(f64, f64)> = data.iter().map(|s| (s.delta_omega, (C64::new(1.0, 0.0) - s.r).norm_sqr())).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (imax, ymax) = y.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, v)| if *v > b.1 { (i, *v) } else { b });
    let fwhm = half_height_width(&x, &y, imax, 0.0).unwrap_or((x[x.len() - 1] - x[0]) / 4.0);
    let g2_0 = (fwhm / 2.0).max(1e-12);
    let ge_0 = ymax.sqrt() * g2_0;

    let model = ReflectionModel { data, omega, fixed_gamma_1 };
    let mut report = if fixed_gamma_1.is_some() {
        levenberg_marquardt(&model, &["gamma_e", "gamma_2"], &[ge_0, g2_0], &LmOptions::default())?
    } else {
        levenberg_marquardt(&model, &["gamma_e", "gamma_2", "gamma_1"], &[ge_0, g2_0, g2_0], &LmOptions::default())?
    };
    let (ge, g2) = (report.params[0], report.params[1]);
    report.derived.push(("eta", ge / (2.0 * g2)));
    let g1 = fixed_gamma_1.unwrap_or_else(|| report.params[2]);
    if g2 < g1 / 2.0 {
        report.warnings.push(format!("γ₂ = {g2:.4} below γ₁/2 = {:.4}", g1 / 2.0));
    }
    Ok(report)
}

/// A·(w/2)² / ((x−c)² + (w/2)²) + B, peak value A + B and FWHM w.
pub fn lorentzian(x: f64, center: f64, fwhm: f64, amplitude: f64, offset: f64) -> f64 {
    let h = 0.5 * fwhm;
    amplitude * h * h / ((x - center).powi(2) + h * h) + offset
}

/// RMS residual relative to the amplitude above which the data is flagged as
/// not a single Lorentzian.
pub const LORENTZIAN_SHAPE_TOL: f64 = 1e-3;

struct LorentzModel<'a> {
    x: &'a [f64],
    y: &'a [f64],
}

impl Model for LorentzModel<'_> {
    fn data_norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
    fn len(&self) -> usize {
        self.x.len()
    }
    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for i in 0..self.x.len() {
            out[i] = lorentzian(self.x[i], p[0], p[1], p[2], p[3]) - self.y[i];
        }
    }
    fn jacobian(&self, p: &[f64], out: &mut [f64]) {
        let (c, w, a) = (p[0], p[1], p[2]);
        let h = 0.5 * w;
        for i in 0..self.x.len() {
            let u = self.x[i] - c;
            let den = u * u + h * h;
            out[4 * i] = a * h * h * 2.0 * u / (den * den);
            out[4 * i + 1] = a * h * u * u / (den * den);
            out[4 * i + 2] = h * h / den;
            out[4 * i + 3] = 1.0;
        }
    }
}

/// Width between the interpolated half-height crossings around `peak`,
/// measured above `base`.
pub(crate) fn half_height_width(x: &[f64], y: &[f64], peak: usize, base: f64) -> Option<f64> {
    let half = base + 0.5 * (y[peak] - base);
    let mut left = None;
    for i in (0..peak).rev() {
        if y[i] <= half {
            let t = (half - y[i]) / (y[i + 1] - y[i]);
            left = Some(x[i] + t * (x[i + 1] - x[i]));
            break;
        }
    }
    let mut right = None;
    for i in peak + 1..x.len() {
        if y[i] <= half {
            let t = (half - y[i]) / (y[i - 1] - y[i]);
            right = Some(x[i] - t * (x[i] - x[i - 1]));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        (Some(l), None) => Some(2.0 * (x[peak] - l)),
        (None, Some(r)) => Some(2.0 * (r - x[peak])),
        (None, None) => None,
    }
}

/// Fit of (center, FWHM, amplitude, offset). Warnings flag a peak on the
/// range boundary and a residual too large for a single Lorentzian.
pub fn fit_lorentzian(x: &[f64], y: &[f64]) -> Result<FitReport> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.len() < 5 {
        return Err(Error::InsufficientData(format!("{} points, need at least 5", x.len())));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("abscissa must be strictly increasing".into()));
    }
    let (imax, ymax) = y.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, v)| if *v > b.1 { (i, *v) } else { b });
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    let mut warnings = Vec::new();
    if imax == 0 || imax == x.len() - 1 {
        warnings.push("peak at the boundary of the fit range".to_string());
    }
    let w0 = half_height_width(x, y, imax, ymin).unwrap_or((x[x.len() - 1] - x[0]) / 4.0).max(1e-12);
    let p0 = [x[imax], w0, ymax - ymin, ymin];
    let mut report = levenberg_marquardt(&LorentzModel { x, y }, &["center", "fwhm", "amplitude", "offset"], &p0, &LmOptions::default())?;
    report.params[1] = report.params[1].abs();
    let amp = report.params[2].abs().max(1e-300);
    let rms = report.residual_norm / (x.len() as f64).sqrt();
    if rms / amp > LORENTZIAN_SHAPE_TOL {
        report.warnings.push(format!("shape mismatch: rms residual {:.2e} of amplitude", rms / amp));
    }
    report.warnings.splice(0..0, warnings);
    Ok(report)
}

struct LorentzSumModel<'a> {
    x: &'a [f64],
    y: &'a [f64],
    lines: usize,
}

/// Lorentzian line with absorptive amplitude `a` and dispersive amplitude
/// `b`: (a h² + b h u)/(u² + h²), u = x − c, h = fwhm/2.
pub fn complex_lorentzian(x: f64, center: f64, fwhm: f64, a: f64, b: f64) -> f64 {
    let h = 0.5 * fwhm;
    let u = x - center;
    (a * h * h + b * h * u) / (u * u + h * h)
}

impl Model for LorentzSumModel<'_> {
    fn data_norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
    fn len(&self) -> usize {
        self.x.len()
    }
    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        let off = p[4 * self.lines];
        for i in 0..self.x.len() {
            out[i] = (0..self.lines)
                .map(|k| complex_lorentzian(self.x[i], p[4 * k], p[4 * k + 1], p[4 * k + 2], p[4 * k + 3]))
                .sum::<f64>()
                + off
                - self.y[i];
        }
    }
    fn jacobian(&self, p: &[f64], out: &mut [f64]) {
        let n = 4 * self.lines + 1;
        for i in 0..self.x.len() {
            for k in 0..self.lines {
                let (c, w, a, b) = (p[4 * k], p[4 * k + 1], p[4 * k + 2], p[4 * k + 3]);
                let h = 0.5 * w;
                let u = self.x[i] - c;
                let den = u * u + h * h;
                let den2 = den * den;
                let row = &mut out[i * n + 4 * k..i * n + 4 * k + 4];
                row[0] = (2.0 * a * h * h * u + b * h * (u * u - h * h)) / den2;
                row[1] = (a * h * u * u + 0.5 * b * u * (u * u - h * h)) / den2;
                row[2] = h * h / den;
                row[3] = h * u / den;
            }
            out[i * n + n - 1] = 1.0;
        }
    }
}

/// Joint fit of Σ_k complex_lorentzian(c_k, w_k, a_k, b_k) + offset from
/// initial (center, fwhm, height) triples. Parameters are laid out as
/// c₀, w₀, a₀, b₀, c₁, … , offset.
///
/// The dispersive amplitudes make the model exact for a spectrum built from
/// decaying exponentials, whose terms are Re[c/(γ − i(ω − ν))].
pub fn fit_lorentzian_sum(x: &[f64], y: &[f64], initial: &[(f64, f64, f64)]) -> Result<FitReport> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if initial.is_empty() {
        return Err(Error::InsufficientData("no lines to fit".into()));
    }
    if x.len() < 4 * initial.len() + 2 {
        return Err(Error::InsufficientData(format!("{} points for {} lines", x.len(), initial.len())));
    }
    let mut p0 = Vec::with_capacity(4 * initial.len() + 1);
    let mut names = Vec::with_capacity(p0.capacity());
    for &(c, w, a) in initial {
        p0.extend([c, w, a, 0.0]);
        names.extend(["center", "fwhm", "amplitude", "dispersion"]);
    }
    p0.push(0.0);
    names.push("offset");
    let mut report =
        levenberg_marquardt(&LorentzSumModel { x, y, lines: initial.len() }, &names, &p0, &LmOptions::default())?;
    for k in 0..initial.len() {
        report.params[4 * k + 1] = report.params[4 * k + 1].abs();
    }
    Ok(report)
}

struct ExpModel<'a> {
    t: &'a [f64],
    y: &'a [f64],
}

impl Model for ExpModel<'_> {
    fn data_norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
    fn len(&self) -> usize {
        self.t.len()
    }
    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for i in 0..self.t.len() {
            out[i] = p[0] * (-self.t[i] / p[1]).exp() + p[2] - self.y[i];
        }
    }
    fn jacobian(&self, p: &[f64], out: &mut [f64]) {
        for i in 0..self.t.len() {
            let e = (-self.t[i] / p[1]).exp();
            out[3 * i] = e;
            out[3 * i + 1] = p[0] * e * self.t[i] / (p[1] * p[1]);
            out[3 * i + 2] = 1.0;
        }
    }
}

fn linear_regression(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Fit of y = A e^{−t/T₁} + B; parameters (amplitude, T1, offset).
pub fn fit_exponential(t: &[f64], y: &[f64]) -> Result<FitReport> {
    if t.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), got: y.len() });
    }
    if t.len() < 5 {
        return Err(Error::InsufficientData(format!("{} points, need at least 5", t.len())));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("times must be strictly increasing".into()));
    }
    // |dy/dt| of a decay shrinks as e^{−t/T}: regress log|Δy/Δt| on the positive segment
    let (mut tm, mut ld) = (Vec::new(), Vec::new());
    for i in 0..t.len() - 1 {
        let d = ((y[i + 1] - y[i]) / (t[i + 1] - t[i])).abs();
        if d > 0.0 && d.is_finite() {
            tm.push(0.5 * (t[i] + t[i + 1]));
            ld.push(d.ln());
        }
    }
    let (slope, _) = linear_regression(&tm, &ld).ok_or(Error::InsufficientData("flat data".into()))?;
    if !(slope < 0.0) {
        return Err(Error::Growth);
    }
    let tau0 = -1.0 / slope;
    // amplitude and offset are linear once T is fixed
    let e: Vec<f64> = t.iter().map(|v| (-(v - t[0]) / tau0).exp()).collect();
    let (a_shift, b0) = linear_regression(&e, y).ok_or(Error::InsufficientData("flat data".into()))?;
    let a0 = a_shift * (t[0] / tau0).exp();

    let report = levenberg_marquardt(&ExpModel { t, y }, &["amplitude", "T1", "offset"], &[a0, tau0, b0], &LmOptions::default())?;
    if !(report.params[1] > 0.0) {
        return Err(Error::Growth);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    const TAU: f64 = std::f64::consts::TAU;

    fn device_transmon() -> TransmonParams {
        TransmonParams::new(13.25, 0.625).unwrap()
    }

    #[test]
    fn sweet_spot_frequency() {
        let p = device_transmon();
        let f01 = transmon_transition(&p, 0.0, 0).unwrap();
        assert!((f01 - ((8.0f64 * 13.25 * 0.625).sqrt() - 0.625)).abs() < 1e-15);
        assert!((f01 - 7.514).abs() < 5e-4);
        let f12 = transmon_transition(&p, 0.0, 1).unwrap();
        assert!((f01 - f12 - 0.625).abs() < 1e-12);
    }

    #[test]
    fn flux_limits() {
        let p = device_transmon();
        let f = transmon_transition(&p, 0.5 - 1e-12, 0).unwrap();
        assert!((f + 0.625).abs() < 1e-4);
        assert!(matches!(transmon_transition(&p, 0.7, 0), Err(Error::OutOfBranch(_))));
    }

    fn transmon_data(noise: Option<(u64, f64)>) -> Vec<TransmonSample> {
        let p = device_transmon();
        let mut rng = noise.map(|(s, _)| ChaCha8Rng::seed_from_u64(s));
        let normal = Normal::new(0.0, noise.map(|n| n.1).unwrap_or(0.0).max(1e-300)).unwrap();
        let mut out = Vec::new();
        for k in 0..=20 {
            let flux = -0.4 + 0.04 * k as f64;
            for level in 0..2 {
                let mut f = transmon_transition(&p, flux, level).unwrap();
                if let Some(r) = rng.as_mut() {
                    f += normal.sample(r);
                }
                out.push(TransmonSample { flux, level, freq: f });
            }
        }
        out
    }

    #[test]
    fn transmon_round_trip() {
        let r = fit_transmon(&transmon_data(None)).unwrap();
        assert!((r.get("E_J").unwrap() / 13.25 - 1.0).abs() < 1e-3);
        assert!((r.get("E_C").unwrap() / 0.625 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn transmon_noisy_recovery() {
        for seed in 0..100 {
            let r = fit_transmon(&transmon_data(Some((seed, 1e-3)))).unwrap();
            assert!((r.get("E_J").unwrap() / 13.25 - 1.0).abs() < 0.01, "seed {seed}");
            assert!((r.get("E_C").unwrap() / 0.625 - 1.0).abs() < 0.01, "seed {seed}");
        }
    }

    #[test]
    fn transmon_single_flux_is_degenerate() {
        let data: Vec<TransmonSample> =
            (0..6).map(|k| TransmonSample { flux: 0.1, level: (k % 2) as u32, freq: 7.0 - 0.6 * (k % 2) as f64 }).collect();
        assert!(matches!(fit_transmon(&data), Err(Error::DegenerateDesign(_))));
    }

    #[test]
    fn decoupled_waveguide_reflects_fully() {
        for d in [-3.0, 0.0, 11.0] {
            assert_eq!(reflection_coefficient(d, 2.0, 1.0, 1.5, 0.0), C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn reflection_depth_at_device_point() {
        let (ge, g2) = (TAU * 3.5, TAU * 2.8);
        let r = reflection_coefficient(0.0, 0.0, TAU * 3.6, g2, ge);
        assert!((r - C64::new(-0.25, 0.0)).norm() < 1e-12);
        assert!((ge / (2.0 * g2) - 0.625).abs() < 1e-12);
    }

    /// Algebraic (Kåsa) circle fit as an independent oracle.
    fn fit_circle(pts: &[C64]) -> (f64, f64, f64, f64) {
        // x² + y² + D x + E y + F = 0, least squares via 3×3 normal equations
        let mut a = [[0.0; 3]; 3];
        let mut b = [0.0; 3];
        for p in pts {
            let row = [p.re, p.im, 1.0];
            let rhs = -(p.re * p.re + p.im * p.im);
            for i in 0..3 {
                for j in 0..3 {
                    a[i][j] += row[i] * row[j];
                }
                b[i] += row[i] * rhs;
            }
        }
        // Gaussian elimination
        for k in 0..3 {
            for i in k + 1..3 {
                let f = a[i][k] / a[k][k];
                for j in k..3 {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut s = [0.0; 3];
        for i in (0..3).rev() {
            s[i] = (b[i] - (i + 1..3).map(|j| a[i][j] * s[j]).sum::<f64>()) / a[i][i];
        }
        let (cx, cy) = (-s[0] / 2.0, -s[1] / 2.0);
        let r = (cx * cx + cy * cy - s[2]).sqrt();
        let resid = pts.iter().map(|p| ((p.re - cx).hypot(p.im - cy) - r).abs()).fold(0.0, f64::max);
        (cx, cy, r, resid)
    }

    #[test]
    fn weak_reflection_is_a_circle() {
        let (ge, g2) = (TAU * 3.5, TAU * 2.8);
        let pts: Vec<C64> = (0..1000).map(|k| reflection_weak(TAU * (-50.0 + 0.1 * k as f64), g2, ge)).collect();
        let (cx, cy, r, resid) = fit_circle(&pts);
        assert!(resid < 1e-10);
        assert!((r - ge / (2.0 * g2)).abs() < 1e-10);
        assert!((cx - (1.0 - ge / (2.0 * g2))).abs() < 1e-10 && cy.abs() < 1e-10);
    }

    #[test]
    fn weak_limit_matches_full_formula() {
        let (g1, g2, ge) = (TAU * 3.6, TAU * 2.8, TAU * 3.5);
        let omega = (1e-8 * g1 * g2).sqrt();
        for k in 0..200 {
            let d = TAU * (-20.0 + 0.2 * k as f64);
            let diff = (reflection_coefficient(d, omega, g1, g2, ge) - reflection_weak(d, g2, ge)).norm();
            assert!(diff < 1e-6);
        }
    }

    fn reflection_data(omega: f64) -> Vec<ReflectionSample> {
        let (g1, g2, ge) = (TAU * 3.6, TAU * 2.8, TAU * 3.5);
        (0..81)
            .map(|k| {
                let d = TAU * (-20.0 + 0.5 * k as f64);
                ReflectionSample { delta_omega: d, r: reflection_coefficient(d, omega, g1, g2, ge) }
            })
            .collect()
    }

    #[test]
    fn reflection_round_trip_weak_mode() {
        let r = fit_reflection(&reflection_data(0.0), 0.0, Some(TAU * 3.6)).unwrap();
        assert!((r.get("eta").unwrap() / 0.625 - 1.0).abs() < 5e-3);
        assert!((r.get("gamma_2").unwrap() / (TAU * 2.8) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn reflection_round_trip_saturated() {
        let mut diameters = Vec::new();
        for om in [2.0, 4.0, 8.0] {
            let omega = TAU * om;
            let r = fit_reflection(&reflection_data(omega), omega, None).unwrap();
            let (ge, g2, g1) = (r.params[0], r.params[1], r.params[2]);
            assert!((ge / (TAU * 3.5) - 1.0).abs() < 1e-3, "Ω={om}");
            assert!((g1 / (TAU * 3.6) - 1.0).abs() < 1e-3, "Ω={om}");
            // real-axis diameter γ_e / (γ₂(1 + Ω²/γ₁γ₂))
            let fitted = ge / (g2 * (1.0 + omega * omega / (g1 * g2)));
            let analytic = 3.5 / (2.8 * (1.0 + om * om / (3.6 * 2.8)));
            assert!((fitted - analytic).abs() < 1e-3);
            diameters.push(fitted);
        }
        assert!(diameters.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn weak_reflection_dip_width_is_gamma_2() {
        let data = reflection_data(0.0);
        let x: Vec<f64> = data.iter().map(|s| s.delta_omega / TAU).collect();
        let y: Vec<f64> = data.iter().map(|s| (C64::new(1.0, 0.0) - s.r).norm_sqr()).collect();
        let r = fit_lorentzian(&x, &y).unwrap();
        assert!((r.get("fwhm").unwrap() / 2.0 - 2.8).abs() < 1e-6);
    }

    #[test]
    fn lorentzian_self_fit() {
        let x: Vec<f64> = (0..201).map(|k| -10.0 + 0.1 * k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| lorentzian(*v, 0.7, 2.3, 5.0, 0.2)).collect();
        let r = fit_lorentzian(&x, &y).unwrap();
        for (got, want) in r.params.iter().zip([0.7, 2.3, 5.0, 0.2]) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn merged_pair_widens_and_is_flagged() {
        let x: Vec<f64> = (0..401).map(|k| -20.0 + 0.1 * k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| lorentzian(*v, -0.5, 2.0, 1.0, 0.0) + lorentzian(*v, 0.5, 2.0, 1.0, 0.0)).collect();
        let r = fit_lorentzian(&x, &y).unwrap();
        assert!(r.get("fwhm").unwrap() > 2.0);
        assert!(r.warnings.iter().any(|w| w.contains("shape mismatch")));
    }

    #[test]
    fn lorentzian_sum_recovers_dispersive_lines() {
        let x: Vec<f64> = (0..801).map(|k| -40.0 + 0.1 * k as f64).collect();
        let truth = [(-14.5, 6.4, 0.4, 0.05), (0.0, 5.6, 1.0, 0.0), (14.5, 6.4, 0.4, -0.05)];
        let y: Vec<f64> =
            x.iter().map(|v| truth.iter().map(|&(c, w, a, b)| complex_lorentzian(*v, c, w, a, b)).sum()).collect();
        let init: Vec<(f64, f64, f64)> = [(-14.0, 8.0, 0.4), (0.0, 6.0, 1.0), (14.0, 8.0, 0.4)].to_vec();
        let r = fit_lorentzian_sum(&x, &y, &init).unwrap();
        for (k, &(c, w, a, b)) in truth.iter().enumerate() {
            for (got, want) in r.params[4 * k..4 * k + 4].iter().zip([c, w, a, b]) {
                assert!((got - want).abs() < 1e-7, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn exponential_self_fit() {
        let t: Vec<f64> = (0..200).map(|k| k as f64 * 0.005).collect();
        let y: Vec<f64> = t.iter().map(|v| (-v / 0.18).exp()).collect();
        let r = fit_exponential(&t, &y).unwrap();
        assert!((r.get("T1").unwrap() - 0.18).abs() < 1e-6 * 0.18);
    }

    #[test]
    fn growth_rejected() {
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|v| (v / 0.1).exp()).collect();
        assert!(matches!(fit_exponential(&t, &y), Err(Error::Growth)));
    }
}

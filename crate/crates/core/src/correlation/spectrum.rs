use std::f64::consts::{PI, TAU};

use crate::device::{fit_lorentzian, fit_lorentzian_sum, LORENTZIAN_SHAPE_TOL};
use crate::error::{Error, Result};
use crate::hilbert::{build_operators, SystemSpec};
use crate::lindblad::ode::OdeOptions;
use crate::lindblad::{build_system, steady_state};
use crate::linalg::C64;

use super::regression::{two_time_correlation_with, CorrelationTrace};

/// Required |g(τ_max) − asymptote| / |g(0)|.
pub const TAIL_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Window {
    /// Correlations decay on their own; no taper.
    #[default]
    None,
    /// Half-sided Hann taper 0.5(1 + cos πτ/τ_max).
    Hann,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakOptions {
    /// Minimum prominence as a fraction of the global maximum.
    pub rel_prominence: f64,
    pub min_separation_mhz: f64,
    /// Refine centres and widths by a joint Lorentzian-sum fit.
    pub line_fit: bool,
}

impl Default for PeakOptions {
    fn default() -> Self {
        Self { rel_prominence: 0.02, min_separation_mhz: 1.0, line_fit: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumOptions {
    /// Offsets from the drive frequency, MHz.
    pub freq_mhz: Vec<f64>,
    pub subtract_coherent: bool,
    pub window: Window,
    pub peaks: PeakOptions,
}

impl SpectrumOptions {
    pub fn new(freq_mhz: Vec<f64>) -> Self {
        Self { freq_mhz, subtract_coherent: true, window: Window::None, peaks: PeakOptions::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    /// Line centre: the fitted Lorentzian centre, else the interpolated apex.
    pub position_mhz: f64,
    /// Parabolically interpolated local maximum.
    pub apex_mhz: f64,
    pub height: f64,
    pub fwhm_mhz: f64,
    pub prominence: f64,
    /// FWHM from a Lorentzian fit rather than the half-height crossings.
    pub fitted: bool,
    /// Centre and FWHM from the joint line-shape fit of the whole spectrum.
    pub line_centre: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumResult {
    pub freq_mhz: Vec<f64>,
    /// S(δf) per unit angular frequency, so ∫S dω = g(0) − ⟨σ₊⟩⟨σ₋⟩.
    pub density: Vec<f64>,
    pub peaks: Vec<Peak>,
    pub subtracted: C64,
}

impl SpectrumResult {
    pub fn max(&self) -> f64 {
        self.density.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// ∫ S dω over the grid (trapezoid).
    pub fn integral(&self) -> f64 {
        self.freq_mhz
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(f, s)| TAU * (f[1] - f[0]) * 0.5 * (s[0] + s[1]))
            .sum()
    }

    pub fn peak_positions(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.position_mhz).collect()
    }

    /// Peak closest to `target_mhz`.
    pub fn nearest_peak(&self, target_mhz: f64) -> Option<&Peak> {
        self.peaks.iter().min_by(|a, b| (a.position_mhz - target_mhz).abs().total_cmp(&(b.position_mhz - target_mhz).abs()))
    }
}

/// Uniform grid from `lo` to `hi` (inclusive) in steps of `step`, MHz.
pub fn frequency_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi > lo) {
        return Err(Error::InvalidGrid(format!("frequency grid [{lo}, {hi}] step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

fn uniform_spacing(tau: &[f64]) -> Result<f64> {
    if tau.len() < 3 || tau[0] != 0.0 {
        return Err(Error::InvalidGrid("τ grid needs ≥ 3 points from 0".into()));
    }
    let dt = tau[1] - tau[0];
    for (k, t) in tau.iter().enumerate() {
        if (t - k as f64 * dt).abs() > 1e-9 * dt.max(t.abs()) {
            return Err(Error::InvalidGrid("τ grid must be uniform".into()));
        }
    }
    Ok(dt)
}

/// π⁻¹ Re ∫₀^∞ [g(τ) − c] e^{iωτ} dτ by a trapezoid sum, ω = 2π·δf, with peaks.
///
/// The kernel is e^{+iωτ} so that a trace ∝ e^{−iΔτ} peaks at δf = +Δ/2π,
/// i.e. at its emission offset above the drive.
pub fn emission_spectrum(trace: &CorrelationTrace, opts: &SpectrumOptions) -> Result<SpectrumResult> {
    let dt = uniform_spacing(&trace.tau)?;
    if trace.values.len() != trace.tau.len() {
        return Err(Error::DimensionMismatch { expected: trace.tau.len(), got: trace.values.len() });
    }
    let band = opts.freq_mhz.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    if band > 0.5 / dt {
        return Err(Error::Aliasing { spacing_us: dt, band_mhz: band });
    }
    let g0 = trace.values[0].norm();
    let tail = (trace.values[trace.values.len() - 1] - trace.asymptote).norm();
    if tail > TAIL_TOL * g0 {
        return Err(Error::InsufficientSpan { tail: tail / g0.max(1e-300), limit: TAIL_TOL });
    }
    let shift = if opts.subtract_coherent { trace.asymptote } else { C64::new(0.0, 0.0) };
    let n = trace.tau.len();
    let tau_max = trace.tau[n - 1];
    let samples: Vec<C64> = trace
        .values
        .iter()
        .zip(&trace.tau)
        .enumerate()
        .map(|(k, (v, t))| {
            let w = match opts.window {
                Window::None => 1.0,
                Window::Hann => 0.5 * (1.0 + (PI * t / tau_max).cos()),
            };
            let trap = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            (v - shift) * (w * trap * dt)
        })
        .collect();

    let density: Vec<f64> = opts
        .freq_mhz
        .iter()
        .map(|f| {
            let step = C64::from_polar(1.0, TAU * f * dt);
            let mut phase = C64::new(1.0, 0.0);
            let mut acc = C64::new(0.0, 0.0);
            for (k, s) in samples.iter().enumerate() {
                acc += s * phase;
                phase *= step;
                // keep the recurrence on the unit circle
                if k % 64 == 63 {
                    phase = C64::from_polar(1.0, TAU * f * dt * (k + 1) as f64);
                }
            }
            acc.re / PI
        })
        .collect();

    let peaks = find_peaks(&opts.freq_mhz, &density, &opts.peaks);
    Ok(SpectrumResult { freq_mhz: opts.freq_mhz.clone(), density, peaks, subtracted: shift })
}

/// Topographic prominence of the local maximum at `i`.
fn prominence(y: &[f64], i: usize) -> f64 {
    let h = y[i];
    let mut left_min = h;
    let mut j = i;
    while j > 0 {
        j -= 1;
        if y[j] > h {
            break;
        }
        left_min = left_min.min(y[j]);
    }
    let mut right_min = h;
    let mut j = i;
    while j + 1 < y.len() {
        j += 1;
        if y[j] > h {
            break;
        }
        right_min = right_min.min(y[j]);
    }
    h - left_min.max(right_min)
}

fn parabolic(x: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let den = y0 - 2.0 * y1 + y2;
    if den >= 0.0 {
        return (x[i], y1);
    }
    let p = (0.5 * (y0 - y2) / den).clamp(-0.5, 0.5);
    let dx = x[i + 1] - x[i];
    (x[i] + p * dx, y1 - 0.25 * (y0 - y2) * p)
}

/// Local maxima with prominence ≥ rel_prominence·max, thinned greedily by
/// height to min_separation, sorted by position.
pub fn find_peaks(x: &[f64], y: &[f64], opts: &PeakOptions) -> Vec<Peak> {
    let n = y.len();
    if n < 3 || x.len() != n {
        return Vec::new();
    }
    let global = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(global > 0.0) {
        return Vec::new();
    }
    let mut cands: Vec<(usize, f64)> = (1..n - 1)
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .map(|i| (i, prominence(y, i)))
        .filter(|(_, p)| *p >= opts.rel_prominence * global)
        .collect();
    cands.sort_by(|a, b| y[b.0].total_cmp(&y[a.0]).then(a.0.cmp(&b.0)));
    let mut chosen: Vec<(usize, f64)> = Vec::new();
    for (i, p) in cands {
        if chosen.iter().all(|(j, _)| (x[i] - x[*j]).abs() >= opts.min_separation_mhz) {
            chosen.push((i, p));
        }
    }
    chosen.sort_by_key(|c| c.0);

    let idx: Vec<usize> = chosen.iter().map(|c| c.0).collect();
    let bounds: Vec<(usize, usize)> = (0..idx.len())
        .map(|k| {
            let lo = if k == 0 { 0 } else { valley(y, idx[k - 1], idx[k]) };
            let hi = if k + 1 == idx.len() { n - 1 } else { valley(y, idx[k], idx[k + 1]) };
            (lo, hi)
        })
        .collect();
    let mut peaks: Vec<Peak> = chosen
        .iter()
        .zip(&bounds)
        .map(|(&(i, prom), &(lo, hi))| {
            let (apex, height) = parabolic(x, y, i);
            let (fwhm, fitted) = peak_width(x, y, i, lo, hi);
            Peak { position_mhz: apex, apex_mhz: apex, height, fwhm_mhz: fwhm, prominence: prom, fitted, line_centre: false }
        })
        .collect();
    if opts.line_fit {
        joint_refine(x, y, &mut peaks, &bounds);
    }
    peaks
}

/// Replaces centres and widths by a joint Lorentzian-sum fit when the sum
/// describes the whole spectrum (rms residual within the shape tolerance of
/// the maximum) and every fitted line stays inside its valley-to-valley window.
/// Peaks that hide several unresolved lines keep their apexes.
fn joint_refine(x: &[f64], y: &[f64], peaks: &mut [Peak], bounds: &[(usize, usize)]) {
    let init: Vec<(f64, f64, f64)> = peaks.iter().map(|p| (p.apex_mhz, p.fwhm_mhz, p.height)).collect();
    let Ok(fit) = fit_lorentzian_sum(x, y, &init) else { return };
    let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if fit.residual_norm / (x.len() as f64).sqrt() > LORENTZIAN_SHAPE_TOL * max {
        return;
    }
    let span = x[x.len() - 1] - x[0];
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        let (c, w, a) = (fit.params[4 * k], fit.params[4 * k + 1], fit.params[4 * k + 2]);
        if !(c >= x[lo] && c <= x[hi] && w > 0.0 && w < span && a > 0.0) {
            return;
        }
    }
    for (k, p) in peaks.iter_mut().enumerate() {
        p.position_mhz = fit.params[4 * k];
        p.fwhm_mhz = fit.params[4 * k + 1];
        p.fitted = true;
        p.line_centre = true;
    }
}

fn valley(y: &[f64], a: usize, b: usize) -> usize {
    (a..=b).min_by(|&i, &j| y[i].total_cmp(&y[j])).unwrap()
}

fn half_width(x: &[f64], y: &[f64], i: usize, lo: usize, hi: usize) -> f64 {
    let base = y[lo].max(y[hi]).min(y[i]);
    crate::device::half_height_width(&x[lo..=hi], &y[lo..=hi], i - lo, base.max(0.0).min(0.5 * y[i]))
        .unwrap_or(x[hi] - x[lo])
}

/// FWHM from a Lorentzian fit over the part of the peak above half height
/// (widened 1.5×), else from the half-height crossings.
fn peak_width(x: &[f64], y: &[f64], i: usize, lo: usize, hi: usize) -> (f64, bool) {
    let rough = half_width(x, y, i, lo, hi);
    let reach = 1.5 * rough;
    let a = (lo..=i).find(|&j| x[i] - x[j] <= reach).unwrap_or(lo);
    let b = (i..=hi).rev().find(|&j| x[j] - x[i] <= reach).unwrap_or(hi);
    if b - a + 1 >= 7 {
        if let Ok(fit) = fit_lorentzian(&x[a..=b], &y[a..=b]) {
            let (c, w) = (fit.params[0], fit.params[1]);
            if w.is_finite() && w > 0.0 && c >= x[a] && c <= x[b] && w < 4.0 * rough.max(x[1] - x[0]) {
                return (w, true);
            }
        }
    }
    (rough, false)
}

/// τ grid with spacing ≤ 1/(8 f_max) and span 10/min(γ₂, κ, g₁).
pub fn default_tau_grid(spec: &SystemSpec, band_mhz: f64) -> Vec<f64> {
    let dt = 1.0 / (8.0 * band_mhz.max(1.0));
    let rates = [spec.gamma_2(), spec.kappa, 0.5 * spec.g_c.abs()];
    let slowest = rates.iter().copied().filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min);
    let span = if slowest.is_finite() { 10.0 / slowest } else { 1.0 };
    let n = (span / dt).ceil() as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}

/// Controls for [`stationary_spectrum`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumPlan {
    pub band_mhz: f64,
    pub df_mhz: f64,
    pub window: Window,
    pub peaks: PeakOptions,
    /// τ span is doubled at most this many times when the tail check fails.
    pub max_extensions: usize,
    pub ode: OdeOptions,
}

impl Default for SpectrumPlan {
    fn default() -> Self {
        Self {
            band_mhz: 60.0,
            df_mhz: 0.05,
            window: Window::None,
            peaks: PeakOptions::default(),
            max_extensions: 4,
            ode: OdeOptions::default(),
        }
    }
}

/// build → steady state → regression ⟨σ₊(0)σ₋(τ)⟩ → incoherent spectrum.
pub fn stationary_spectrum(spec: &SystemSpec, plan: &SpectrumPlan) -> Result<(SpectrumResult, CorrelationTrace)> {
    let l = build_system(spec)?;
    let rho = steady_state(&l, spec.hilbert)?;
    let ops = build_operators(spec.hilbert)?;
    let freq = frequency_grid(-plan.band_mhz, plan.band_mhz, plan.df_mhz)?;
    let mut opts = SpectrumOptions::new(freq);
    opts.window = plan.window;
    opts.peaks = plan.peaks;
    let mut tau = default_tau_grid(spec, plan.band_mhz);
    let mut extensions = 0;
    loop {
        let trace = two_time_correlation_with(&l, &rho, &ops.sigma_plus, &ops.sigma_minus, &tau, &plan.ode)?;
        match emission_spectrum(&trace, &opts) {
            Err(Error::InsufficientSpan { .. }) if extensions < plan.max_extensions => {
                extensions += 1;
                let dt = tau[1];
                let n = 2 * (tau.len() - 1);
                tau = (0..=n).map(|k| k as f64 * dt).collect();
            }
            other => return other.map(|s| (s, trace)),
        }
    }
}

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{build_operators, HilbertSpec, SystemSpec};
use crate::lindblad::ode::{integrate, OdeOptions};
use crate::lindblad::{build_system, right_multiply, steady_state, DensityMatrix, Liouvillian};
use crate::linalg::{C64, ZERO};

use super::regression::{two_time_correlation_with, CorrelationTrace};
use super::spectrum::{default_tau_grid, emission_spectrum, frequency_grid, SpectrumOptions, SpectrumPlan, SpectrumResult};

pub const DEFAULT_T0_SAMPLES: usize = 16;
/// Largest period-to-period change of ⟨a†a⟩ and ⟨σ_z⟩ at the periodic steady state.
pub const PSS_DRIFT_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct ModulatedOptions {
    pub t0_samples: usize,
    pub max_periods: usize,
    pub drift_tol: f64,
    pub ode: OdeOptions,
}

impl Default for ModulatedOptions {
    fn default() -> Self {
        Self { t0_samples: DEFAULT_T0_SAMPLES, max_periods: 5000, drift_tol: PSS_DRIFT_TOL, ode: OdeOptions::default() }
    }
}

/// State at the start of a period of the periodic steady state.
#[derive(Clone, Debug)]
pub struct PeriodicState {
    /// None for a static generator.
    pub period: Option<f64>,
    pub t_start: f64,
    pub state: DensityMatrix,
    pub periods: usize,
    pub drift: f64,
}

fn weights(op: &crate::hilbert::Operator) -> Vec<C64> {
    let d = op.dim();
    let m = op.matrix();
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

/// Evolves the static steady state of L₀ period by period until ⟨a†a⟩ and
/// ⟨σ_z⟩ at the period boundary change by less than the drift tolerance.
pub fn periodic_steady_state(l: &Liouvillian, space: HilbertSpec, opts: &ModulatedOptions) -> Result<PeriodicState> {
    let rho0 = steady_state(&l.static_part(), space)?;
    let Some(period) = l.period() else {
        return Ok(PeriodicState { period: None, t_start: 0.0, state: rho0, periods: 0, drift: 0.0 });
    };
    let ops = build_operators(space)?;
    let wn = weights(&ops.number());
    let wz = weights(&ops.sigma_z);
    let mut y = rho0.as_slice().to_vec();
    let mut prev = (dot(&wn, &y).re, dot(&wz, &y).re);
    let mut drift = f64::INFINITY;
    for k in 0..opts.max_periods {
        let t = k as f64 * period;
        let (next, _) = integrate(|t, x, out| l.apply(t, x, out), &[t, t + period], y, &opts.ode, |_, _, _| Ok(()))?;
        y = next;
        let now = (dot(&wn, &y).re, dot(&wz, &y).re);
        drift = (now.0 - prev.0).abs().max((now.1 - prev.1).abs());
        prev = now;
        if drift < opts.drift_tol {
            let state = DensityMatrix::from_vec_unchecked(space, y)?.normalized()?;
            return Ok(PeriodicState { period: Some(period), t_start: (k + 1) as f64 * period, state, periods: k + 1, drift });
        }
    }
    Err(Error::PeriodicSteadyState { periods: opts.max_periods, drift })
}

/// States at `samples` equally spaced times across one period.
fn period_samples(l: &Liouvillian, pss: &PeriodicState, samples: usize, ode: &OdeOptions) -> Result<Vec<(f64, Vec<C64>)>> {
    let period = pss.period.expect("modulated");
    let grid: Vec<f64> = (0..samples).map(|j| pss.t_start + j as f64 * period / samples as f64).collect();
    let mut out = Vec::with_capacity(samples);
    integrate(|t, x, o| l.apply(t, x, o), &grid, pss.state.as_slice().to_vec(), ode, |_, t, y| {
        out.push((t, y.to_vec()));
        Ok(())
    })?;
    Ok(out)
}

/// Period average of ⟨O⟩ at the periodic steady state (the steady value if static).
pub fn period_average(l: &Liouvillian, pss: &PeriodicState, op: &crate::hilbert::Operator, ode: &OdeOptions) -> Result<f64> {
    if pss.period.is_none() {
        return Ok(pss.state.expect(op).re);
    }
    let w = weights(op);
    let samples = period_samples(l, pss, 32, ode)?;
    Ok(samples.iter().map(|(_, y)| dot(&w, y).re).sum::<f64>() / samples.len() as f64)
}

/// Stationary-in-mean incoherent spectrum of a periodically modulated generator.
///
/// For each of `t0_samples` start times across one period of the periodic
/// steady state the incoherent correlation
/// ⟨σ₊(t₀)σ₋(t₀+τ)⟩ − ⟨σ₊(t₀)⟩⟨σ₋(t₀+τ)⟩ is propagated; the t₀-average is
/// then transformed as in [`emission_spectrum`]. A static generator reduces
/// to the stationary path.
pub fn modulated_spectrum(
    l: &Liouvillian,
    space: HilbertSpec,
    tau: &[f64],
    opts: &ModulatedOptions,
    spectrum: &SpectrumOptions,
) -> Result<(SpectrumResult, CorrelationTrace, PeriodicState)> {
    let pss = periodic_steady_state(l, space, opts)?;
    let trace = averaged_correlation(l, space, &pss, tau, opts)?;
    let s = emission_spectrum(&trace, spectrum)?;
    Ok((s, trace, pss))
}

/// [`modulated_spectrum`] on the plan's frequency grid, doubling the default
/// τ span while the tail check fails.
pub fn pumped_spectrum(
    spec: &SystemSpec,
    plan: &SpectrumPlan,
    opts: &ModulatedOptions,
) -> Result<(SpectrumResult, CorrelationTrace, PeriodicState)> {
    let l = build_system(spec)?;
    let pss = periodic_steady_state(&l, spec.hilbert, opts)?;
    let mut sopts = SpectrumOptions::new(frequency_grid(-plan.band_mhz, plan.band_mhz, plan.df_mhz)?);
    sopts.window = plan.window;
    sopts.peaks = plan.peaks;
    let mut tau = default_tau_grid(spec, plan.band_mhz);
    let mut extensions = 0;
    loop {
        let trace = averaged_correlation(&l, spec.hilbert, &pss, &tau, opts)?;
        match emission_spectrum(&trace, &sopts) {
            Err(Error::InsufficientSpan { .. }) if extensions < plan.max_extensions => {
                extensions += 1;
                let dt = tau[1];
                let n = 2 * (tau.len() - 1);
                tau = (0..=n).map(|k| k as f64 * dt).collect();
            }
            other => return other.map(|s| (s, trace, pss)),
        }
    }
}

fn averaged_correlation(
    l: &Liouvillian,
    space: HilbertSpec,
    pss: &PeriodicState,
    tau: &[f64],
    opts: &ModulatedOptions,
) -> Result<CorrelationTrace> {
    let ops = build_operators(space)?;
    if pss.period.is_none() {
        return two_time_correlation_with(l, &pss.state, &ops.sigma_plus, &ops.sigma_minus, tau, &opts.ode);
    }
    if opts.t0_samples < 1 {
        return Err(Error::InvalidGrid("need at least one t0 sample".into()));
    }
    if tau.first() != Some(&0.0) {
        return Err(Error::InvalidGrid("τ grid must start at 0".into()));
    }
    let starts = period_samples(l, pss, opts.t0_samples, &opts.ode)?;
    let n = space.dim().pow(2);
    let wm = weights(&ops.sigma_minus);
    let wp = weights(&ops.sigma_plus);

    let runs: Vec<Result<Vec<C64>>> = starts
        .par_iter()
        .map(|(t0, rho)| {
            let rho_t0 = DensityMatrix::from_vec_unchecked(space, rho.clone())?;
            let x0 = right_multiply(&rho_t0, &ops.sigma_plus).into_vec();
            let sp = dot(&wp, rho);
            let mut y0 = x0;
            y0.extend_from_slice(rho);
            let grid: Vec<f64> = tau.iter().map(|t| t0 + t).collect();
            let mut vals = Vec::with_capacity(tau.len());
            integrate(
                |t, y, out| {
                    l.apply(t, &y[..n], &mut out[..n]);
                    l.apply(t, &y[n..], &mut out[n..]);
                },
                &grid,
                y0,
                &opts.ode,
                |_, _, y| {
                    vals.push(dot(&wm, &y[..n]) - sp * dot(&wm, &y[n..]));
                    Ok(())
                },
            )?;
            Ok(vals)
        })
        .collect();
    let mut avg = vec![ZERO; tau.len()];
    for run in runs {
        for (a, v) in avg.iter_mut().zip(run?) {
            *a += v;
        }
    }
    let m = starts.len() as f64;
    avg.iter_mut().for_each(|v| *v /= m);
    Ok(CorrelationTrace { tau: tau.to_vec(), values: avg, asymptote: ZERO, normalized: false })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PumpOptions {
    /// Relative accuracy on ⟨n⟩.
    pub rel_tol: f64,
    pub max_doublings: usize,
    pub max_iterations: usize,
    pub modulated: ModulatedOptions,
}

impl Default for PumpOptions {
    fn default() -> Self {
        Self { rel_tol: 2e-3, max_doublings: 8, max_iterations: 40, modulated: ModulatedOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PumpCalibration {
    pub pump_amp: f64,
    pub achieved_n: f64,
    /// Every (pump_amp, ⟨n⟩) evaluated, in order.
    pub history: Vec<(f64, f64)>,
}

/// Period-averaged ⟨a†a⟩ at the periodic steady state of `spec`.
pub fn mean_photons(spec: &SystemSpec, opts: &ModulatedOptions) -> Result<f64> {
    let l = build_system(spec)?;
    let pss = periodic_steady_state(&l, spec.hilbert, opts)?;
    let ops = build_operators(spec.hilbert)?;
    period_average(&l, &pss, &ops.number(), &opts.ode)
}

/// Pump amplitude giving period-averaged ⟨a†a⟩ = target_n: doubling/halving
/// bracket from κ√n, then a bisection-safeguarded secant on √⟨n⟩.
pub fn calibrate_pump(spec: &SystemSpec, target_n: f64, opts: &PumpOptions) -> Result<PumpCalibration> {
    if !(target_n > 0.0) {
        return Err(Error::InvalidSpec(format!("target photon number must be positive, got {target_n}")));
    }
    let mut history = Vec::new();
    let mut eval = |p: f64| -> Result<f64> {
        let mut s = spec.clone();
        s.pump_amp = p;
        let n = mean_photons(&s, &opts.modulated)?;
        history.push((p, n));
        Ok(n)
    };
    let done = |n: f64| (n / target_n - 1.0).abs() <= opts.rel_tol;
    let h = |n: f64| n.max(0.0).sqrt() - target_n.sqrt();

    let p0 = spec.kappa.max(1e-3) * target_n.sqrt();
    let n0 = eval(p0)?;
    if done(n0) {
        return Ok(PumpCalibration { pump_amp: p0, achieved_n: n0, history });
    }
    let (mut lo, mut hi) = if n0 < target_n { ((p0, n0), None) } else { ((0.0, 0.0), Some((p0, n0))) };
    if n0 < target_n {
        let mut p = p0;
        for _ in 0..opts.max_doublings {
            p *= 2.0;
            let n = eval(p)?;
            if done(n) {
                return Ok(PumpCalibration { pump_amp: p, achieved_n: n, history });
            }
            if n > target_n {
                hi = Some((p, n));
                break;
            }
            lo = (p, n);
        }
    }
    let Some(mut hi) = hi else {
        return Err(Error::BracketFailure { target: target_n, lo: p0, hi: lo.0 });
    };
    for _ in 0..opts.max_iterations {
        let (a, b) = (lo, hi);
        let mut p = a.0 - h(a.1) * (b.0 - a.0) / (h(b.1) - h(a.1));
        let width = b.0 - a.0;
        if !p.is_finite() || p <= a.0 + 0.01 * width || p >= b.0 - 0.01 * width {
            p = 0.5 * (a.0 + b.0);
        }
        let n = eval(p)?;
        if done(n) {
            return Ok(PumpCalibration { pump_amp: p, achieved_n: n, history });
        }
        if n < target_n {
            lo = (p, n);
        } else {
            hi = (p, n);
        }
    }
    Err(Error::BracketFailure { target: target_n, lo: lo.0, hi: hi.0 })
}

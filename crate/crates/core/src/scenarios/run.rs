use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::correlation::{
    calibrate_pump, fft_lines, g1, pumped_spectrum, stationary_spectrum, ModulatedOptions, PeakOptions, PumpOptions,
    SpectralPart, SpectrumPlan, SpectrumResult,
};
use crate::device::{
    fit_exponential, fit_lorentzian, fit_reflection, fit_transmon, lorentzian, reflection_coefficient, transmon_transition,
    FitReport, ReflectionSample, TransmonParams, TransmonSample,
};
use crate::dressed::{predict_peaks, DressedParams, Regime};
use crate::error::{Error, Result};
use crate::hilbert::{build_operators, displace_frame, mhz, to_mhz, SystemSpec};
use crate::lindblad::{build_system, converge_truncation, steady_state, EvolveOptions, TruncationOptions};
use crate::linalg::C64;

use super::analysis::{
    anticrossing, central_linewidth, compare_peaks, local_minima, splittings, Comparison, SIDEBAND_HALF_WINDOW,
};
use super::config::{DriveAxis, FitKind, Scenario, ScenarioConfig, Truncation};
use super::data::{format_float, DataTable};
use super::pulse::{run_pulse_program, MeasurementWindow, PulseProgram};

/// Data files and manifest entries of one run.
#[derive(Clone, Debug, Default)]
pub struct ScenarioOutput {
    /// (file name, table)
    pub files: Vec<(String, DataTable)>,
    /// Resolved settings and run facts, in order.
    pub manifest: Vec<(String, String)>,
}

impl ScenarioOutput {
    pub fn file(&self, name: &str) -> Option<&DataTable> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    fn note(&mut self, key: &str, value: impl Into<String>) {
        self.manifest.push((key.to_string(), value.into()));
    }

    /// Writes every data file and `manifest.txt` into `dir`. Only the
    /// manifest carries a timestamp.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, table) in &self.files {
            table.write(&dir.join(name))?;
        }
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut text = format!("timestamp_unix = {stamp}\n");
        for (k, v) in &self.manifest {
            text.push_str(&format!("{k} = {v}\n"));
        }
        std::fs::write(dir.join("manifest.txt"), text)?;
        Ok(())
    }
}

/// Spec for one drive value on the configured axis (MHz).
pub fn drive_point(cfg: &ScenarioConfig, base: &SystemSpec, value_mhz: f64) -> Result<SystemSpec> {
    let mut s = base.clone();
    match cfg.drive_axis {
        DriveAxis::Rabi => {
            s.rabi = mhz(value_mhz);
            Ok(s)
        }
        DriveAxis::Port => {
            s.rabi = 0.0;
            s.port_drive = mhz(value_mhz);
            displace_frame(&s)
        }
    }
}

fn point_spec(cfg: &ScenarioConfig, base: &SystemSpec) -> Result<SystemSpec> {
    match cfg.drive_axis {
        DriveAxis::Rabi => Ok(base.clone()),
        DriveAxis::Port => displace_frame(base),
    }
}

pub fn spectrum_plan(cfg: &ScenarioConfig, band_mhz: f64) -> SpectrumPlan {
    SpectrumPlan { band_mhz, df_mhz: cfg.df_mhz, max_extensions: cfg.max_extensions, ode: cfg.ode(), ..SpectrumPlan::default() }
}

fn sweep_band(cfg: &ScenarioConfig) -> f64 {
    cfg.band_mhz.unwrap_or_else(|| 60f64.max(cfg.sweep_stop.abs() + 20.0))
}

/// Steady-state ⟨σ_z⟩, ⟨a†a⟩, Re/Im ⟨σ₋⟩ as the truncation observable.
fn steady_observables(s: &SystemSpec) -> Result<Vec<f64>> {
    let l = build_system(s)?;
    let rho = steady_state(&l, s.hilbert)?;
    let ops = build_operators(s.hilbert)?;
    let sm = rho.expect(&ops.sigma_minus);
    Ok(vec![rho.expect(&ops.sigma_z).re, rho.expect(&ops.number()).re, sm.re, sm.im])
}

fn resolve(cfg: &ScenarioConfig, out: &mut ScenarioOutput) -> Result<SystemSpec> {
    cfg.validate()?;
    let mut spec = cfg.resolved_spec()?;
    if cfg.truncation == Truncation::Auto {
        if spec.pump_amp != 0.0 || cfg.scenario == Scenario::PumpedSpectrum {
            return Err(Error::Config("truncation = auto needs a static generator".into()));
        }
        let probe = point_spec(cfg, &spec)?;
        let opts = TruncationOptions { rel_tol: cfg.truncation_tol, ..TruncationOptions::default() };
        let rep = converge_truncation(&probe, steady_observables, &opts).map_err(Error::at("truncation"))?;
        spec.hilbert = rep.hilbert;
        let hist: Vec<String> = rep.history.iter().map(|(n, c)| format!("{n}:{}", format_float(*c))).collect();
        out.note("truncation_history", hist.join(" "));
    }
    out.note("cavity_levels_used", spec.hilbert.cavity_levels().to_string());
    Ok(spec)
}

/// Runs the configured scenario and returns its tables.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let mut out = ScenarioOutput::default();
    out.note("scenario", cfg.scenario.name());
    out.note("version", env!("CARGO_PKG_VERSION"));
    out.note("threads", rayon::current_num_threads().to_string());
    let base = resolve(cfg, &mut out).map_err(Error::at("config"))?;
    if cfg.drive_axis == DriveAxis::Port {
        out.note("drive_axis_note", "port amplitude in arbitrary units of the external power axis");
    }
    match cfg.scenario {
        Scenario::Spectrum => run_spectrum(cfg, &base, &mut out)?,
        Scenario::Sweep => run_sweep(cfg, &base, &mut out, false)?,
        Scenario::LinewidthSweep => run_sweep(cfg, &base, &mut out, true)?,
        Scenario::G1 => run_g1(cfg, &base, &mut out)?,
        Scenario::Dynamics => run_dynamics(cfg, &base, &mut out)?,
        Scenario::Relax => run_relax(cfg, &base, &mut out)?,
        Scenario::PumpedSpectrum => run_pumped(cfg, &base, &mut out)?,
        Scenario::Fit => run_fit(cfg, &base, &mut out)?,
    }
    for (k, v) in cfg.render().lines().filter_map(|l| l.split_once(" = ")) {
        out.note(&format!("config.{k}"), v);
    }
    Ok(out)
}

fn spectrum_table(s: &SpectrumResult) -> DataTable {
    let mut t = DataTable::new(&[("freq_offset", "MHz"), ("density", "us/rad")]);
    for (f, d) in s.freq_mhz.iter().zip(&s.density) {
        t.push(vec![*f, *d]);
    }
    t
}

fn peak_table(s: &SpectrumResult) -> DataTable {
    let mut t = DataTable::new(&[
        ("position", "MHz"),
        ("apex", "MHz"),
        ("height", "us/rad"),
        ("fwhm", "MHz"),
        ("prominence", "us/rad"),
        ("line_centre", "bool"),
    ]);
    for p in &s.peaks {
        t.push(vec![p.position_mhz, p.apex_mhz, p.height, p.fwhm_mhz, p.prominence, p.line_centre as u8 as f64]);
    }
    t
}

fn comparison_table(c: &Comparison) -> DataTable {
    let mut t = DataTable::new(&[
        ("analytic", "MHz"),
        ("linewidth", "MHz"),
        ("numeric", "MHz"),
        ("deviation", "MHz"),
        ("merged", "bool"),
        ("pass", "bool"),
    ]);
    for (i, r) in c.rows.iter().enumerate() {
        t.comment(format!("row {i}: {}", r.label));
    }
    t.comment(format!("all_pass: {}", c.all_pass()));
    for r in &c.rows {
        t.push(vec![
            r.analytic_mhz,
            r.linewidth_mhz,
            r.numeric_mhz.unwrap_or(f64::NAN),
            r.deviation_mhz.unwrap_or(f64::NAN),
            r.merged as u8 as f64,
            r.pass as u8 as f64,
        ]);
    }
    t
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_else(|| "none".into())
}

/// Analytic peak list against `numeric`; `None` when the dressed theory does
/// not apply (e.g. no drive).
pub fn compare_analytic(spec: &SystemSpec, regime: Regime, numeric: &SpectrumResult) -> Option<Comparison> {
    let p = DressedParams::from_spec(spec).ok()?;
    let pred = predict_peaks(&p, regime).ok()?;
    Some(compare_peaks(&pred, numeric))
}

fn run_spectrum(cfg: &ScenarioConfig, base: &SystemSpec, out: &mut ScenarioOutput) -> Result<()> {
    let spec = point_spec(cfg, base).map_err(Error::at("drive"))?;
    let (s, trace) = stationary_spectrum(&spec, &spectrum_plan(cfg, cfg.band_mhz.unwrap_or(60.0)))
        .map_err(Error::at("spectrum"))?;
    out.note("effective_rabi_mhz", format_float(to_mhz(spec.rabi)));
    out.note("tau_span_us", format_float(*trace.tau.last().unwrap_or(&0.0)));
    let mut peaks = peak_table(&s);
    let sp = splittings(&s.peaks, to_mhz(spec.rabi));
    peaks.comment(format!("peak_count: {}", s.peaks.len()));
    peaks.comment(format!("left_sideband_splitting_mhz: {}", opt(sp.left)));
    peaks.comment(format!("right_sideband_splitting_mhz: {}", opt(sp.right)));
    peaks.comment(format!("central_splitting_mhz: {}", opt(sp.central)));
    let name = cfg.scenario.name();
    out.files.push((format!("{name}.dat"), spectrum_table(&s)));
    out.files.push((format!("{name}.peaks.dat"), peaks));
    if let Some(c) = compare_analytic(&spec, Regime::Vacuum, &s) {
        out.files.push((format!("{name}.compare.dat"), comparison_table(&c)));
    }
    Ok(())
}

/// One spectrum per swept drive value, computed in parallel and returned in sweep order.
pub fn sweep_spectra(cfg: &ScenarioConfig, base: &SystemSpec) -> Result<Vec<(f64, SystemSpec, SpectrumResult)>> {
    let values = cfg.sweep_values()?;
    let plan = spectrum_plan(cfg, sweep_band(cfg));
    values
        .par_iter()
        .map(|&v| {
            let spec = drive_point(cfg, base, v)?;
            let (s, _) = stationary_spectrum(&spec, &plan)?;
            Ok((v, spec, s))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(Error::at("sweep"))
}

fn run_sweep(cfg: &ScenarioConfig, base: &SystemSpec, out: &mut ScenarioOutput, linewidth: bool) -> Result<()> {
    let points = sweep_spectra(cfg, base)?;
    let name = cfg.scenario.name();
    if linewidth {
        let mut t = DataTable::new(&[("drive", "MHz"), ("rabi", "MHz"), ("central_position", "MHz"), ("central_fwhm", "MHz")]);
        let mut widths = Vec::new();
        for (v, spec, s) in &points {
            let (pos, w) = central_linewidth(s).unwrap_or((f64::NAN, f64::NAN));
            widths.push(w);
            t.push(vec![*v, to_mhz(spec.rabi), pos, w]);
        }
        let mut m = DataTable::new(&[("drive", "MHz"), ("central_fwhm", "MHz")]);
        m.comment("local minima of the central linewidth");
        for i in local_minima(&widths) {
            m.push(vec![points[i].0, widths[i]]);
        }
        out.files.push((format!("{name}.dat"), t));
        out.files.push((format!("{name}.peaks.dat"), m));
        return Ok(());
    }
    let mut t = DataTable::new(&[("drive", "MHz"), ("rabi", "MHz"), ("freq_offset", "MHz"), ("density", "us/rad")]);
    let mut p = DataTable::new(&[("drive", "MHz"), ("rabi", "MHz"), ("position", "MHz"), ("height", "us/rad"), ("fwhm", "MHz")]);
    for (v, spec, s) in &points {
        let r = to_mhz(spec.rabi);
        for (f, d) in s.freq_mhz.iter().zip(&s.density) {
            t.push(vec![*v, r, *f, *d]);
        }
        for q in &s.peaks {
            p.push(vec![*v, r, q.position_mhz, q.height, q.fwhm_mhz]);
        }
    }
    let ac = anticrossing(points.iter().map(|(_, spec, s)| (to_mhz(spec.rabi), s)), SIDEBAND_HALF_WINDOW);
    match ac {
        Some(a) => {
            p.comment(format!("anticrossing_rabi_mhz: {}", format_float(a.drive_mhz)));
            p.comment(format!("anticrossing_gap_mhz: {}", format_float(a.gap_mhz)));
        }
        None => {
            p.comment("anticrossing: none found");
        }
    }
    out.files.push((format!("{name}.dat"), t));
    out.files.push((format!("{name}.peaks.dat"), p));
    Ok(())
}

fn run_g1(cfg: &ScenarioConfig, base: &SystemSpec, out: &mut ScenarioOutput) -> Result<()> {
    let spec = point_spec(cfg, base).map_err(Error::at("drive"))?;
    let (s, trace) = stationary_spectrum(&spec, &spectrum_plan(cfg, cfg.band_mhz.unwrap_or(60.0)))
        .map_err(Error::at("spectrum"))?;
    let g = g1(&trace).map_err(Error::at("g1"))?;
    // the coherent floor g¹(∞) would only add a DC line with truncation sidelobes
    let re: Vec<C64> = g.values.iter().map(|v| C64::new((v - g.asymptote).re, 0.0)).collect();
    let dt = g.tau[1] - g.tau[0];
    let lines = fft_lines(&re, dt, cfg.fft_pad, SpectralPart::Real, &PeakOptions { line_fit: false, ..PeakOptions::default() })
        .map_err(Error::at("fft"))?;
    let mut t = DataTable::new(&[("tau", "us"), ("re_g1", "1"), ("im_g1", "1")]);
    t.comment(format!("g1_asymptote: {} {}", format_float(g.asymptote.re), format_float(g.asymptote.im)));
    for (x, v) in g.tau.iter().zip(&g.values) {
        t.push(vec![*x, v.re, v.im]);
    }
    let mut p = DataTable::new(&[("fft_line", "MHz"), ("fft_value", "arb"), ("spectrum_peak", "MHz"), ("deviation", "MHz")]);
    p.comment("positive-frequency FFT lines of Re(g1 - g1_asymptote) paired with the nearest spectrum peak (by magnitude)");
    for q in lines.peaks.iter().filter(|q| q.position_mhz >= 0.0) {
        let near = s
            .peaks
            .iter()
            .map(|sp| sp.position_mhz.abs())
            .min_by(|a, b| (a - q.position_mhz).abs().total_cmp(&(b - q.position_mhz).abs()));
        let dev = near.map(|x| x - q.position_mhz).unwrap_or(f64::NAN);
        p.push(vec![q.position_mhz, q.height, near.unwrap_or(f64::NAN), dev]);
    }
    out.files.push(("g1.dat".into(), t));
    out.files.push(("g1.peaks.dat".into(), p));
    out.files.push(("g1.spectrum.peaks.dat".into(), peak_table(&s)));
    Ok(())
}

fn run_dynamics(cfg: &ScenarioConfig, base: &SystemSpec, out: &mut ScenarioOutput) -> Result<()> {
    let spec = point_spec(cfg, base).map_err(Error::at("drive"))?;
    let span_ns = cfg.time_span * 1e3;
    let prog = PulseProgram::new(MeasurementWindow { start_ns: 0.0, stop_ns: span_ns, dt_ns: cfg.dt * 1e3 }).then(
        span_ns,
        spec.rabi,
        spec.drive_phase,
    );
    let opts = EvolveOptions { ode: cfg.ode(), ..EvolveOptions::default() };
    let run = run_pulse_program(&prog, &spec, &opts).map_err(Error::at("pulse program"))?;
    let tr = &run.trajectory;
    let sz = tr.real_series("sigma_z").unwrap_or_default();
    let n = tr.real_series("number").unwrap_or_default();
    let mut t = DataTable::new(&[
        ("t", "us"),
        ("sigma_z", "1"),
        ("sigma_y", "1"),
        ("photons", "1"),
        ("power_literal", "hbar*omega_a/us"),
        ("power_physical", "photons/us"),
    ]);
    for i in 0..tr.times.len() {
        t.push(vec![tr.times[i], sz[i], run.field.sigma_y[i], n[i], run.power.literal[i], run.power.physical[i]]);
    }
    let mean = sz.iter().sum::<f64>() / sz.len().max(1) as f64;
    let centred: Vec<C64> = sz.iter().map(|z| C64::new(z - mean, 0.0)).collect();
    let lines = fft_lines(&centred, cfg.dt, cfg.fft_pad, SpectralPart::Magnitude, &PeakOptions { line_fit: false, ..PeakOptions::default() })
        .map_err(Error::at("fft"))?;
    let mut p = DataTable::new(&[("frequency", "MHz"), ("magnitude", "arb")]);
    p.comment("FFT lines of sigma_z(t) with its mean removed");
    for q in lines.peaks.iter().filter(|q| q.position_mhz > 0.0) {
        p.push(vec![q.position_mhz, q.height]);
    }
    out.files.push(("dynamics.dat".into(), t));
    out.files.push(("dynamics.peaks.dat".into(), p));
    Ok(())
}

/// Decay fits of one relaxation run.
#[derive(Debug)]
pub struct RelaxFit {
    pub drive_mhz: f64,
    pub inversion: f64,
    pub literal: Result<FitReport>,
    pub physical: Result<FitReport>,
}

/// π-pulse at `pi_rabi`, then the drive `value_mhz` held on for the relax
/// window. Returns (time since pulse end, ⟨σ_z⟩, literal power, physical power) and the fits.
pub fn relax_run(cfg: &ScenarioConfig, base: &SystemSpec, value_mhz: f64) -> Result<(Vec<[f64; 4]>, RelaxFit)> {
    let spec = drive_point(cfg, base, value_mhz)?;
    let pi_rabi = mhz(cfg.pi_rabi);
    let pi_ns = std::f64::consts::PI / pi_rabi * 1e3;
    let window_ns = cfg.relax_window * 1e3;
    let prog = PulseProgram::new(MeasurementWindow { start_ns: pi_ns, stop_ns: pi_ns + window_ns, dt_ns: cfg.relax_dt * 1e3 })
        .then_pi(pi_rabi, 0.0)
        .then(window_ns, spec.rabi, spec.drive_phase);
    let opts = EvolveOptions { ode: cfg.ode(), ..EvolveOptions::default() };
    let run = run_pulse_program(&prog, &spec, &opts)?;
    let sz = run.trajectory.real_series("sigma_z").unwrap_or_default();
    let t0 = run.trajectory.times[0];
    let t: Vec<f64> = run.trajectory.times.iter().map(|x| x - t0).collect();
    let rows = (0..t.len()).map(|i| [t[i], sz[i], run.power.literal[i], run.power.physical[i]]).collect();
    let fit = RelaxFit {
        drive_mhz: value_mhz,
        inversion: sz[0],
        literal: fit_exponential(&t, &run.power.literal),
        physical: fit_exponential(&t, &run.power.physical),
    };
    Ok((rows, fit))
}

fn run_relax(cfg: &ScenarioConfig, base: &SystemSpec, out: &mut ScenarioOutput) -> Result<()> {
    let runs = cfg
        .relax_drives
        .par_iter()
        .map(|&v| relax_run(cfg, base, v))
        .collect::<Result<Vec<_>>>()
        .map_err(Error::at("relax"))?;
    let mut cols: Vec<(String, &str)> = vec![("t".into(), "us")];
    for v in &cfg.relax_drives {
        let tag = format_float(*v);
        cols.push((format!("sigma_z@{tag}"), "1"));
        cols.push((format!("power_literal@{tag}"), "hbar*omega_a/us"));
        cols.push((format!("power_physical@{tag}"), "photons/us"));
    }
    let colrefs: Vec<(&str, &str)> = cols.iter().map(|(a, b)| (a.as_str(), *b)).collect();
    let mut t = DataTable::new(&colrefs);
    t.comment("time is measured from the end of the pi pulse; the drive stays on");
    let len = runs.iter().map(|(r, _)| r.len()).min().unwrap_or(0);
    for i in 0..len {
        let mut row = vec![runs[0].0[i][0]];
        for (r, _) in &runs {
            row.extend_from_slice(&r[i][1..]);
        }
        t.push(row);
    }
    let mut f = DataTable::new(&[
        ("drive", "MHz"),
        ("inversion", "1"),
        ("t1_literal", "us"),
        ("t1_literal_halfwidth", "us"),
        ("t1_physical", "us"),
        ("t1_physical_halfwidth", "us"),
    ]);
    f.comment("exponential fits a*exp(-t/T1)+b; NaN marks a fit that failed");
    for (_, fit) in &runs {
        let get = |r: &Result<FitReport>| match r {
            Ok(rep) => (rep.get("T1").unwrap_or(f64::NAN), rep.half_widths.get(1).copied().unwrap_or(f64::NAN)),
            Err(_) => (f64::NAN, f64::NAN),
        };
        let (a, ah) = get(&fit.literal);
        let (b, bh) = get(&fit.physical);
        if let Err(e) = &fit.physical {
            out.note(&format!("relax_physical_fit@{}", format_float(fit.drive_mhz)), e.to_string());
        }
        if let Err(e) = &fit.literal {
            out.note(&format!("relax_literal_fit@{}", format_float(fit.drive_mhz)), e.to_string());
        }
        f.push(vec![fit.drive_mhz, fit.inversion, a, ah, b, bh]);
    }
    out.files.push(("relax.dat".into(), t));
    out.files.push(("relax.fits.dat".into(), f));
    Ok(())
}

fn run_pumped(cfg: &ScenarioConfig, base: &SystemSpec, out: &mut ScenarioOutput) -> Result<()> {
    let mut spec = point_spec(cfg, base).map_err(Error::at("drive"))?;
    let mopts = ModulatedOptions { t0_samples: cfg.t0_samples, ode: cfg.ode(), ..ModulatedOptions::default() };
    if spec.pump_amp == 0.0 {
        let popts = PumpOptions { modulated: mopts.clone(), ..PumpOptions::default() };
        let cal = calibrate_pump(&spec, cfg.target_photons, &popts).map_err(Error::at("pump calibration"))?;
        out.note("pump_amp_mhz", format_float(to_mhz(cal.pump_amp)));
        out.note("pump_achieved_photons", format_float(cal.achieved_n));
        let hist: Vec<String> =
            cal.history.iter().map(|(p, n)| format!("{}:{}", format_float(to_mhz(*p)), format_float(*n))).collect();
        out.note("pump_history_mhz_photons", hist.join(" "));
        spec.pump_amp = cal.pump_amp;
    }
    let (s, trace, pss) =
        pumped_spectrum(&spec, &spectrum_plan(cfg, cfg.band_mhz.unwrap_or(60.0)), &mopts).map_err(Error::at("spectrum"))?;
    out.note("periodic_state_periods", pss.periods.to_string());
    out.note("tau_span_us", format_float(*trace.tau.last().unwrap_or(&0.0)));
    out.files.push(("pumped-spectrum.dat".into(), spectrum_table(&s)));
    let mut p = peak_table(&s);
    p.comment(format!("peak_count: {}", s.peaks.len()));
    out.files.push(("pumped-spectrum.peaks.dat".into(), p));
    if let Some(c) = compare_analytic(&spec, Regime::Pumped, &s) {
        out.files.push(("pumped-spectrum.compare.dat".into(), comparison_table(&c)));
    }
    Ok(())
}

fn need(t: &DataTable, name: &str) -> Result<Vec<f64>> {
    t.column(name).ok_or_else(|| Error::Config(format!("fit input lacks column {name:?}")))
}

fn params_table(rep: &FitReport) -> DataTable {
    let mut t = DataTable::new(&[("value", "native"), ("half_width", "native")]);
    for (i, n) in rep.names.iter().enumerate() {
        t.comment(format!("row {i}: {n}"));
    }
    for (n, v) in &rep.derived {
        t.comment(format!("derived {n}: {}", format_float(*v)));
    }
    for w in &rep.warnings {
        t.comment(format!("warning: {w}"));
    }
    for (v, h) in rep.params.iter().zip(&rep.half_widths) {
        t.push(vec![*v, *h]);
    }
    t
}

fn run_fit(cfg: &ScenarioConfig, base: &SystemSpec, out: &mut ScenarioOutput) -> Result<()> {
    let path = cfg.fit_input.as_ref().ok_or_else(|| Error::Config("fit scenario needs fit_input".into()))?;
    let input = DataTable::read(path).map_err(Error::at("fit input"))?;
    let (rep, table) = match cfg.fit_kind {
        FitKind::Transmon => {
            let (flux, level, freq) = (need(&input, "flux")?, need(&input, "level")?, need(&input, "freq")?);
            let samples: Vec<TransmonSample> = (0..flux.len())
                .map(|i| TransmonSample { flux: flux[i], level: level[i] as u32, freq: freq[i] })
                .collect();
            let rep = fit_transmon(&samples).map_err(Error::at("fit"))?;
            let p = TransmonParams::new(rep.params[0], rep.params[1]).map_err(Error::at("fit"))?;
            let mut t = DataTable::new(&[("flux", "phi0"), ("level", "1"), ("freq", "GHz"), ("model", "GHz")]);
            for s in &samples {
                t.push(vec![s.flux, s.level as f64, s.freq, transmon_transition(&p, s.flux, s.level).unwrap_or(f64::NAN)]);
            }
            (rep, t)
        }
        FitKind::Reflection => {
            let (d, re, im) = (need(&input, "detuning")?, need(&input, "re_r")?, need(&input, "im_r")?);
            let samples: Vec<ReflectionSample> = (0..d.len())
                .map(|i| ReflectionSample { delta_omega: mhz(d[i]), r: C64::new(re[i], im[i]) })
                .collect();
            let fixed = cfg.fit_fix_gamma_1.then_some(base.gamma_1);
            let rep = fit_reflection(&samples, base.rabi, fixed).map_err(Error::at("fit"))?;
            let g1v = fixed.or_else(|| rep.get("gamma_1")).unwrap_or(f64::NAN);
            let (ge, g2) = (rep.params[0], rep.params[1]);
            let mut t = DataTable::new(&[
                ("detuning", "MHz"),
                ("re_r", "1"),
                ("im_r", "1"),
                ("model_re", "1"),
                ("model_im", "1"),
            ]);
            for s in &samples {
                let m = reflection_coefficient(s.delta_omega, base.rabi, g1v, g2, ge);
                t.push(vec![to_mhz(s.delta_omega), s.r.re, s.r.im, m.re, m.im]);
            }
            (rep, t)
        }
        FitKind::Lorentzian => {
            let (x, y) = (need(&input, "x")?, need(&input, "y")?);
            let rep = fit_lorentzian(&x, &y).map_err(Error::at("fit"))?;
            let p = &rep.params;
            let mut t = DataTable::new(&[("x", "input"), ("y", "input"), ("model", "input")]);
            for (a, b) in x.iter().zip(&y) {
                t.push(vec![*a, *b, lorentzian(*a, p[0], p[1], p[2], p[3])]);
            }
            (rep, t)
        }
        FitKind::Exponential => {
            let (x, y) = (need(&input, "t")?, need(&input, "y")?);
            let rep = fit_exponential(&x, &y).map_err(Error::at("fit"))?;
            let p = &rep.params;
            let mut t = DataTable::new(&[("t", "input"), ("y", "input"), ("model", "input")]);
            for (a, b) in x.iter().zip(&y) {
                t.push(vec![*a, *b, p[0] * (-a / p[1]).exp() + p[2]]);
            }
            (rep, t)
        }
    };
    out.note("fit_converged", rep.converged.to_string());
    out.files.push(("fit.dat".into(), table));
    out.files.push(("fit.params.dat".into(), params_table(&rep)));
    Ok(())
}

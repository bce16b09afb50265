//! Flat `key = value` run configuration.
//!
//! Frequencies take a unit suffix (`Hz`, `kHz`, `MHz`, `GHz`) and are ordinary
//! frequencies; they are stored as angular rates. Times take `ns`, `us`/`µs`
//! or `ms`. A dimensioned value without a unit is rejected, as is any unknown
//! key. `#` starts a comment.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hilbert::{mhz, to_mhz, DephasingConvention, SystemSpec, PUMPED_CAVITY_LEVELS, VACUUM_CAVITY_LEVELS};
use crate::lindblad::OdeOptions;

use super::data::format_float;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Spectrum,
    Sweep,
    G1,
    Dynamics,
    Relax,
    PumpedSpectrum,
    LinewidthSweep,
    Fit,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Spectrum,
        Scenario::Sweep,
        Scenario::G1,
        Scenario::Dynamics,
        Scenario::Relax,
        Scenario::PumpedSpectrum,
        Scenario::LinewidthSweep,
        Scenario::Fit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Spectrum => "spectrum",
            Scenario::Sweep => "sweep",
            Scenario::G1 => "g1",
            Scenario::Dynamics => "dynamics",
            Scenario::Relax => "relax",
            Scenario::PumpedSpectrum => "pumped-spectrum",
            Scenario::LinewidthSweep => "linewidth-sweep",
            Scenario::Fit => "fit",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}")))
    }
}

/// How sweep values and relaxation drives are interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriveAxis {
    /// Values are the atom Rabi drive Ω.
    Rabi,
    /// Values are the cavity-port amplitude Ω_c, moved onto the atom with
    /// Ω = −g_cΩ_c/Δ_c. Absolute scale is arbitrary with respect to the
    /// room-temperature power axis of an experiment.
    Port,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    Fixed,
    /// Grow N_c until the steady-state observables settle.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitKind {
    Transmon,
    Reflection,
    Lorentzian,
    Exponential,
}

impl FitKind {
    fn name(self) -> &'static str {
        match self {
            FitKind::Transmon => "transmon",
            FitKind::Reflection => "reflection",
            FitKind::Lorentzian => "lorentzian",
            FitKind::Exponential => "exponential",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Physical parameters. `omega_d`, `omega_pc` and the truncation are
    /// overridden at resolution unless set explicitly.
    pub spec: SystemSpec,
    pub omega_d: Option<f64>,
    pub omega_pc: Option<f64>,
    pub cavity_levels: Option<usize>,
    pub truncation: Truncation,
    pub truncation_tol: f64,
    pub drive_axis: DriveAxis,
    /// Half-width of the frequency window, MHz. Sweeps widen it to cover the range.
    pub band_mhz: Option<f64>,
    pub df_mhz: f64,
    pub max_extensions: usize,
    /// µs
    pub time_span: f64,
    /// µs
    pub dt: f64,
    /// MHz
    pub sweep_start: f64,
    pub sweep_stop: f64,
    pub sweep_step: f64,
    /// MHz
    pub relax_drives: Vec<f64>,
    /// MHz
    pub pi_rabi: f64,
    /// µs
    pub relax_window: f64,
    /// µs
    pub relax_dt: f64,
    pub target_photons: f64,
    pub t0_samples: usize,
    pub fft_pad: usize,
    pub rtol: f64,
    pub atol: f64,
    pub fit_kind: FitKind,
    pub fit_input: Option<PathBuf>,
    pub fit_fix_gamma_1: bool,
}

#[derive(Clone, Copy)]
enum Dim {
    Freq,
    Time,
    None,
}

const KEYS: &[(&str, Dim)] = &[
    ("omega_a", Dim::Freq),
    ("omega_c", Dim::Freq),
    ("omega_d", Dim::Freq),
    ("omega_pc", Dim::Freq),
    ("gamma_1", Dim::Freq),
    ("gamma_phi", Dim::Freq),
    ("gamma_e", Dim::Freq),
    ("kappa", Dim::Freq),
    ("g_c", Dim::Freq),
    ("rabi", Dim::Freq),
    ("port_drive", Dim::Freq),
    ("pump_amp", Dim::Freq),
    ("drive_phase", Dim::None),
    ("n_th", Dim::None),
    ("dephasing", Dim::None),
    ("cavity_levels", Dim::None),
    ("truncation", Dim::None),
    ("truncation_tol", Dim::None),
    ("drive_axis", Dim::None),
    ("band", Dim::Freq),
    ("df", Dim::Freq),
    ("max_extensions", Dim::None),
    ("time_span", Dim::Time),
    ("dt", Dim::Time),
    ("sweep_start", Dim::Freq),
    ("sweep_stop", Dim::Freq),
    ("sweep_step", Dim::Freq),
    ("relax_drives", Dim::Freq),
    ("pi_rabi", Dim::Freq),
    ("relax_window", Dim::Time),
    ("relax_dt", Dim::Time),
    ("target_photons", Dim::None),
    ("t0_samples", Dim::None),
    ("fft_pad", Dim::None),
    ("rtol", Dim::None),
    ("atol", Dim::None),
    ("fit_kind", Dim::None),
    ("fit_input", Dim::None),
    ("fit_fix_gamma_1", Dim::None),
];

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Splits "6.814 GHz" / "6.814GHz" into (6.814, Some("GHz")).
fn split_unit(s: &str) -> Result<(f64, Option<&str>)> {
    let s = s.trim();
    let cut = s
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_alphabetic() || *c == 'µ')
        .last()
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    // an exponent marker is not a unit: "1e" never parses anyway
    let (num, unit) = s.split_at(cut);
    let num = num.trim();
    let v: f64 = num.parse().map_err(|_| cfg_err(format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(cfg_err(format!("value must be finite: {s:?}")));
    }
    Ok((v, (!unit.is_empty()).then_some(unit)))
}

fn scale(dim: Dim, unit: Option<&str>, key: &str) -> Result<f64> {
    match (dim, unit) {
        (Dim::None, None) => Ok(1.0),
        (Dim::None, Some(u)) => Err(cfg_err(format!("{key} is dimensionless, got unit {u:?}"))),
        (_, None) => Err(cfg_err(format!("{key} needs a unit"))),
        (Dim::Freq, Some(u)) => match u {
            "Hz" => Ok(1e-6),
            "kHz" => Ok(1e-3),
            "MHz" => Ok(1.0),
            "GHz" => Ok(1e3),
            _ => Err(cfg_err(format!("{key}: unknown frequency unit {u:?}"))),
        },
        (Dim::Time, Some(u)) => match u {
            "ns" => Ok(1e-3),
            "us" | "µs" => Ok(1.0),
            "ms" => Ok(1e3),
            _ => Err(cfg_err(format!("{key}: unknown time unit {u:?}"))),
        },
    }
}

/// MHz for frequencies, µs for times.
fn quantity(key: &str, dim: Dim, v: &str) -> Result<f64> {
    let (x, unit) = split_unit(v)?;
    Ok(x * scale(dim, unit, key)?)
}

fn quantity_list(key: &str, dim: Dim, v: &str) -> Result<Vec<f64>> {
    let items: Vec<&str> = v.split(',').map(str::trim).collect();
    let last_unit = split_unit(items.last().copied().unwrap_or(""))?.1;
    items
        .iter()
        .map(|it| {
            let (x, unit) = split_unit(it)?;
            Ok(x * scale(dim, unit.or(last_unit), key)?)
        })
        .collect()
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(cfg_err(format!("{key} must be positive, got {v}")))
    }
}

fn integer(key: &str, v: &str) -> Result<usize> {
    v.trim().parse().map_err(|_| cfg_err(format!("{key} must be a non-negative integer, got {v:?}")))
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(cfg_err(format!("{key} must be true or false, got {v:?}"))),
    }
}

fn plain(key: &str, v: &str) -> Result<f64> {
    quantity(key, Dim::None, v)
}

impl ScenarioConfig {
    /// Device defaults with the grid of the given scenario.
    pub fn new(scenario: Scenario) -> Self {
        let (sweep_start, sweep_stop) = match scenario {
            Scenario::LinewidthSweep => (20.0, 55.0),
            _ => (2.0, 60.0),
        };
        let (time_span, dt) = match scenario {
            Scenario::Relax => (1.0, 0.002),
            _ => (2.0, 0.001),
        };
        Self {
            scenario,
            spec: SystemSpec::default().with_rabi(mhz(37.0)),
            omega_d: None,
            omega_pc: None,
            cavity_levels: None,
            truncation: Truncation::Fixed,
            truncation_tol: 1e-3,
            drive_axis: DriveAxis::Rabi,
            band_mhz: None,
            df_mhz: 0.05,
            max_extensions: 4,
            time_span,
            dt,
            sweep_start,
            sweep_stop,
            sweep_step: 1.0,
            relax_drives: vec![14.5, 37.0],
            pi_rabi: 100.0,
            relax_window: 1.0,
            relax_dt: 0.002,
            target_photons: 1.4,
            t0_samples: crate::correlation::DEFAULT_T0_SAMPLES,
            fft_pad: 8,
            rtol: OdeOptions::default().rtol,
            atol: OdeOptions::default().atol,
            fit_kind: FitKind::Lorentzian,
            fit_input: None,
            fit_fix_gamma_1: false,
        }
    }

    /// Defaults overridden by the `key = value` lines of `text`.
    pub fn parse(scenario: Scenario, text: &str) -> Result<Self> {
        let mut cfg = Self::new(scenario);
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_assignment(line).map_err(|e| match e {
                Error::Config(m) => cfg_err(format!("line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    /// One `key=value` override.
    pub fn set_assignment(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv.split_once('=').ok_or_else(|| cfg_err(format!("expected key = value, got {kv:?}")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let dim = KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, d)| *d)
            .ok_or_else(|| cfg_err(format!("unknown key {key:?}")))?;
        let q = || quantity(key, dim, value);
        let s = &mut self.spec;
        match key {
            "omega_a" => s.omega_a = mhz(q()?),
            "omega_c" => s.omega_c = mhz(q()?),
            "omega_d" => self.omega_d = Some(mhz(q()?)),
            "omega_pc" => self.omega_pc = Some(mhz(q()?)),
            "gamma_1" => s.gamma_1 = mhz(q()?),
            "gamma_phi" => s.gamma_phi = mhz(q()?),
            "gamma_e" => s.gamma_e = mhz(q()?),
            "kappa" => s.kappa = mhz(q()?),
            "g_c" => s.g_c = mhz(q()?),
            "rabi" => s.rabi = mhz(q()?),
            "port_drive" => s.port_drive = mhz(q()?),
            "pump_amp" => s.pump_amp = mhz(q()?),
            "drive_phase" => s.drive_phase = plain(key, value)?,
            "n_th" => s.n_th = plain(key, value)?,
            "dephasing" => {
                s.dephasing = match value {
                    "rates" => DephasingConvention::Rates,
                    "literal" => DephasingConvention::Literal,
                    _ => return Err(cfg_err(format!("dephasing must be rates or literal, got {value:?}"))),
                }
            }
            "cavity_levels" => self.cavity_levels = Some(integer(key, value)?),
            "truncation" => {
                self.truncation = match value {
                    "fixed" => Truncation::Fixed,
                    "auto" => Truncation::Auto,
                    _ => return Err(cfg_err(format!("truncation must be fixed or auto, got {value:?}"))),
                }
            }
            "truncation_tol" => self.truncation_tol = positive(key, plain(key, value)?)?,
            "drive_axis" => {
                self.drive_axis = match value {
                    "rabi" => DriveAxis::Rabi,
                    "port" => DriveAxis::Port,
                    _ => return Err(cfg_err(format!("drive_axis must be rabi or port, got {value:?}"))),
                }
            }
            "band" => self.band_mhz = Some(positive(key, q()?)?),
            "df" => self.df_mhz = positive(key, q()?)?,
            "max_extensions" => self.max_extensions = integer(key, value)?,
            "time_span" => self.time_span = positive(key, q()?)?,
            "dt" => self.dt = positive(key, q()?)?,
            "sweep_start" => self.sweep_start = q()?,
            "sweep_stop" => self.sweep_stop = q()?,
            "sweep_step" => self.sweep_step = positive(key, q()?)?,
            "relax_drives" => self.relax_drives = quantity_list(key, dim, value)?,
            "pi_rabi" => self.pi_rabi = positive(key, q()?)?,
            "relax_window" => self.relax_window = positive(key, q()?)?,
            "relax_dt" => self.relax_dt = positive(key, q()?)?,
            "target_photons" => self.target_photons = positive(key, plain(key, value)?)?,
            "t0_samples" => self.t0_samples = integer(key, value)?,
            "fft_pad" => self.fft_pad = integer(key, value)?,
            "rtol" => self.rtol = positive(key, plain(key, value)?)?,
            "atol" => self.atol = positive(key, plain(key, value)?)?,
            "fit_kind" => {
                self.fit_kind = [FitKind::Transmon, FitKind::Reflection, FitKind::Lorentzian, FitKind::Exponential]
                    .into_iter()
                    .find(|k| k.name() == value)
                    .ok_or_else(|| cfg_err(format!("unknown fit_kind {value:?}")))?
            }
            "fit_input" => self.fit_input = Some(PathBuf::from(value)),
            "fit_fix_gamma_1" => self.fit_fix_gamma_1 = boolean(key, value)?,
            _ => unreachable!("key table and match disagree on {key}"),
        }
        Ok(())
    }

    pub fn cavity_levels(&self) -> usize {
        self.cavity_levels.unwrap_or(match self.scenario {
            Scenario::PumpedSpectrum => PUMPED_CAVITY_LEVELS,
            _ => VACUUM_CAVITY_LEVELS,
        })
    }

    /// Physical parameters with drive and pump frequencies and truncation filled in.
    pub fn resolved_spec(&self) -> Result<SystemSpec> {
        let mut s = self.spec.clone();
        s.omega_d = self.omega_d.unwrap_or(s.omega_a);
        s.omega_pc = self.omega_pc.unwrap_or(s.omega_c);
        let s = s.with_cavity_levels(self.cavity_levels()).map_err(|e| cfg_err(e.to_string()))?;
        s.validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(s)
    }

    pub fn ode(&self) -> OdeOptions {
        OdeOptions { rtol: self.rtol, atol: self.atol, ..OdeOptions::default() }
    }

    /// Swept values in MHz, inclusive of the end point within rounding.
    pub fn sweep_values(&self) -> Result<Vec<f64>> {
        if self.sweep_stop < self.sweep_start {
            return Err(cfg_err(format!("sweep_stop {} below sweep_start {}", self.sweep_stop, self.sweep_start)));
        }
        let n = ((self.sweep_stop - self.sweep_start) / self.sweep_step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.sweep_start + k as f64 * self.sweep_step).collect())
    }

    pub fn validate(&self) -> Result<()> {
        self.resolved_spec()?;
        if matches!(self.scenario, Scenario::Sweep | Scenario::LinewidthSweep) {
            self.sweep_values()?;
        }
        if self.dt > self.time_span || self.relax_dt > self.relax_window {
            return Err(cfg_err("sample spacing exceeds the time span"));
        }
        if self.scenario == Scenario::Relax && self.relax_drives.is_empty() {
            return Err(cfg_err("relax_drives is empty"));
        }
        if self.scenario == Scenario::Fit && self.fit_input.is_none() {
            return Err(cfg_err("fit scenario needs fit_input"));
        }
        if self.t0_samples == 0 {
            return Err(cfg_err("t0_samples must be at least 1"));
        }
        Ok(())
    }

    /// Every setting as config lines; parsing the output reproduces the
    /// configuration up to the last bit of the angular conversions.
    pub fn render(&self) -> String {
        let f = |w: f64| format!("{} MHz", format_float(to_mhz(w)));
        let m = |x: f64| format!("{} MHz", format_float(x));
        let us = |x: f64| format!("{} us", format_float(x));
        let s = &self.spec;
        let resolved_d = self.omega_d.unwrap_or(s.omega_a);
        let resolved_pc = self.omega_pc.unwrap_or(s.omega_c);
        let mut lines: Vec<(String, String)> = vec![
            ("omega_a".into(), f(s.omega_a)),
            ("omega_c".into(), f(s.omega_c)),
            ("omega_d".into(), f(resolved_d)),
            ("omega_pc".into(), f(resolved_pc)),
            ("gamma_1".into(), f(s.gamma_1)),
            ("gamma_phi".into(), f(s.gamma_phi)),
            ("gamma_e".into(), f(s.gamma_e)),
            ("kappa".into(), f(s.kappa)),
            ("g_c".into(), f(s.g_c)),
            ("rabi".into(), f(s.rabi)),
            ("port_drive".into(), f(s.port_drive)),
            ("pump_amp".into(), f(s.pump_amp)),
            ("drive_phase".into(), format_float(s.drive_phase)),
            ("n_th".into(), format_float(s.n_th)),
            (
                "dephasing".into(),
                match s.dephasing {
                    DephasingConvention::Rates => "rates".into(),
                    DephasingConvention::Literal => "literal".into(),
                },
            ),
            ("cavity_levels".into(), self.cavity_levels().to_string()),
            (
                "truncation".into(),
                match self.truncation {
                    Truncation::Fixed => "fixed".into(),
                    Truncation::Auto => "auto".into(),
                },
            ),
            ("truncation_tol".into(), format_float(self.truncation_tol)),
            (
                "drive_axis".into(),
                match self.drive_axis {
                    DriveAxis::Rabi => "rabi".into(),
                    DriveAxis::Port => "port".into(),
                },
            ),
        ];
        if let Some(b) = self.band_mhz {
            lines.push(("band".into(), m(b)));
        }
        lines.extend([
            ("df".into(), m(self.df_mhz)),
            ("max_extensions".into(), self.max_extensions.to_string()),
            ("time_span".into(), us(self.time_span)),
            ("dt".into(), us(self.dt)),
            ("sweep_start".into(), m(self.sweep_start)),
            ("sweep_stop".into(), m(self.sweep_stop)),
            ("sweep_step".into(), m(self.sweep_step)),
            (
                "relax_drives".into(),
                format!(
                    "{} MHz",
                    self.relax_drives.iter().map(|x| format_float(*x)).collect::<Vec<_>>().join(", ")
                ),
            ),
            ("pi_rabi".into(), m(self.pi_rabi)),
            ("relax_window".into(), us(self.relax_window)),
            ("relax_dt".into(), us(self.relax_dt)),
            ("target_photons".into(), format_float(self.target_photons)),
            ("t0_samples".into(), self.t0_samples.to_string()),
            ("fft_pad".into(), self.fft_pad.to_string()),
            ("rtol".into(), format_float(self.rtol)),
            ("atol".into(), format_float(self.atol)),
            ("fit_kind".into(), self.fit_kind.name().into()),
        ]);
        if let Some(p) = &self.fit_input {
            lines.push(("fit_input".into(), p.display().to_string()));
        }
        lines.push(("fit_fix_gamma_1".into(), self.fit_fix_gamma_1.to_string()));
        lines.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_encode_device_table() {
        let cfg = ScenarioConfig::new(Scenario::Spectrum);
        let s = cfg.resolved_spec().unwrap();
        assert_eq!(s, SystemSpec::default().with_rabi(mhz(37.0)));
        assert_eq!(to_mhz(s.omega_a), 6814.0);
        assert_eq!(to_mhz(s.omega_c), 6777.0);
        assert_eq!(to_mhz(s.kappa), 1.5);
        assert_eq!(s.hilbert.cavity_levels(), VACUUM_CAVITY_LEVELS);
        let p = ScenarioConfig::new(Scenario::PumpedSpectrum).resolved_spec().unwrap();
        assert_eq!(p.hilbert.cavity_levels(), PUMPED_CAVITY_LEVELS);
    }

    #[test]
    fn units_convert() {
        let cfg = ScenarioConfig::parse(
            Scenario::Spectrum,
            "omega_a = 6.9 GHz\nrabi=14.5MHz # comment\ntime_span = 500 ns\ng_c = 7500 kHz\n",
        )
        .unwrap();
        assert!((to_mhz(cfg.spec.omega_a) - 6900.0).abs() < 1e-9);
        assert!((to_mhz(cfg.spec.rabi) - 14.5).abs() < 1e-12);
        assert!((cfg.time_span - 0.5).abs() < 1e-15);
        assert!((to_mhz(cfg.spec.g_c) - 7.5).abs() < 1e-12);
        // drive follows the atom unless set
        assert_eq!(cfg.resolved_spec().unwrap().omega_d, cfg.spec.omega_a);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let e = ScenarioConfig::parse(Scenario::Spectrum, "kapa = 1 MHz").unwrap_err();
        assert!(e.is_config());
        assert!(e.to_string().contains("line 1"));
    }

    #[test]
    fn missing_or_wrong_unit_is_an_error() {
        let mut cfg = ScenarioConfig::new(Scenario::Spectrum);
        assert!(cfg.set("rabi", "37").is_err());
        assert!(cfg.set("rabi", "37 ns").is_err());
        assert!(cfg.set("n_th", "0.1 MHz").is_err());
        assert!(cfg.set("dt", "nan ns").is_err());
        assert!(cfg.set("cavity_levels", "1.5").is_err());
    }

    #[test]
    fn lists_share_trailing_unit() {
        let mut cfg = ScenarioConfig::new(Scenario::Relax);
        cfg.set("relax_drives", "14.5, 37 MHz").unwrap();
        assert_eq!(cfg.relax_drives, vec![14.5, 37.0]);
        cfg.set("relax_drives", "14.5 MHz, 0.05 GHz").unwrap();
        assert_eq!(cfg.relax_drives, vec![14.5, 50.0]);
    }

    #[test]
    fn render_parses_back() {
        let mut cfg = ScenarioConfig::new(Scenario::Sweep);
        cfg.set("sweep_step", "0.5 MHz").unwrap();
        cfg.set("band", "80 MHz").unwrap();
        cfg.set("drive_axis", "port").unwrap();
        let back = ScenarioConfig::parse(Scenario::Sweep, &cfg.render()).unwrap();
        assert_eq!(back.render(), cfg.render());
        assert_eq!(back.resolved_spec().unwrap().hilbert, cfg.resolved_spec().unwrap().hilbert);
        assert!((back.spec.omega_a - cfg.spec.omega_a).abs() <= 1e-12 * cfg.spec.omega_a);
    }

    #[test]
    fn sweep_values_inclusive() {
        let cfg = ScenarioConfig::new(Scenario::Sweep);
        let v = cfg.sweep_values().unwrap();
        assert_eq!(v.len(), 59);
        assert_eq!(v[0], 2.0);
        assert_eq!(*v.last().unwrap(), 60.0);
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!("spectra".parse::<Scenario>().unwrap_err().is_config());
    }
}

//! Piecewise-constant drive sequences.

use std::f64::consts::PI;

use crate::correlation::{output_field_trace, output_power_trace, FieldTrace, PowerTraces};
use crate::error::{Error, Result};
use crate::hilbert::{build_operators, SystemSpec};
use crate::lindblad::{build_system, evolve, DensityMatrix, EvolveOptions, Trajectory};

/// Relative tolerance on the pulse area of a π segment.
pub const PI_AREA_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub start_ns: f64,
    pub duration_ns: f64,
    /// Atom Rabi drive Ω, rad/µs.
    pub rabi: f64,
    pub phase: f64,
    /// Declared as a π-pulse; the area Ω·duration is checked.
    pub pi: bool,
}

impl Segment {
    pub fn end_ns(&self) -> f64 {
        self.start_ns + self.duration_ns
    }

    pub fn area(&self) -> f64 {
        self.rabi * self.duration_ns * 1e-3
    }
}

/// Samples `start_ns, start_ns + dt_ns, …` up to `stop_ns`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementWindow {
    pub start_ns: f64,
    pub stop_ns: f64,
    pub dt_ns: f64,
}

impl MeasurementWindow {
    pub fn times_us(&self) -> Vec<f64> {
        let n = ((self.stop_ns - self.start_ns) / self.dt_ns + 1e-9).floor() as usize;
        (0..=n).map(|k| (self.start_ns + k as f64 * self.dt_ns) * 1e-3).collect()
    }
}

/// Segments in time order; uncovered stretches evolve with the drive off.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseProgram {
    pub segments: Vec<Segment>,
    pub window: MeasurementWindow,
}

impl PulseProgram {
    pub fn new(window: MeasurementWindow) -> Self {
        Self { segments: Vec::new(), window }
    }

    fn next_start(&self) -> f64 {
        self.segments.last().map(Segment::end_ns).unwrap_or(0.0)
    }

    /// Appends a constant-drive segment right after the previous one.
    pub fn then(mut self, duration_ns: f64, rabi: f64, phase: f64) -> Self {
        let start_ns = self.next_start();
        self.segments.push(Segment { start_ns, duration_ns, rabi, phase, pi: false });
        self
    }

    /// Appends a π-pulse at amplitude `rabi`; the duration is π/Ω.
    pub fn then_pi(mut self, rabi: f64, phase: f64) -> Self {
        let start_ns = self.next_start();
        self.segments.push(Segment { start_ns, duration_ns: PI / rabi * 1e3, rabi, phase, pi: true });
        self
    }

    pub fn with_segment(mut self, seg: Segment) -> Self {
        self.segments.push(seg);
        self
    }

    pub fn end_ns(&self) -> f64 {
        self.next_start().max(self.window.stop_ns)
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.window;
        if !(w.dt_ns > 0.0) || !(w.start_ns >= 0.0) || !(w.stop_ns >= w.start_ns) {
            return Err(Error::InvalidGrid(format!(
                "measurement window [{}, {}] ns with step {} ns",
                w.start_ns, w.stop_ns, w.dt_ns
            )));
        }
        let mut prev_end = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration_ns > 0.0) || !s.duration_ns.is_finite() || !(s.start_ns >= 0.0) {
                return Err(Error::InvalidSpec(format!("segment {i}: duration must be positive")));
            }
            if !s.rabi.is_finite() || !s.phase.is_finite() {
                return Err(Error::InvalidSpec(format!("segment {i}: drive is not finite")));
            }
            if s.start_ns < prev_end - 1e-9 {
                return Err(Error::InvalidSpec(format!(
                    "segment {i} starts at {} ns, before the previous segment ends at {prev_end} ns",
                    s.start_ns
                )));
            }
            if s.pi && ((s.area().abs() - PI) / PI).abs() > PI_AREA_TOL {
                return Err(Error::InvalidSpec(format!("segment {i}: π-pulse area is {}", s.area())));
            }
            prev_end = s.end_ns();
        }
        Ok(())
    }

    fn drive_at(&self, a: f64, b: f64) -> (f64, f64) {
        let mid = 0.5 * (a + b);
        self.segments
            .iter()
            .find(|s| s.start_ns <= mid && mid < s.end_ns())
            .map(|s| (s.rabi, s.phase))
            .unwrap_or((0.0, 0.0))
    }
}

#[derive(Clone, Debug)]
pub struct PulseRun {
    /// Observables `sigma_z`, `sigma_minus`, `number` on the measurement window.
    pub trajectory: Trajectory,
    pub power: PowerTraces,
    pub field: FieldTrace,
}

/// Evolves the ground state through the program. The drive of `spec` is
/// replaced segment by segment; everything else is kept.
pub fn run_pulse_program(prog: &PulseProgram, spec: &SystemSpec, opts: &EvolveOptions) -> Result<PulseRun> {
    prog.validate()?;
    let space = spec.hilbert;
    let ops = build_operators(space)?;
    let number = ops.number();
    let observables = [("sigma_z", &ops.sigma_z), ("sigma_minus", &ops.sigma_minus), ("number", &number)];

    let mut cuts: Vec<f64> = vec![0.0, prog.end_ns(), prog.window.start_ns];
    for s in &prog.segments {
        cuts.push(s.start_ns);
        cuts.push(s.end_ns());
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let samples = prog.window.times_us();
    let mut next = 0;
    let mut rho = DensityMatrix::ground(space);
    let mut out: Option<Trajectory> = None;
    if samples.first() == Some(&0.0) {
        // nothing has evolved yet; record the initial state
        let first = evolve(&build_system(spec)?, &rho, &[0.0], &observables, opts)?;
        out = Some(first);
        next = 1;
    }
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (rabi, phase) = prog.drive_at(a, b);
        let mut s = spec.clone();
        s.rabi = rabi;
        s.drive_phase = phase;
        let l = build_system(&s)?;
        let (ta, tb) = (a * 1e-3, b * 1e-3);
        let mut grid = vec![ta];
        while next < samples.len() && samples[next] <= tb + 1e-12 {
            if samples[next] > ta {
                grid.push(samples[next]);
            }
            next += 1;
        }
        let recorded = grid.len() - 1;
        let end_is_sample = grid.last().is_some_and(|t| (t - tb).abs() < 1e-12);
        if !end_is_sample {
            grid.push(tb);
        }
        let tr = evolve(&l, &rho, &grid, &observables, opts)?;
        rho = tr.final_state.clone();
        out = Some(match out {
            None => take(&tr, 1, recorded),
            Some(acc) => append(acc, &tr, 1, recorded),
        });
    }
    let mut trajectory = out.ok_or_else(|| Error::InvalidGrid("empty measurement window".into()))?;
    trajectory.final_state = rho;
    let power = output_power_trace(&trajectory, spec)?;
    let field = output_field_trace(&trajectory, spec, 0.0)?;
    Ok(PulseRun { trajectory, power, field })
}

fn take(tr: &Trajectory, from: usize, count: usize) -> Trajectory {
    let r = from..from + count;
    Trajectory {
        times: tr.times[r.clone()].to_vec(),
        labels: tr.labels.clone(),
        values: tr.values.iter().map(|v| v[r.clone()].to_vec()).collect(),
        trace_deviation: tr.trace_deviation[r.clone()].to_vec(),
        hermiticity_deviation: tr.hermiticity_deviation[r.clone()].to_vec(),
        min_eigenvalue: tr.min_eigenvalue.as_ref().map(|m| m[r.clone()].to_vec()),
        states: tr.states.as_ref().map(|s| s[r.clone()].to_vec()),
        final_state: tr.final_state.clone(),
        stats: tr.stats,
    }
}

fn append(mut acc: Trajectory, tr: &Trajectory, from: usize, count: usize) -> Trajectory {
    let part = take(tr, from, count);
    acc.times.extend(part.times);
    for (a, v) in acc.values.iter_mut().zip(part.values) {
        a.extend(v);
    }
    acc.trace_deviation.extend(part.trace_deviation);
    acc.hermiticity_deviation.extend(part.hermiticity_deviation);
    if let (Some(a), Some(m)) = (acc.min_eigenvalue.as_mut(), part.min_eigenvalue) {
        a.extend(m);
    }
    if let (Some(a), Some(s)) = (acc.states.as_mut(), part.states) {
        a.extend(s);
    }
    acc.stats.accepted += part.stats.accepted;
    acc.stats.rejected += part.stats.rejected;
    acc.stats.evaluations += part.stats.evaluations;
    acc
}

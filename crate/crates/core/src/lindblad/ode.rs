//! Dormand–Prince 5(4) with PI step control and the free 4th-order dense
//! output, for complex state vectors.

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: Option<f64>,
    /// Steps below `h_min·max(1, |t|)` are an underflow.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, h_init: None, h_max: None, h_min: 1e-13, max_steps: 50_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn combine(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = ZERO;
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        *o = y[i] + acc * h;
    }
}

fn error_norm(y: &[C64], y_new: &[C64], err: &[C64], opts: &OdeOptions) -> f64 {
    let n = y.len().max(1);
    let mut acc = 0.0;
    for i in 0..y.len() {
        let sk = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
        let e = err[i].norm() / sk;
        acc += e * e;
    }
    (acc / n as f64).sqrt()
}

/// Integrates `dy/dt = f(t, y)` across `grid`, calling `sample(index, t, y)` at
/// every grid point (including the first, with `y0`).
pub fn integrate<F, S>(
    mut f: F,
    grid: &[f64],
    y0: Vec<C64>,
    opts: &OdeOptions,
    mut sample: S,
) -> Result<(Vec<C64>, OdeStats)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    S: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    if grid.is_empty() {
        return Ok((y0, OdeStats::default()));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidGrid(format!("time grid not strictly increasing at {}", w[0])));
        }
    }
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut y = y0;
    let mut t = grid[0];
    let t_end = *grid.last().unwrap();
    sample(0, t, &y)?;
    if grid.len() == 1 {
        return Ok((y, stats));
    }

    let mut k1 = vec![ZERO; n];
    let mut k2 = vec![ZERO; n];
    let mut k3 = vec![ZERO; n];
    let mut k4 = vec![ZERO; n];
    let mut k5 = vec![ZERO; n];
    let mut k6 = vec![ZERO; n];
    let mut k7 = vec![ZERO; n];
    let mut tmp = vec![ZERO; n];
    let mut y_new = vec![ZERO; n];
    let mut err = vec![ZERO; n];

    f(t, &y, &mut k1);
    stats.evaluations += 1;

    let h_max = opts.h_max.unwrap_or(t_end - t).min(t_end - t);
    let mut h = match opts.h_init {
        Some(h) => h,
        None => initial_step(&mut f, t, &y, &k1, opts, &mut tmp, &mut k2, &mut stats),
    }
    .min(h_max);

    let beta = 0.04;
    let expo1 = 0.2 - beta * 0.75;
    let safe = 0.9;
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut next_sample = 1;

    while next_sample < grid.len() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        if h < opts.h_min * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let remaining = t_end - t;
        if h > remaining {
            h = remaining;
        }

        combine(&mut tmp, &y, h, &[(A21, &k1)]);
        f(t + C2 * h, &tmp, &mut k2);
        combine(&mut tmp, &y, h, &[(A31, &k1), (A32, &k2)]);
        f(t + C3 * h, &tmp, &mut k3);
        combine(&mut tmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        f(t + C4 * h, &tmp, &mut k4);
        combine(&mut tmp, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        f(t + C5 * h, &tmp, &mut k5);
        combine(&mut tmp, &y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        f(t + h, &tmp, &mut k6);
        combine(&mut y_new, &y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        f(t + h, &y_new, &mut k7);
        stats.evaluations += 6;

        for i in 0..n {
            err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        }
        let e = error_norm(&y, &y_new, &err, opts);
        if !e.is_finite() {
            stats.rejected += 1;
            h *= 0.2;
            last_rejected = true;
            continue;
        }
        let fac11 = e.powf(expo1);

        if e <= 1.0 {
            stats.accepted += 1;
            let t_new = t + h;
            // dense output on (t, t_new]
            while next_sample < grid.len() && grid[next_sample] <= t_new + 1e-12 * t_new.abs().max(1.0) {
                let ts = grid[next_sample];
                if (ts - t_new).abs() <= 1e-12 * t_new.abs().max(1.0) {
                    sample(next_sample, ts, &y_new)?;
                } else {
                    let theta = (ts - t) / h;
                    let theta1 = 1.0 - theta;
                    for i in 0..n {
                        let ydiff = y_new[i] - y[i];
                        let bspl = k1[i] * h - ydiff;
                        let c3 = ydiff - k7[i] * h - bspl;
                        let c4 = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
                        tmp[i] = y[i] + (ydiff + (bspl + (c3 + c4 * theta1) * theta) * theta1) * theta;
                    }
                    sample(next_sample, ts, &tmp)?;
                }
                next_sample += 1;
            }

            let mut fac = fac11 / facold.powf(beta);
            fac = (fac / safe).clamp(0.1, 5.0);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            facold = e.max(1e-4);
            last_rejected = false;

            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;
            h = h_new.min(h_max);
        } else {
            stats.rejected += 1;
            h /= (fac11 / safe).min(5.0);
            last_rejected = true;
        }
    }
    Ok((y, stats))
}

#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    f: &mut F,
    t: f64,
    y: &[C64],
    f0: &[C64],
    opts: &OdeOptions,
    tmp: &mut [C64],
    f1: &mut [C64],
    stats: &mut OdeStats,
) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y.len().max(1) as f64;
    let sk = |i: usize| opts.atol + opts.rtol * y[i].norm();
    let d0 = (y.iter().enumerate().map(|(i, v)| (v.norm() / sk(i)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().enumerate().map(|(i, v)| (v.norm() / sk(i)).powi(2)).sum::<f64>() / n).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    for i in 0..y.len() {
        tmp[i] = y[i] + f0[i] * h0;
    }
    f(t + h0, tmp, f1);
    stats.evaluations += 1;
    let d2 = (f1
        .iter()
        .zip(f0)
        .enumerate()
        .map(|(i, (a, b))| ((a - b).norm() / sk(i)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1)
}

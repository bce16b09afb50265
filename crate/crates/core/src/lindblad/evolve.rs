use crate::error::{Error, Result};
use crate::hilbert::Operator;
use crate::linalg::{C64, ONE};

use super::generator::Liouvillian;
use super::ode::{integrate, OdeOptions, OdeStats};
use super::state::DensityMatrix;

/// Trace drift beyond which a trajectory is reported as a numerical failure.
pub const TRAJECTORY_TRACE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Default)]
pub struct EvolveOptions {
    pub ode: OdeOptions,
    /// Diagonalize ρ at every sample and fail on eigenvalues below −1e−6.
    pub check_positivity: bool,
    pub keep_states: bool,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `values[k][i]` is observable k at `times[i]`.
    pub values: Vec<Vec<C64>>,
    pub trace_deviation: Vec<f64>,
    pub hermiticity_deviation: Vec<f64>,
    pub min_eigenvalue: Option<Vec<f64>>,
    pub states: Option<Vec<DensityMatrix>>,
    pub final_state: DensityMatrix,
    pub stats: OdeStats,
}

impl Trajectory {
    pub fn series(&self, label: &str) -> Option<&[C64]> {
        self.labels.iter().position(|l| l == label).map(|k| self.values[k].as_slice())
    }

    pub fn real_series(&self, label: &str) -> Option<Vec<f64>> {
        self.series(label).map(|s| s.iter().map(|c| c.re).collect())
    }
}

/// ρ(t) on `grid` (which starts at the time of `rho0`), recording `⟨O⟩ = tr(Oρ)`.
pub fn evolve(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    grid: &[f64],
    observables: &[(&str, &Operator)],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    rho0.validate()?;
    let space = rho0.space();
    if l.hilbert_dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: l.hilbert_dim() });
    }
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty time grid".into()));
    }
    for (_, op) in observables {
        if op.dim() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: op.dim() });
        }
    }

    let m = grid.len();
    let mut values = vec![Vec::with_capacity(m); observables.len()];
    let mut trace_dev = Vec::with_capacity(m);
    let mut herm_dev = Vec::with_capacity(m);
    let mut min_eig = opts.check_positivity.then(|| Vec::with_capacity(m));
    let mut states = opts.keep_states.then(|| Vec::with_capacity(m));

    let (y, stats) = integrate(
        |t, x, out| l.apply(t, x, out),
        grid,
        rho0.as_slice().to_vec(),
        &opts.ode,
        |_, t, y| {
            let rho = DensityMatrix::from_vec_unchecked(space, y.to_vec())?;
            for (k, (_, op)) in observables.iter().enumerate() {
                values[k].push(rho.expect(op));
            }
            let td = (rho.trace() - ONE).norm();
            if !(td <= TRAJECTORY_TRACE_TOL) {
                return Err(Error::InvalidState(format!("trace drifted by {td:e} at t = {t}")));
            }
            trace_dev.push(td);
            herm_dev.push(rho.matrix().hermiticity_deviation());
            if let Some(me) = min_eig.as_mut() {
                let e = rho.min_eigenvalue()?;
                if e < -1e-6 {
                    return Err(Error::InvalidState(format!("eigenvalue {e:e} at t = {t}")));
                }
                me.push(e);
            }
            if let Some(s) = states.as_mut() {
                s.push(rho);
            }
            Ok(())
        },
    )?;

    Ok(Trajectory {
        times: grid.to_vec(),
        labels: observables.iter().map(|(n, _)| n.to_string()).collect(),
        values,
        trace_deviation: trace_dev,
        hermiticity_deviation: herm_dev,
        min_eigenvalue: min_eig,
        states,
        final_state: DensityMatrix::from_vec_unchecked(space, y)?,
        stats,
    })
}

/// Uniform grid `t0, t0+dt, …` covering `[t0, t1]`.
pub fn uniform_grid(t0: f64, t1: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(t1 >= t0) || !dt.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidGrid(format!("cannot build grid [{t0}, {t1}] with step {dt}")));
    }
    let n = ((t1 - t0) / dt + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| t0 + k as f64 * dt).collect())
}

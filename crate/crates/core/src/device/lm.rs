//! Levenberg–Marquardt least squares with analytic Jacobians.

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when max_j |J_jᵀ r| / (‖J_j‖‖r‖) falls below this.
    pub gtol: f64,
    /// Relative cost reduction below which progress has stalled.
    pub ftol: f64,
    /// Relative step size below which progress has stalled.
    pub xtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 200, gtol: 1e-10, ftol: 1e-15, xtol: 1e-15 }
    }
}

/// Gradient measure accepted when a fit stalls on ftol/xtol before reaching gtol.
const STALL_GRADIENT: f64 = 1e-6;
/// Residual reduction treated as an exact fit when progress stalls.
const EXACT_FIT: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub names: Vec<&'static str>,
    pub params: Vec<f64>,
    /// ‖r‖₂ at the solution.
    pub residual_norm: f64,
    /// 95% linearized confidence half-widths (1.96 σ from (JᵀJ)⁻¹ s²).
    pub half_widths: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Cosine measure between residual and Jacobian columns at the solution.
    pub gradient_measure: f64,
    pub warnings: Vec<String>,
    /// Quantities derived from the parameters (e.g. η = γ_e/2γ₂).
    pub derived: Vec<(&'static str, f64)>,
}

impl FitReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| *n == name)
            .map(|i| self.params[i])
            .or_else(|| self.derived.iter().find(|(n, _)| *n == name).map(|(_, v)| *v))
    }
}

/// A least-squares model: residuals r(p) and Jacobian rows ∂r_i/∂p.
pub trait Model {
    fn len(&self) -> usize;
    fn residuals(&self, p: &[f64], out: &mut [f64]);
    /// Row-major m×n Jacobian.
    fn jacobian(&self, p: &[f64], out: &mut [f64]);
    /// ‖y‖₂ of the fitted data, the scale for recognising an exact fit.
    fn data_norm(&self) -> f64 {
        0.0
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn gradient_measure(jac: &[f64], r: &[f64], n: usize) -> f64 {
    let rn = norm(r);
    if rn == 0.0 {
        return 0.0;
    }
    let m = r.len();
    (0..n)
        .map(|j| {
            let (mut g, mut cn) = (0.0, 0.0);
            for i in 0..m {
                g += jac[i * n + j] * r[i];
                cn += jac[i * n + j] * jac[i * n + j];
            }
            if cn == 0.0 {
                0.0
            } else {
                g.abs() / (cn.sqrt() * rn)
            }
        })
        .fold(0.0, f64::max)
}

fn normal_matrix(jac: &[f64], m: usize, n: usize) -> Mat<f64> {
    Mat::from_fn(n, n, |a, b| (0..m).map(|i| jac[i * n + a] * jac[i * n + b]).sum())
}

pub fn levenberg_marquardt(
    model: &impl Model,
    names: &[&'static str],
    p0: &[f64],
    opts: &LmOptions,
) -> Result<FitReport> {
    let n = p0.len();
    let m = model.len();
    if m < n {
        return Err(Error::InsufficientData(format!("{m} residuals for {n} parameters")));
    }
    let mut p = p0.to_vec();
    let mut r = vec![0.0; m];
    let mut r_trial = vec![0.0; m];
    let mut jac = vec![0.0; m * n];
    model.residuals(&p, &mut r);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateDesign("model is not finite at the initial guess".into()));
    }
    let initial_norm = norm(&r);
    let mut cost = 0.5 * initial_norm.powi(2);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    let mut warnings = Vec::new();
    let mut measure;

    loop {
        model.jacobian(&p, &mut jac);
        measure = gradient_measure(&jac, &r, n);
        if measure <= opts.gtol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;

        let a = normal_matrix(&jac, m, n);
        let g: Vec<f64> = (0..n).map(|j| (0..m).map(|i| jac[i * n + j] * r[i]).sum()).collect();
        let mut stalled = false;
        loop {
            let mut damped = a.clone();
            for j in 0..n {
                damped[(j, j)] += lambda * a[(j, j)].max(1e-300);
            }
            let rhs = Mat::from_fn(n, 1, |j, _| -g[j]);
            let delta = damped.partial_piv_lu().solve(&rhs);
            let step: Vec<f64> = (0..n).map(|j| delta[(j, 0)]).collect();
            let trial: Vec<f64> = p.iter().zip(&step).map(|(a, b)| a + b).collect();
            model.residuals(&trial, &mut r_trial);
            let trial_cost = 0.5 * norm(&r_trial).powi(2);
            if trial_cost.is_finite() && trial_cost <= cost {
                let reduction = cost - trial_cost;
                let step_small = norm(&step) <= opts.xtol * (norm(&p) + opts.xtol);
                p = trial;
                std::mem::swap(&mut r, &mut r_trial);
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-15);
                if reduction <= opts.ftol * cost || step_small {
                    stalled = true;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e20 {
                stalled = true;
                break;
            }
        }
        if stalled {
            model.jacobian(&p, &mut jac);
            measure = gradient_measure(&jac, &r, n);
            // residuals at rounding level leave the cosine measure undefined
            let exact = norm(&r) <= EXACT_FIT * initial_norm.max(model.data_norm());
            converged = measure <= STALL_GRADIENT || exact;
            if converged && !exact && measure > opts.gtol {
                warnings.push(format!("stopped on stalled progress with gradient measure {measure:.2e}"));
            }
            break;
        }
    }
    if !converged {
        return Err(Error::FitNonConvergence { iterations });
    }

    let rn = norm(&r);
    let dof = (m - n).max(1) as f64;
    let s2 = rn * rn / dof;
    let a = normal_matrix(&jac, m, n);
    let inv = a.partial_piv_lu().solve(Mat::<f64>::identity(n, n));
    let half_widths = (0..n)
        .map(|j| {
            let v = inv[(j, j)] * s2;
            if v.is_finite() && v >= 0.0 {
                1.96 * v.sqrt()
            } else {
                f64::NAN
            }
        })
        .collect();

    Ok(FitReport {
        names: names.to_vec(),
        params: p,
        residual_norm: rn,
        half_widths,
        iterations,
        converged,
        gradient_measure: measure,
        warnings,
        derived: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// y = a·x + b·x², linear in the parameters.
    struct Quad {
        x: Vec<f64>,
        y: Vec<f64>,
    }

    impl Model for Quad {
        fn len(&self) -> usize {
            self.x.len()
        }
        fn residuals(&self, p: &[f64], out: &mut [f64]) {
            for i in 0..self.x.len() {
                out[i] = p[0] * self.x[i] + p[1] * self.x[i].powi(2) - self.y[i];
            }
        }
        fn jacobian(&self, _p: &[f64], out: &mut [f64]) {
            for i in 0..self.x.len() {
                out[2 * i] = self.x[i];
                out[2 * i + 1] = self.x[i].powi(2);
            }
        }
    }

    #[test]
    fn solves_linear_problem() {
        let x: Vec<f64> = (0..10).map(|k| k as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|x| 2.0 * x - 0.5 * x * x).collect();
        let r = levenberg_marquardt(&Quad { x, y }, &["a", "b"], &[0.0, 0.0], &LmOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.params[0] - 2.0).abs() < 1e-10);
        assert!((r.params[1] + 0.5).abs() < 1e-10);
        assert_eq!(r.get("b"), Some(r.params[1]));
    }

    #[test]
    fn underdetermined_rejected() {
        let q = Quad { x: vec![1.0], y: vec![1.0] };
        assert!(levenberg_marquardt(&q, &["a", "b"], &[0.0, 0.0], &LmOptions::default()).is_err());
    }
}

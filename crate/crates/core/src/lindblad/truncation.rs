use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpec, SystemSpec};

#[derive(Clone, Copy, Debug)]
pub struct TruncationOptions {
    pub rel_tol: f64,
    pub start: usize,
    pub step: usize,
    pub max_levels: usize,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-3, start: 2, step: 2, max_levels: 40 }
    }
}

#[derive(Clone, Debug)]
pub struct TruncationReport {
    pub hilbert: HilbertSpec,
    /// (N_c, relative change when going to N_c + step)
    pub history: Vec<(usize, f64)>,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Smallest N_c whose observable changes by less than `rel_tol` (sup norm,
/// relative) when the cavity is enlarged by `step` levels.
pub fn converge_truncation<F>(spec: &SystemSpec, mut observable: F, opts: &TruncationOptions) -> Result<TruncationReport>
where
    F: FnMut(&SystemSpec) -> Result<Vec<f64>>,
{
    let at = |n: usize| spec.clone().with_cavity_levels(n);
    let mut n = opts.start.max(2);
    let mut prev = observable(&at(n)?)?;
    let mut history = Vec::new();
    let mut change = f64::INFINITY;
    while n + opts.step <= opts.max_levels {
        let next = observable(&at(n + opts.step)?)?;
        if next.len() != prev.len() {
            return Err(Error::DimensionMismatch { expected: prev.len(), got: next.len() });
        }
        let diff: Vec<f64> = next.iter().zip(&prev).map(|(a, b)| a - b).collect();
        let scale = sup(&next);
        change = if scale <= 1e-300 { sup(&diff) } else { sup(&diff) / scale };
        history.push((n, change));
        if change < opts.rel_tol {
            return Ok(TruncationReport { hilbert: HilbertSpec::new(n)?, history });
        }
        n += opts.step;
        prev = next;
    }
    Err(Error::TruncationNotConverged { max_levels: opts.max_levels, change })
}

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::hilbert::HilbertSpec;
use crate::linalg::{C64, ONE, ZERO};

use super::generator::Liouvillian;
use super::state::DensityMatrix;

/// Required bound on max|L ρ_ss|.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;
/// Relative disagreement between the two normalization rows that marks a degenerate null space.
const UNIQUENESS_TOL: f64 = 1e-6;

fn solve_with_trace_row(dense: &Mat<C64>, d: usize, row: usize) -> Mat<C64> {
    let n = d * d;
    let mut m = dense.clone();
    for j in 0..n {
        m[(row, j)] = ZERO;
    }
    for i in 0..d {
        m[(row, i * d + i)] = ONE;
    }
    let mut rhs = Mat::<C64>::zeros(n, 1);
    rhs[(row, 0)] = ONE;
    let lu = m.partial_piv_lu();
    let mut x = lu.solve(&rhs);
    // one step of iterative refinement
    let r = &rhs - &m * &x;
    let dx = lu.solve(&r);
    x += &dx;
    x
}

/// Unique ρ_ss with L ρ_ss = 0, tr ρ_ss = 1.
pub fn steady_state(l: &Liouvillian, space: HilbertSpec) -> Result<DensityMatrix> {
    if !l.is_static() {
        return Err(Error::TimeDependentGenerator);
    }
    let d = l.hilbert_dim();
    if d != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: d });
    }
    let dense = l.dense_static();
    let x0 = solve_with_trace_row(&dense, d, 0);
    let x1 = solve_with_trace_row(&dense, d, d * d - 1);

    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut finite = true;
    for i in 0..d * d {
        finite &= x0[(i, 0)].is_finite() && x1[(i, 0)].is_finite();
        diff = diff.max((x0[(i, 0)] - x1[(i, 0)]).norm());
        scale = scale.max(x0[(i, 0)].norm());
    }
    if !finite || diff > UNIQUENESS_TOL * scale.max(1.0) {
        return Err(Error::DegenerateSteadyState(format!(
            "solutions from two normalization rows differ by {diff:e}"
        )));
    }

    let v: Vec<C64> = (0..d * d).map(|i| x0[(i, 0)]).collect();
    let rho = DensityMatrix::from_vec_unchecked(space, v)?.normalized()?;
    let residual = l.residual(rho.matrix());
    if residual >= STEADY_RESIDUAL_TOL {
        return Err(Error::LinearAlgebra(format!("steady-state residual {residual:e} exceeds tolerance")));
    }
    let min = rho.min_eigenvalue()?;
    if min < -1e-8 {
        return Err(Error::DegenerateSteadyState(format!("solution has negative eigenvalue {min:e}")));
    }
    Ok(rho)
}

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpec, Operator};
use crate::linalg::{CMatrix, C64, ONE};

/// Tolerances used by [`DensityMatrix::validate`].
pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpec,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validated constructor: unit trace, Hermitian, positive semidefinite.
    pub fn new(space: HilbertSpec, mat: CMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(space, mat)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Dimension-checked but otherwise unvalidated.
    pub fn from_matrix_unchecked(space: HilbertSpec, mat: CMatrix) -> Result<Self> {
        if mat.dim() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: mat.dim() });
        }
        Ok(Self { space, mat })
    }

    pub fn from_vec_unchecked(space: HilbertSpec, v: Vec<C64>) -> Result<Self> {
        let mat = CMatrix::from_row_major(space.dim(), v)?;
        Self::from_matrix_unchecked(space, mat)
    }

    /// |ψ⟩⟨ψ| for a normalized copy of `psi`.
    pub fn pure(space: HilbertSpec, psi: &[C64]) -> Result<Self> {
        if psi.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: psi.len() });
        }
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("state vector has zero or non-finite norm".into()));
        }
        let mat = CMatrix::from_fn(space.dim(), |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Ok(Self { space, mat })
    }

    /// |atom, n⟩⟨atom, n|
    pub fn basis(space: HilbertSpec, atom: usize, n: usize) -> Self {
        let mut mat = CMatrix::zeros(space.dim());
        let i = space.index(atom, n);
        mat[(i, i)] = ONE;
        Self { space, mat }
    }

    /// |g, 0⟩⟨g, 0|
    pub fn ground(space: HilbertSpec) -> Self {
        Self::basis(space, 0, 0)
    }

    pub fn space(&self) -> HilbertSpec {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn as_slice(&self) -> &[C64] {
        self.mat.as_slice()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// tr(O ρ)
    pub fn expect(&self, op: &Operator) -> C64 {
        op.matrix().trace_product(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let h = self.hermitian_part();
        let ev = h.hermitian_eigenvalues()?;
        Ok(ev.into_iter().fold(f64::INFINITY, f64::min))
    }

    pub fn hermitian_part(&self) -> CMatrix {
        let mut h = self.mat.add(&self.mat.adjoint());
        for v in h.as_mut_slice() {
            *v *= 0.5;
        }
        h
    }

    /// Hermitian part rescaled to unit trace.
    pub fn normalized(&self) -> Result<Self> {
        let h = self.hermitian_part();
        let tr = h.trace().re;
        if !(tr.abs() > 0.0) || !tr.is_finite() {
            return Err(Error::InvalidState(format!("trace {tr} cannot be normalized")));
        }
        Ok(Self { space: self.space, mat: h.scale(C64::new(1.0 / tr, 0.0)) })
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mat.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let herm = self.mat.hermiticity_deviation();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let min = self.min_eigenvalue()?;
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Population of cavity Fock level n, traced over the atom.
    pub fn photon_distribution(&self) -> Vec<f64> {
        let nc = self.space.cavity_levels();
        (0..nc)
            .map(|n| {
                (0..self.space.atom_levels())
                    .map(|a| {
                        let i = self.space.index(a, n);
                        self.mat[(i, i)].re
                    })
                    .sum()
            })
            .collect()
    }
}

/// ρ·A as a raw (non-density) matrix, for regression propagation.
pub fn right_multiply(rho: &DensityMatrix, a: &Operator) -> CMatrix {
    rho.matrix().matmul(a.matrix())
}

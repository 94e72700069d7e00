use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-10;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let skew = max_anti_hermitian(&entries);
        if skew > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {skew:.3e})")));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let rho = DensityMatrix { entries };
        let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -EIGEN_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(rho)
    }

    /// `|ψ><ψ|` for a normalized vector.
    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    /// Partial transpose on the second factor of a `d_a × d_b` split.
    pub fn partial_transpose(&self, dims: (usize, usize)) -> Result<DMatrix<C64>> {
        let (da, db) = dims;
        if da * db != self.dim() {
            return Err(Error::InvalidState(format!(
                "dimension {} does not factor as {da}x{db}",
                self.dim()
            )));
        }
        Ok(DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            let (a, b) = (r / db, r % db);
            let (a2, b2) = (c / db, c % db);
            self.entries[(a * db + b2, a2 * db + b)]
        }))
    }
}

/// Sum of the magnitudes of the negative eigenvalues of the partial
/// transpose over the second factor.
pub fn negativity(rho: &DensityMatrix, dims: (usize, usize)) -> Result<f64> {
    let pt = rho.partial_transpose(dims)?;
    Ok(hermitian_eigenvalues(&pt)
        .into_iter()
        .filter(|&l| l < 0.0)
        .map(f64::abs)
        .sum())
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    // symmetrize away rounding so the solver sees an exactly Hermitian input
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().collect()
}

fn max_anti_hermitian(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

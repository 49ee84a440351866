//! Thin wrappers over the dense decompositions the analyses need.

use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, Matrix2};

use crate::{Result, VocError};

const SCHUR_MAX_ITER: usize = 10_000;
// deflation thresholds tried in order; clustered spectra may stall at the first
const SCHUR_EPS: [f64; 4] = [f64::EPSILON, 8.0 * f64::EPSILON, 1e-14, 1e-13];

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    for eps in SCHUR_EPS {
        if let Some(schur) = nalgebra::linalg::Schur::try_new(m.clone(), eps, SCHUR_MAX_ITER) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(VocError::Singular("Schur iteration did not converge"))
}

/// Eigenvalues of the symmetric part `(M + Mᵀ)/2`, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn lambda_min_sym(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).first().copied().unwrap_or(f64::NAN)
}

pub fn lambda_max_sym(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).last().copied().unwrap_or(f64::NAN)
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().max()
}

/// True when every eigenvalue has strictly negative real part.
pub fn is_hurwitz(m: &DMatrix<f64>) -> Result<bool> {
    Ok(eigenvalues(m)?.iter().all(|z| z.re < 0.0))
}

/// Orthonormal basis (as columns) of the eigenspace of symmetric `p` whose
/// eigenvalues exceed `threshold`. For a projector with `threshold = ½` this is
/// a basis of its range.
pub fn range_basis(p: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let sym = (p + p.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let cols: Vec<_> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > threshold)
        .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(p.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Smallest eigenvalue of the symmetric 2×2 matrix `[[a, b], [b, c]]`.
pub fn lambda_min_sym2(m: &Matrix2<f64>) -> f64 {
    let a = m[(0, 0)];
    let c = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let mean = 0.5 * (a + c);
    let radius = libm::hypot(0.5 * (a - c), b);
    mean - radius
}

/// Solves `a·x = b` with partial-pivot LU.
pub fn solve(a: &DMatrix<f64>, b: &nalgebra::DVector<f64>, what: &'static str) -> Result<nalgebra::DVector<f64>> {
    a.clone().lu().solve(b).ok_or(VocError::Singular(what))
}

pub fn inverse(a: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    a.clone().try_inverse().ok_or(VocError::Singular(what))
}

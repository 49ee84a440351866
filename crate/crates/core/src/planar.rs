//! Two-dimensional building blocks: `I₂`, `J₂`, rotations, and matrices made
//! of 2×2 blocks acting on per-node stacked planar vectors.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

/// `J₂ = [[0, −1], [1, 0]]`, rotation by +π/2.
pub fn j2() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// `a·I₂ + b·J₂ = [[a, −b], [b, a]]`.
///
/// Every impedance block in the model has this form, which is why they all
/// commute with `J₂` and with rotations.
pub fn rotor_block(a: f64, b: f64) -> Matrix2<f64> {
    Matrix2::new(a, -b, b, a)
}

/// `R(γ) = [[cos γ, sin γ], [−sin γ, cos γ]]`, the αβ → dq transform at angle γ.
pub fn rotation(gamma: f64) -> Matrix2<f64> {
    let (s, c) = libm::sincos(gamma);
    Matrix2::new(c, s, -s, c)
}

/// Applies `R(γ)` (or `R(γ)ᵀ` when `transpose`) in place to every 2-block of
/// `x`, using precomputed `(sin γ, cos γ)`.
pub fn rotate_blocks(x: &mut [f64], sin: f64, cos: f64, transpose: bool) {
    let s = if transpose { -sin } else { sin };
    for pair in x.chunks_exact_mut(2) {
        let (a, b) = (pair[0], pair[1]);
        pair[0] = cos * a + s * b;
        pair[1] = -s * a + cos * b;
    }
}

/// Returns the `k`-th planar sub-vector of a stacked vector.
#[inline]
pub fn node(x: &[f64], k: usize) -> Vector2<f64> {
    Vector2::new(x[2 * k], x[2 * k + 1])
}

/// Semantic tag attached to a [`PlanarMatrix`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixRole {
    IncidenceExtended,
    Impedance,
    Projector,
    Generic,
}

/// A dense matrix whose row and column counts are even, interpreted as a grid
/// of 2×2 blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarMatrix {
    matrix: DMatrix<f64>,
    role: MatrixRole,
}

impl PlanarMatrix {
    /// Wraps `matrix`; panics if a dimension is odd.
    pub fn new(matrix: DMatrix<f64>, role: MatrixRole) -> Self {
        assert!(
            matrix.nrows() % 2 == 0 && matrix.ncols() % 2 == 0,
            "planar matrices have even dimensions"
        );
        Self { matrix, role }
    }

    /// Block-diagonal matrix from a sequence of 2×2 blocks.
    pub fn block_diagonal<I>(blocks: I, role: MatrixRole) -> Self
    where
        I: IntoIterator<Item = Matrix2<f64>>,
    {
        let blocks: alloc::vec::Vec<_> = blocks.into_iter().collect();
        let dim = 2 * blocks.len();
        let mut m = DMatrix::zeros(dim, dim);
        for (k, b) in blocks.iter().enumerate() {
            m.fixed_view_mut::<2, 2>(2 * k, 2 * k).copy_from(b);
        }
        Self::new(m, role)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn role(&self) -> MatrixRole {
        self.role
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// The `(i, j)` 2×2 block.
    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        self.matrix.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }
}

/// Replaces each scalar entry `m_ij` of `m` by `m_ij·I₂`.
///
/// This is `M ⊗ I₂`, the extension compatible with per-node stacking.
pub fn extend_planar(m: &DMatrix<f64>) -> PlanarMatrix {
    extend_planar_as(m, MatrixRole::Generic)
}

pub(crate) fn extend_planar_as(m: &DMatrix<f64>, role: MatrixRole) -> PlanarMatrix {
    let mut out = DMatrix::zeros(2 * m.nrows(), 2 * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let a = m[(i, j)];
            out[(2 * i, 2 * j)] = a;
            out[(2 * i + 1, 2 * j + 1)] = a;
        }
    }
    PlanarMatrix::new(out, role)
}

/// `𝓙 = 𝓘 ⊗ J₂` of size `2n × 2n`.
pub fn stacked_j(n: usize) -> DMatrix<f64> {
    PlanarMatrix::block_diagonal((0..n).map(|_| j2()), MatrixRole::Generic).into_matrix()
}

/// `𝓡(γ) = 𝓘 ⊗ R(γ)` of size `2n × 2n`.
pub fn stacked_rotation(n: usize, gamma: f64) -> DMatrix<f64> {
    let r = rotation(gamma);
    PlanarMatrix::block_diagonal((0..n).map(|_| r), MatrixRole::Generic).into_matrix()
}

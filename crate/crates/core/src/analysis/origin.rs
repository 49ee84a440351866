use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix};

use crate::controller::{wrap_angle, ControllerGains, Setpoints};
use crate::linalg;
use crate::network::Network;
use crate::planar::{rotor_block, MatrixRole, PlanarMatrix};
use crate::{Result, VocError};

/// Linearization of the reduced controller dynamics at `u = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct OriginLinearization {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<Complex<f64>>,
    /// Eigenvalues with strictly positive real part.
    pub unstable_count: usize,
    /// `unstable_count ≥ 2`.
    pub lemma2_holds: bool,
}

fn linearization(blocks: impl Iterator<Item = nalgebra::Matrix2<f64>>, network: &Network, sp: &Setpoints) -> Result<OriginLinearization> {
    let a = PlanarMatrix::block_diagonal(blocks, MatrixRole::Generic).into_matrix();
    let matrix = a - sp.voltage_projector().matrix() * network.impedance_inv();
    let eigenvalues = linalg::eigenvalues(&matrix)?;
    let unstable_count = eigenvalues.iter().filter(|z| z.re > 0.0).count();
    Ok(OriginLinearization {
        matrix,
        eigenvalues,
        unstable_count,
        lemma2_holds: unstable_count >= 2,
    })
}

/// `diag(A₁, …, Aₙ) − Π_dq·L⁻¹` with `Aₖ = γₖI₂ + αₖθ*ₖJ₂`.
///
/// The count of unstable eigenvalues is reported, not asserted.
pub fn jacobian_at_origin(network: &Network, sp: &Setpoints, gains: &ControllerGains) -> Result<OriginLinearization> {
    let blocks = (0..sp.n()).map(|k| rotor_block(gains.gamma()[k], gains.alpha()[k] * sp.phase()[k]));
    linearization(blocks, network, sp)
}

/// Linearization along the ray `u = s·d`, `s → 0⁺`, where `θₖ` is the angle
/// of `dₖ`: `Aₖ = γₖI₂ − αₖ·wrap(θₖ − θ*ₖ)·J₂`.
///
/// `directions` holds one angle per node. At `θₖ = 0` this reproduces
/// [`jacobian_at_origin`].
pub fn directional_linearization(
    network: &Network,
    sp: &Setpoints,
    gains: &ControllerGains,
    directions: &[f64],
) -> Result<OriginLinearization> {
    if directions.len() != sp.n() {
        return Err(VocError::DimensionMismatch {
            what: "ray angles",
            expected: sp.n(),
            found: directions.len(),
        });
    }
    let blocks = (0..sp.n()).map(|k| {
        rotor_block(
            gains.gamma()[k],
            -gains.alpha()[k] * wrap_angle(directions[k] - sp.phase()[k]),
        )
    });
    linearization(blocks, network, sp)
}

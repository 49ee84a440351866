use nalgebra::DVector;

use crate::network::Network;
use crate::Result;

/// `v* = L⁻¹·u*`, `i* = Z_O⁻¹·Bᵀ·v*` in the rotating frame.
///
/// `u* = 0` yields the trivial solution; the steady-state equations have full
/// rank.
pub fn solve_steady_state(u_dq: &DVector<f64>, network: &Network) -> Result<(DVector<f64>, DVector<f64>)> {
    network.steady_state(u_dq)
}

use nalgebra::DVector;

use crate::controller::Setpoints;
use crate::network::Network;
use crate::{Result, VocError};

/// Values of the four Lyapunov candidates at one rotating-frame state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovValues {
    /// `uᵀ·Π·u`.
    pub v1: f64,
    /// `½·Σₖ(1 − rₖ/r*ₖ)²`.
    pub z: f64,
    /// `½·yᵀy` with `y = v − L⁻¹·u`.
    pub v2: f64,
    /// `(1 − d)·V₁ + d·V₂`.
    pub w: f64,
}

pub fn lyapunov_values(
    network: &Network,
    sp: &Setpoints,
    u: &DVector<f64>,
    v: &DVector<f64>,
    d: f64,
) -> Result<LyapunovValues> {
    if !(d > 0.0 && d < 1.0) {
        return Err(VocError::Domain("mixing weight must lie in (0, 1)"));
    }
    let dim = 2 * sp.n();
    for (what, len) in [("controller state", u.len()), ("node voltages", v.len())] {
        if len != dim {
            return Err(VocError::DimensionMismatch {
                what,
                expected: dim,
                found: len,
            });
        }
    }
    let u_ref = sp.u_dq();
    let c = u_ref.dot(u) / u_ref.norm_squared();
    let v1 = u.norm_squared() - c * c * u_ref.norm_squared();
    let z = 0.5
        * (0..sp.n())
            .map(|k| {
                let r = libm::hypot(u[2 * k], u[2 * k + 1]);
                let e = 1.0 - r / sp.amplitude()[k];
                e * e
            })
            .sum::<f64>();
    let y = v - network.impedance_inv() * u;
    let v2 = 0.5 * y.norm_squared();
    Ok(LyapunovValues {
        v1: v1.max(0.0),
        z,
        v2,
        w: (1.0 - d) * v1.max(0.0) + d * v2,
    })
}

/// Distance to `{u*, −u*}`.
pub fn dist_to_su(u: &DVector<f64>, sp: &Setpoints) -> f64 {
    let u_ref = sp.u_dq();
    (u - u_ref).norm().min((u + u_ref).norm())
}

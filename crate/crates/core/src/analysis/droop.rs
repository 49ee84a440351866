use alloc::vec::Vec;

use crate::controller::{angle_or, wrap_angle, ControllerGains, Frame, Setpoints};
use crate::dynamics::Trajectory;
use crate::{Result, VocError};

/// Power quantities of one node at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DroopSample {
    pub node: usize,
    pub t: f64,
    /// `uₖᵀ·vₖ`.
    pub p: f64,
    /// `uₖᵀ·J₂·vₖ`.
    pub q: f64,
    /// `uₖᵀ·(v*ₖv*ₖᵀ/‖v*ₖ‖²)·vₖ`.
    pub p_ref: f64,
    /// `uₖᵀ·J₂·(v*ₖv*ₖᵀ/‖v*ₖ‖²)·vₖ`.
    pub q_ref: f64,
    pub r: f64,
    /// Angle of `uₖ` in `(−π, π]`; `θ*ₖ` at `uₖ = 0`.
    pub theta: f64,
}

/// Per-node powers for a state in `frame` at time `t`.
pub fn droop_quantities(u: &[f64], v: &[f64], sp: &Setpoints, t: f64, frame: Frame) -> Result<Vec<DroopSample>> {
    let n = sp.n();
    if u.len() != 2 * n || v.len() != 2 * n {
        return Err(VocError::DimensionMismatch {
            what: "droop state",
            expected: 2 * n,
            found: u.len().min(v.len()),
        });
    }
    let v_ref = sp.v_ref(t, frame);
    Ok((0..n)
        .map(|k| {
            let (u0, u1) = (u[2 * k], u[2 * k + 1]);
            let (v0, v1) = (v[2 * k], v[2 * k + 1]);
            let (w0, w1) = (v_ref[2 * k], v_ref[2 * k + 1]);
            let c = (w0 * v0 + w1 * v1) / (w0 * w0 + w1 * w1);
            let (c0, c1) = (c * w0, c * w1);
            DroopSample {
                node: k,
                t,
                p: u0 * v0 + u1 * v1,
                // J₂·v = (−v₁, v₀)
                q: -u0 * v1 + u1 * v0,
                p_ref: u0 * c0 + u1 * c1,
                q_ref: -u0 * c1 + u1 * c0,
                r: libm::hypot(u0, u1),
                theta: wrap_angle(angle_or(u0, u1, sp.theta_ref(k, t, frame))),
            }
        })
        .collect())
}

/// Finite-difference residuals of the droop identities at one node.
///
/// `b` is `θ̇ = ω* − α·wrap(θ − θ*) + (Q − Q_ref)/r²`, the form that follows
/// from the controller; `b_literal` is the variant with `(−Q + Q_ref)/r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeResiduals {
    pub max_abs_a: f64,
    pub max_abs_b: f64,
    pub max_abs_b_literal: f64,
    /// `max(max|ṙ rhs|, γ·r*)`.
    pub scale_a: f64,
    /// `max|θ̇ rhs|`.
    pub scale_b: f64,
}

impl NodeResiduals {
    pub fn rel_a(&self) -> f64 {
        self.max_abs_a / self.scale_a
    }

    pub fn rel_b(&self) -> f64 {
        self.max_abs_b / self.scale_b
    }

    pub fn rel_b_literal(&self) -> f64 {
        self.max_abs_b_literal / self.scale_b
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DroopResiduals {
    pub nodes: Vec<NodeResiduals>,
    pub sample_interval: f64,
    /// Stencils evaluated.
    pub evaluated: usize,
    /// Stencils dropped because some `rₖ < 10⁻⁶·r*ₖ`.
    pub skipped_small_r: usize,
    /// Stencils dropped because a load step falls inside them.
    pub skipped_events: usize,
}

impl DroopResiduals {
    pub fn max_rel_a(&self) -> f64 {
        self.nodes.iter().map(NodeResiduals::rel_a).fold(0.0, f64::max)
    }

    pub fn max_rel_b(&self) -> f64 {
        self.nodes.iter().map(NodeResiduals::rel_b).fold(0.0, f64::max)
    }

    pub fn max_rel_b_literal(&self) -> f64 {
        self.nodes.iter().map(NodeResiduals::rel_b_literal).fold(0.0, f64::max)
    }
}

/// Compares central differences of `(rₖ, θₖ)` with the droop right-hand sides
/// along a trajectory. Angles are unwrapped before differencing.
pub fn verify_droop_identity(traj: &Trajectory, sp: &Setpoints, gains: &ControllerGains) -> Result<DroopResiduals> {
    let traj = traj.to_alphabeta(sp.omega())?;
    let n = sp.n();
    if traj.n() != n {
        return Err(VocError::DimensionMismatch {
            what: "trajectory nodes",
            expected: n,
            found: traj.n(),
        });
    }
    if traj.len() < 3 {
        return Err(VocError::InvalidIntegration("droop check needs at least three samples"));
    }
    let samples: Vec<Vec<DroopSample>> = (0..traj.len())
        .map(|j| droop_quantities(traj.u(j), traj.v(j), sp, traj.time(j), Frame::AlphaBeta))
        .collect::<Result<_>>()?;

    let omega = sp.omega();
    let mut nodes = alloc::vec![
        NodeResiduals {
            max_abs_a: 0.0,
            max_abs_b: 0.0,
            max_abs_b_literal: 0.0,
            scale_a: 0.0,
            scale_b: 0.0,
        };
        n
    ];
    for (k, node) in nodes.iter_mut().enumerate() {
        node.scale_a = gains.gamma()[k] * sp.amplitude()[k];
    }
    let (mut evaluated, mut skipped_small_r, mut skipped_events) = (0, 0, 0);
    for j in 1..traj.len() - 1 {
        let (t0, t1, t2) = (traj.time(j - 1), traj.time(j), traj.time(j + 1));
        if traj.event_times().iter().any(|&e| e >= t0 && e <= t2) {
            skipped_events += 1;
            continue;
        }
        let small = (0..n).any(|k| {
            [j - 1, j, j + 1]
                .iter()
                .any(|&i| samples[i][k].r < 1e-6 * sp.amplitude()[k])
        });
        if small {
            skipped_small_r += 1;
            continue;
        }
        evaluated += 1;
        let h = t2 - t0;
        for k in 0..n {
            let (a, s, b) = (&samples[j - 1][k], &samples[j][k], &samples[j + 1][k]);
            let r_dot = (b.r - a.r) / h;
            let theta_dot = (wrap_angle(b.theta - s.theta) + wrap_angle(s.theta - a.theta)) / h;
            let gamma = gains.gamma()[k];
            let alpha = gains.alpha()[k];
            let rhs_a = -gamma * s.r * (s.r / sp.amplitude()[k] - 1.0) + (-s.p + s.p_ref) / s.r;
            let base = omega - alpha * wrap_angle(s.theta - sp.theta_ref(k, t1, Frame::AlphaBeta));
            let rhs_b = base + (s.q - s.q_ref) / (s.r * s.r);
            let rhs_b_lit = base + (-s.q + s.q_ref) / s.r;
            let node = &mut nodes[k];
            node.max_abs_a = node.max_abs_a.max(libm::fabs(r_dot - rhs_a));
            node.max_abs_b = node.max_abs_b.max(libm::fabs(theta_dot - rhs_b));
            node.max_abs_b_literal = node.max_abs_b_literal.max(libm::fabs(theta_dot - rhs_b_lit));
            node.scale_a = node.scale_a.max(libm::fabs(rhs_a));
            node.scale_b = node.scale_b.max(libm::fabs(rhs_b));
        }
    }
    Ok(DroopResiduals {
        nodes,
        sample_interval: traj.sample_interval(),
        evaluated,
        skipped_small_r,
        skipped_events,
    })
}

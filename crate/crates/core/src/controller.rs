//! The (λ-ω) virtual oscillator: amplitude and angle-based frequency
//! functions, voltage projectors, setpoints, and the controller vector field
//! in rectangular and polar coordinates.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::network::Network;
use crate::planar::{rotation, MatrixRole, PlanarMatrix};
use crate::{Result, VocError};

const TAU: f64 = 2.0 * PI;

/// Reference frame a planar quantity is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    /// Stationary two-axis frame.
    AlphaBeta,
    /// Frame rotating at the nominal frequency.
    Dq,
}

/// Maps `x` to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = libm::fmod(x, TAU);
    if y > PI {
        y -= TAU;
    } else if y <= -PI {
        y += TAU;
    }
    y
}

/// `λ(r, r*) = γ·(r/r* − 1)`.
pub fn amplitude_fn(r: f64, r_ref: f64, gamma: f64) -> Result<f64> {
    if !(r_ref > 0.0) {
        return Err(VocError::Domain("reference amplitude must be positive"));
    }
    Ok(gamma * (r / r_ref - 1.0))
}

/// Angle-based frequency function.
///
/// In the stationary frame this is `α·wrap(θ − θ*) − ω*` with `θ*` the
/// rotating reference; in the dq frame the nominal rotation is removed and it
/// reduces to `α·wrap(θ − θ*)`.
pub fn frequency_fn(theta: f64, theta_ref: f64, alpha: f64, omega: f64, frame: Frame) -> f64 {
    let base = alpha * wrap_angle(theta - theta_ref);
    match frame {
        Frame::AlphaBeta => base - omega,
        Frame::Dq => base,
    }
}

/// `I₂ − v·vᵀ/(vᵀv)` for a single node.
pub fn node_projector(v: &Vector2<f64>) -> Result<Matrix2<f64>> {
    let nsq = v.norm_squared();
    if !(nsq > 0.0) {
        return Err(VocError::Domain("projector reference vector is zero"));
    }
    Ok(Matrix2::identity() - v * v.transpose() / nsq)
}

/// Structure of a [`Projector`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectorKind {
    /// `𝓘 − v·vᵀ/(vᵀv)` on the whole stacked space.
    Full,
    /// `diag(Π₁, …, Πₙ)` with one 2×2 projector per node.
    BlockDiagonal,
}

/// Orthogonal projector that annihilates a reference vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: PlanarMatrix,
    reference: DVector<f64>,
    kind: ProjectorKind,
}

impl Projector {
    /// Projector onto the orthogonal complement of `v` (any even length).
    pub fn from_reference(v: &DVector<f64>) -> Result<Self> {
        let nsq = v.norm_squared();
        if !(nsq > 0.0) {
            return Err(VocError::Domain("projector reference vector is zero"));
        }
        let dim = v.len();
        let m = DMatrix::identity(dim, dim) - v * v.transpose() / nsq;
        Ok(Self {
            matrix: PlanarMatrix::new(m, MatrixRole::Projector),
            reference: v.clone(),
            kind: ProjectorKind::Full,
        })
    }

    /// Per-node projectors built from the 2-blocks of `v`; every block must be
    /// non-zero.
    pub fn block_diagonal(v: &DVector<f64>) -> Result<Self> {
        let blocks = (0..v.len() / 2)
            .map(|k| node_projector(&Vector2::new(v[2 * k], v[2 * k + 1])))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            matrix: PlanarMatrix::block_diagonal(blocks, MatrixRole::Projector),
            reference: v.clone(),
            kind: ProjectorKind::BlockDiagonal,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.matrix.matrix()
    }

    pub fn reference(&self) -> &DVector<f64> {
        &self.reference
    }

    pub fn kind(&self) -> ProjectorKind {
        self.kind
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.matrix.mul_vec(x)
    }
}

/// Per-node amplitude gains `γₖ` and frequency gains `αₖ` (1/s).
#[derive(Clone, Debug, PartialEq)]
pub struct ControllerGains {
    gamma: Vec<f64>,
    alpha: Vec<f64>,
}

impl ControllerGains {
    pub fn new(gamma: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        if gamma.len() != alpha.len() {
            return Err(VocError::DimensionMismatch {
                what: "frequency gains",
                expected: gamma.len(),
                found: alpha.len(),
            });
        }
        for (k, (&g, &a)) in gamma.iter().zip(&alpha).enumerate() {
            if !(g > 0.0 && g.is_finite()) {
                return Err(VocError::NonPositive {
                    what: "amplitude gain",
                    index: k,
                    value: g,
                });
            }
            if !(a > 0.0 && a.is_finite()) {
                return Err(VocError::NonPositive {
                    what: "frequency gain",
                    index: k,
                    value: a,
                });
            }
        }
        Ok(Self { gamma, alpha })
    }

    pub fn uniform(n: usize, gamma: f64, alpha: f64) -> Result<Self> {
        Self::new(alloc::vec![gamma; n], alloc::vec![alpha; n])
    }

    pub fn n(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn gamma_min(&self) -> f64 {
        self.gamma.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Desired amplitudes and phases plus the steady state they induce in the
/// rotating frame.
///
/// Only `r*`, `θ₀*` and the network are needed: `v*_dq = L⁻¹·u*_dq` and
/// `i*_dq = Z_O⁻¹·Bᵀ·v*_dq` follow.
#[derive(Clone, Debug, PartialEq)]
pub struct Setpoints {
    amplitude: Vec<f64>,
    phase: Vec<f64>,
    omega: f64,
    u_dq: DVector<f64>,
    v_dq: DVector<f64>,
    i_dq: DVector<f64>,
    // v*_dq per node and its squared norm
    v_nodes: Vec<(Vector2<f64>, f64)>,
}

impl Setpoints {
    pub fn derive(network: &Network, amplitude: Vec<f64>, phase: Vec<f64>) -> Result<Self> {
        let n = network.n();
        for (what, len) in [("setpoint amplitudes", amplitude.len()), ("setpoint phases", phase.len())] {
            if len != n {
                return Err(VocError::DimensionMismatch {
                    what,
                    expected: n,
                    found: len,
                });
            }
        }
        for (k, &r) in amplitude.iter().enumerate() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(VocError::NonPositive {
                    what: "setpoint amplitude",
                    index: k,
                    value: r,
                });
            }
        }
        let phase: Vec<f64> = phase.into_iter().map(wrap_angle).collect();
        let mut u_dq = DVector::zeros(2 * n);
        for k in 0..n {
            let (s, c) = libm::sincos(phase[k]);
            u_dq[2 * k] = amplitude[k] * c;
            u_dq[2 * k + 1] = amplitude[k] * s;
        }
        let (v_dq, i_dq) = network.steady_state(&u_dq)?;
        let v_nodes = (0..n)
            .map(|k| {
                let v = Vector2::new(v_dq[2 * k], v_dq[2 * k + 1]);
                let nsq = v.norm_squared();
                if nsq > 0.0 {
                    Ok((v, nsq))
                } else {
                    Err(VocError::Domain("steady-state voltage vanishes at a node"))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            amplitude,
            phase,
            omega: network.omega(),
            u_dq,
            v_dq,
            i_dq,
            v_nodes,
        })
    }

    pub fn n(&self) -> usize {
        self.amplitude.len()
    }

    /// `r*`.
    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    /// `θ₀*`, wrapped to `(−π, π]`.
    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    /// `ω*`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn u_dq(&self) -> &DVector<f64> {
        &self.u_dq
    }

    pub fn v_dq(&self) -> &DVector<f64> {
        &self.v_dq
    }

    pub fn i_dq(&self) -> &DVector<f64> {
        &self.i_dq
    }

    /// `θ*ₖ` at time `t`: `ω*t + θ₀*ₖ` in the stationary frame, `θ₀*ₖ` in dq.
    pub fn theta_ref(&self, k: usize, t: f64, frame: Frame) -> f64 {
        match frame {
            Frame::AlphaBeta => self.omega * t + self.phase[k],
            Frame::Dq => self.phase[k],
        }
    }

    fn to_frame(&self, x: &DVector<f64>, t: f64, frame: Frame) -> DVector<f64> {
        match frame {
            Frame::Dq => x.clone(),
            Frame::AlphaBeta => {
                let rt = rotation(self.omega * t).transpose();
                let mut out = x.clone();
                for k in 0..self.n() {
                    let y = rt * Vector2::new(x[2 * k], x[2 * k + 1]);
                    out[2 * k] = y[0];
                    out[2 * k + 1] = y[1];
                }
                out
            }
        }
    }

    /// `u*` in the requested frame at time `t`.
    pub fn u_ref(&self, t: f64, frame: Frame) -> DVector<f64> {
        self.to_frame(&self.u_dq, t, frame)
    }

    /// `v*` in the requested frame at time `t`.
    pub fn v_ref(&self, t: f64, frame: Frame) -> DVector<f64> {
        self.to_frame(&self.v_dq, t, frame)
    }

    /// `i*` in the requested frame at time `t`.
    pub fn i_ref(&self, t: f64, frame: Frame) -> DVector<f64> {
        self.to_frame(&self.i_dq, t, frame)
    }

    /// `Π_dq = diag(Π₁, …, Πₙ)` built from `v*_dq`.
    pub fn voltage_projector(&self) -> Projector {
        Projector::block_diagonal(&self.v_dq).expect("node voltages checked non-zero")
    }

    /// `Π = 𝓘 − u*·u*ᵀ/(u*ᵀu*)`, the complement of the desired current.
    pub fn current_projector(&self) -> Projector {
        Projector::from_reference(&self.u_dq).expect("amplitudes checked positive")
    }
}

/// Angle of `(x, y)` with the convention that the origin takes `fallback`.
#[inline]
pub(crate) fn angle_or(x: f64, y: f64, fallback: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        fallback
    } else {
        libm::atan2(y, x)
    }
}

/// Controller vector field `u̇ = −(Λ + K̃)·u − Π·v_c`, written into `out`.
///
/// In the stationary frame the reference angle and the projector both rotate
/// with `ω*t`; in dq they are constant.
pub fn controller_rhs(
    u: &[f64],
    v: &[f64],
    sp: &Setpoints,
    gains: &ControllerGains,
    t: f64,
    frame: Frame,
    out: &mut [f64],
) {
    let n = sp.n();
    debug_assert!(u.len() == 2 * n && v.len() == 2 * n && out.len() == 2 * n);
    let (wt_sin, wt_cos) = match frame {
        Frame::AlphaBeta => libm::sincos(sp.omega * t),
        Frame::Dq => (0.0, 1.0),
    };
    let (omega_shift, wt) = match frame {
        Frame::AlphaBeta => (sp.omega, wrap_angle(sp.omega * t)),
        Frame::Dq => (0.0, 0.0),
    };
    for k in 0..n {
        let (u0, u1) = (u[2 * k], u[2 * k + 1]);
        let theta_ref = wt + sp.phase[k];
        let r = libm::hypot(u0, u1);
        let theta = angle_or(u0, u1, theta_ref);
        let lambda = gains.gamma[k] * (r / sp.amplitude[k] - 1.0);
        let freq = gains.alpha[k] * wrap_angle(theta - theta_ref) - omega_shift;

        // reference voltage in the working frame: R(ω*t)ᵀ·v*_dq,k
        let (vr, nsq) = sp.v_nodes[k];
        let r0 = wt_cos * vr[0] - wt_sin * vr[1];
        let r1 = wt_sin * vr[0] + wt_cos * vr[1];
        let (v0, v1) = (v[2 * k], v[2 * k + 1]);
        let c = (r0 * v0 + r1 * v1) / nsq;
        let p0 = v0 - c * r0;
        let p1 = v1 - c * r1;

        out[2 * k] = -lambda * u0 + freq * u1 - p0;
        out[2 * k + 1] = -lambda * u1 - freq * u0 - p1;
    }
}

/// Decoupled oscillator in polar form (stationary frame, `h̃ₖ = 0`):
/// `ṙₖ = −rₖ·λₖ(rₖ, r*ₖ)`, `θ̇ₖ = ω* − αₖ·wrap(θₖ − θ*ₖ(t))`.
pub fn polar_rhs(
    r: &[f64],
    theta: &[f64],
    sp: &Setpoints,
    gains: &ControllerGains,
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = sp.n();
    if r.len() != n || theta.len() != n {
        return Err(VocError::DimensionMismatch {
            what: "polar state",
            expected: n,
            found: r.len().min(theta.len()),
        });
    }
    let mut dr = Vec::with_capacity(n);
    let mut dtheta = Vec::with_capacity(n);
    for k in 0..n {
        if !(r[k] > 0.0) {
            return Err(VocError::Domain("polar form requires positive amplitude"));
        }
        dr.push(-r[k] * amplitude_fn(r[k], sp.amplitude[k], gains.gamma[k])?);
        dtheta.push(-frequency_fn(
            theta[k],
            sp.theta_ref(k, t, Frame::AlphaBeta),
            gains.alpha[k],
            sp.omega,
            Frame::AlphaBeta,
        ));
    }
    Ok((dr, dtheta))
}

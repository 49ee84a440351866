use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{ModelKind, SystemState, VectorField};
use crate::controller::{controller_rhs, wrap_angle, ControllerGains, Frame, Setpoints};
use crate::network::Network;
use crate::{Result, VocError};

/// Converters, loads and lines in closed loop with the oscillator controller.
///
/// The controller always uses the setpoints it was built with; a load step
/// changes the plant only.
#[derive(Clone, Debug)]
pub struct ClosedLoop {
    kind: ModelKind,
    network: Network,
    setpoints: Setpoints,
    gains: ControllerGains,
    inv_c: Vec<f64>,
    conductance: Vec<f64>,
    edges: Vec<(usize, usize)>,
    resistance: Vec<f64>,
    inv_l: Vec<f64>,
    // C⁻¹·L, used by the reduced model only
    l_scaled: DMatrix<f64>,
}

impl ClosedLoop {
    pub fn new(kind: ModelKind, network: Network, setpoints: Setpoints, gains: ControllerGains) -> Result<Self> {
        let n = network.n();
        for (what, len) in [("setpoints", setpoints.n()), ("controller gains", gains.n())] {
            if len != n {
                return Err(VocError::DimensionMismatch {
                    what,
                    expected: n,
                    found: len,
                });
            }
        }
        let spec = network.spec();
        let inv_c = spec.nodes().iter().map(|p| 1.0 / p.capacitance).collect();
        let conductance = spec.nodes().iter().map(|p| p.conductance).collect();
        let edges = spec.edges().iter().map(|e| (e.from, e.to)).collect();
        let resistance = spec.lines().iter().map(|l| l.resistance).collect();
        let inv_l = spec.lines().iter().map(|l| 1.0 / l.inductance).collect();
        let mut out = Self {
            kind,
            network,
            setpoints,
            gains,
            inv_c,
            conductance,
            edges,
            resistance,
            inv_l,
            l_scaled: DMatrix::zeros(0, 0),
        };
        out.refresh_reduced();
        Ok(out)
    }

    fn refresh_reduced(&mut self) {
        if self.kind != ModelKind::Reduced {
            return;
        }
        let mut l = self.network.impedance().matrix().clone();
        for (r, mut row) in l.row_iter_mut().enumerate() {
            row *= self.inv_c[r / 2];
        }
        self.l_scaled = l;
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn frame(&self) -> Frame {
        self.kind.frame()
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn setpoints(&self) -> &Setpoints {
        &self.setpoints
    }

    pub fn gains(&self) -> &ControllerGains {
        &self.gains
    }

    pub fn n(&self) -> usize {
        self.network.n()
    }

    pub fn m(&self) -> usize {
        self.network.m()
    }

    /// Number of line-current entries carried by this model, if any.
    pub fn lines(&self) -> Option<usize> {
        self.kind.has_lines().then(|| self.m())
    }

    /// Replaces the load conductance of `node`.
    pub fn set_conductance(&mut self, node: usize, conductance: f64) -> Result<()> {
        self.network = self.network.with_conductance(node, conductance)?;
        self.conductance[node] = conductance;
        self.refresh_reduced();
        Ok(())
    }

    /// The synchronous solution at time `t`, in this model's frame.
    pub fn steady_state(&self, t: f64) -> SystemState {
        let frame = self.frame();
        let sp = &self.setpoints;
        SystemState {
            u: sp.u_ref(t, frame),
            v: sp.v_ref(t, frame),
            i: self.kind.has_lines().then(|| sp.i_ref(t, frame)),
            frame,
            t,
        }
    }

    /// Flattens `s` after checking frame and dimensions.
    pub fn pack(&self, s: &SystemState) -> Result<Vec<f64>> {
        if s.frame != self.frame() {
            return Err(VocError::FrameMismatch("state frame differs from model frame"));
        }
        s.check(self.n(), self.lines())?;
        Ok(s.to_flat())
    }

    pub fn unpack(&self, x: &[f64], t: f64) -> SystemState {
        SystemState::from_flat(x, self.n(), self.lines(), self.frame(), t)
    }

    /// Time derivative of `s` as a state of the same shape.
    pub fn rhs(&self, s: &SystemState) -> Result<SystemState> {
        let x = self.pack(s)?;
        let mut dx = alloc::vec![0.0; x.len()];
        self.eval(s.t, &x, &mut dx);
        Ok(self.unpack(&dx, s.t))
    }
}

impl VectorField for ClosedLoop {
    fn dim(&self) -> usize {
        4 * self.n() + 2 * self.lines().unwrap_or(0)
    }

    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        let n2 = 2 * self.n();
        let (u, rest) = x.split_at(n2);
        let (v, i) = rest.split_at(n2);
        let (du, drest) = dx.split_at_mut(n2);
        let (dv, di) = drest.split_at_mut(n2);
        controller_rhs(u, v, &self.setpoints, &self.gains, t, self.frame(), du);

        if self.kind == ModelKind::Reduced {
            let l = &self.l_scaled;
            for r in 0..n2 {
                let mut acc = u[r] * self.inv_c[r / 2];
                for c in 0..n2 {
                    acc -= l[(r, c)] * v[c];
                }
                dv[r] = acc;
            }
            return;
        }

        let w = if self.kind == ModelKind::Dq {
            self.network.omega()
        } else {
            0.0
        };
        for k in 0..self.n() {
            let (a, b) = (2 * k, 2 * k + 1);
            let g = self.conductance[k];
            dv[a] = -g * v[a] + u[a];
            dv[b] = -g * v[b] + u[b];
        }
        for (e, &(from, to)) in self.edges.iter().enumerate() {
            let (a, b) = (2 * e, 2 * e + 1);
            dv[2 * from] -= i[a];
            dv[2 * from + 1] -= i[b];
            dv[2 * to] += i[a];
            dv[2 * to + 1] += i[b];
            let r = self.resistance[e];
            let il = self.inv_l[e];
            let bv0 = v[2 * from] - v[2 * to];
            let bv1 = v[2 * from + 1] - v[2 * to + 1];
            // −ω·J₂·i = (ω·i₁, −ω·i₀)
            di[a] = (-r * i[a] + bv0) * il + w * i[b];
            di[b] = (-r * i[b] + bv1) * il - w * i[a];
        }
        for k in 0..self.n() {
            let (a, b) = (2 * k, 2 * k + 1);
            let ic = self.inv_c[k];
            let (va, vb) = (v[a], v[b]);
            dv[a] = dv[a] * ic + w * vb;
            dv[b] = dv[b] * ic - w * va;
        }
    }
}

/// Linear boundary-layer system `ẏ = −A·y`.
#[derive(Clone, Debug)]
pub struct BoundaryLayer {
    a: DMatrix<f64>,
}

impl BoundaryLayer {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(VocError::DimensionMismatch {
                what: "boundary-layer matrix columns",
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        Ok(Self { a })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn rhs(&self, y: &DVector<f64>) -> DVector<f64> {
        -(&self.a * y)
    }
}

impl VectorField for BoundaryLayer {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn eval(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        for (r, d) in dx.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (c, &xc) in x.iter().enumerate() {
                acc -= self.a[(r, c)] * xc;
            }
            *d = acc;
        }
    }
}

/// Oscillators with the network disconnected (`v_c ≡ 0`), rectangular form.
#[derive(Clone, Debug)]
pub struct FreeOscillator {
    setpoints: Setpoints,
    gains: ControllerGains,
    frame: Frame,
    zeros: Vec<f64>,
}

impl FreeOscillator {
    pub fn new(setpoints: Setpoints, gains: ControllerGains, frame: Frame) -> Self {
        let zeros = alloc::vec![0.0; 2 * setpoints.n()];
        Self {
            setpoints,
            gains,
            frame,
            zeros,
        }
    }
}

impl VectorField for FreeOscillator {
    fn dim(&self) -> usize {
        self.zeros.len()
    }

    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        controller_rhs(x, &self.zeros, &self.setpoints, &self.gains, t, self.frame, dx);
    }
}

/// Oscillators with the network disconnected, polar form in the stationary
/// frame. State layout `[r₁, …, rₙ, θ₁, …, θₙ]`; `θ` is not wrapped.
#[derive(Clone, Debug)]
pub struct PolarOscillator {
    setpoints: Setpoints,
    gains: ControllerGains,
}

impl PolarOscillator {
    pub fn new(setpoints: Setpoints, gains: ControllerGains) -> Self {
        Self { setpoints, gains }
    }
}

impl VectorField for PolarOscillator {
    fn dim(&self) -> usize {
        2 * self.setpoints.n()
    }

    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        let n = self.setpoints.n();
        let sp = &self.setpoints;
        for k in 0..n {
            let r = x[k];
            let gamma = self.gains.gamma()[k];
            let alpha = self.gains.alpha()[k];
            // the polar form is undefined at r ≤ 0; NaN makes the integrator stop
            dx[k] = if r > 0.0 {
                -r * gamma * (r / sp.amplitude()[k] - 1.0)
            } else {
                f64::NAN
            };
            let err = wrap_angle(x[n + k] - sp.theta_ref(k, t, Frame::AlphaBeta));
            dx[n + k] = sp.omega() - alpha * err;
        }
    }
}

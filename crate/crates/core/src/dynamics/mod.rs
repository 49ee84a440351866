//! Closed-loop models, the fixed-step integrator, frame transforms and the
//! full-versus-reduced comparison.
//!
//! Every model works on a flat state `[u, v, i]`: `2n` controller currents,
//! `2n` node voltages and, for the full models, `2m` line currents.

mod compare;
mod frame;
mod integrate;
mod models;

pub use compare::{compare_full_reduced, CompareOptions, DeviationReport, LineInit};
pub use frame::{from_dq, to_dq};
pub use integrate::{
    integrate, integrate_field, IntegrationOptions, ParameterStep, Rk4, Trajectory, VectorField,
};
pub use models::{BoundaryLayer, ClosedLoop, FreeOscillator, PolarOscillator};

use alloc::vec::Vec;

use nalgebra::DVector;

use crate::controller::Frame;
use crate::{Result, VocError};

/// Which closed-loop model to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Controller, node voltages and line currents in the stationary frame.
    AlphaBeta,
    /// Same states in the rotating frame.
    Dq,
    /// Rotating frame with line currents eliminated, `C·v̇ = −L·v + u`.
    Reduced,
}

impl ModelKind {
    pub fn frame(self) -> Frame {
        match self {
            ModelKind::AlphaBeta => Frame::AlphaBeta,
            ModelKind::Dq | ModelKind::Reduced => Frame::Dq,
        }
    }

    pub fn has_lines(self) -> bool {
        !matches!(self, ModelKind::Reduced)
    }

    /// Default step: 1 µs with line dynamics, 10 µs without.
    pub fn default_dt(self) -> f64 {
        if self.has_lines() {
            1e-6
        } else {
            1e-5
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::AlphaBeta => "alphabeta",
            ModelKind::Dq => "dq",
            ModelKind::Reduced => "reduced",
        }
    }
}

/// Stacked state with its frame tag and time stamp.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    /// Line currents; `None` for the reduced model.
    pub i: Option<DVector<f64>>,
    pub frame: Frame,
    pub t: f64,
}

impl SystemState {
    pub fn zeros(n: usize, m: Option<usize>, frame: Frame, t: f64) -> Self {
        Self {
            u: DVector::zeros(2 * n),
            v: DVector::zeros(2 * n),
            i: m.map(|m| DVector::zeros(2 * m)),
            frame,
            t,
        }
    }

    pub fn n(&self) -> usize {
        self.u.len() / 2
    }

    /// Checks the dimensions against a network with `n` nodes and `m` lines
    /// (`None` when line currents must be absent).
    pub fn check(&self, n: usize, m: Option<usize>) -> Result<()> {
        for (what, len) in [("controller state", self.u.len()), ("node voltages", self.v.len())] {
            if len != 2 * n {
                return Err(VocError::DimensionMismatch {
                    what,
                    expected: 2 * n,
                    found: len,
                });
            }
        }
        match (m, &self.i) {
            (None, None) => Ok(()),
            (Some(m), Some(i)) if i.len() == 2 * m => Ok(()),
            (Some(m), Some(i)) => Err(VocError::DimensionMismatch {
                what: "line currents",
                expected: 2 * m,
                found: i.len(),
            }),
            (Some(_), None) => Err(VocError::FrameMismatch("model needs line currents")),
            (None, Some(_)) => Err(VocError::FrameMismatch("reduced model has no line currents")),
        }
    }

    /// `[u, v, i]` as one flat vector.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.u.len() + self.v.len() + self.i.as_ref().map_or(0, |i| i.len()));
        x.extend_from_slice(self.u.as_slice());
        x.extend_from_slice(self.v.as_slice());
        if let Some(i) = &self.i {
            x.extend_from_slice(i.as_slice());
        }
        x
    }

    /// Inverse of [`SystemState::to_flat`].
    pub fn from_flat(x: &[f64], n: usize, m: Option<usize>, frame: Frame, t: f64) -> Self {
        let u = DVector::from_column_slice(&x[..2 * n]);
        let v = DVector::from_column_slice(&x[2 * n..4 * n]);
        let i = m.map(|m| DVector::from_column_slice(&x[4 * n..4 * n + 2 * m]));
        Self { u, v, i, frame, t }
    }
}

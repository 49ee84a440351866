use super::{SystemState, Trajectory};
use crate::controller::Frame;
use crate::planar::rotate_blocks;
use crate::{Result, VocError};

fn rotated(s: &SystemState, omega: f64, transpose: bool, frame: Frame) -> SystemState {
    let (sin, cos) = libm::sincos(omega * s.t);
    let mut out = s.clone();
    rotate_blocks(out.u.as_mut_slice(), sin, cos, transpose);
    rotate_blocks(out.v.as_mut_slice(), sin, cos, transpose);
    if let Some(i) = out.i.as_mut() {
        rotate_blocks(i.as_mut_slice(), sin, cos, transpose);
    }
    out.frame = frame;
    out
}

/// Applies `R(ω*t)` to every planar sub-vector.
pub fn to_dq(s: &SystemState, omega: f64) -> Result<SystemState> {
    if s.frame != Frame::AlphaBeta {
        return Err(VocError::FrameMismatch("to_dq expects a stationary-frame state"));
    }
    Ok(rotated(s, omega, false, Frame::Dq))
}

/// Applies `R(ω*t)ᵀ` to every planar sub-vector.
pub fn from_dq(s: &SystemState, omega: f64) -> Result<SystemState> {
    if s.frame != Frame::Dq {
        return Err(VocError::FrameMismatch("from_dq expects a rotating-frame state"));
    }
    Ok(rotated(s, omega, true, Frame::AlphaBeta))
}

impl Trajectory {
    /// The same samples expressed in the rotating frame.
    pub fn to_dq(&self, omega: f64) -> Result<Trajectory> {
        match self.frame() {
            Some(Frame::AlphaBeta) => Ok(self.map_rows(Frame::Dq, |t, row| {
                let (sin, cos) = libm::sincos(omega * t);
                rotate_blocks(row, sin, cos, false);
            })),
            Some(Frame::Dq) => Ok(self.clone()),
            None => Err(VocError::FrameMismatch("trajectory carries no frame")),
        }
    }

    /// The same samples expressed in the stationary frame.
    pub fn to_alphabeta(&self, omega: f64) -> Result<Trajectory> {
        match self.frame() {
            Some(Frame::Dq) => Ok(self.map_rows(Frame::AlphaBeta, |t, row| {
                let (sin, cos) = libm::sincos(omega * t);
                rotate_blocks(row, sin, cos, true);
            })),
            Some(Frame::AlphaBeta) => Ok(self.clone()),
            None => Err(VocError::FrameMismatch("trajectory carries no frame")),
        }
    }
}

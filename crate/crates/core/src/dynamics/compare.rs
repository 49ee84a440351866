use nalgebra::DVector;

use super::{integrate, ClosedLoop, IntegrationOptions, ModelKind, SystemState};
use crate::analysis::check_assumption1;
use crate::controller::{ControllerGains, Frame, Setpoints};
use crate::network::Network;
use crate::{Result, VocError};

/// Initial line currents of the full model.
#[derive(Clone, Debug, PartialEq)]
pub enum LineInit {
    /// `i(0) = Z_O⁻¹·Bᵀ·v(0)`.
    SlowManifold,
    /// Arbitrary `i(0)`, rotating frame.
    Explicit(DVector<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareOptions {
    pub t_end: f64,
    pub dt_full: f64,
    pub dt_reduced: f64,
    /// Spacing of the comparison samples; a multiple of both steps.
    pub sample_interval: f64,
    pub line_init: LineInit,
}

impl CompareOptions {
    pub fn new(t_end: f64) -> Self {
        Self {
            t_end,
            dt_full: ModelKind::Dq.default_dt(),
            dt_reduced: ModelKind::Reduced.default_dt(),
            sample_interval: 1e-5,
            line_init: LineInit::SlowManifold,
        }
    }
}

fn stride_for(interval: f64, dt: f64) -> Result<usize> {
    let k = libm::round(interval / dt);
    if k < 1.0 || libm::fabs(interval / dt - k) > 1e-6 {
        return Err(VocError::InvalidIntegration("sample interval must be a multiple of dt"));
    }
    Ok(k as usize)
}

/// Deviation of the full rotating-frame model from the reduced one.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport {
    /// `max ‖u_full − u_red‖` over the samples.
    pub max_u: f64,
    pub max_v: f64,
    /// `max ‖(u, v)_full − (u, v)_red‖`.
    pub max_total: f64,
    pub rms_total: f64,
    /// `L_O/√(L_O²ω*² + R_O²)` for the worst line.
    pub epsilon: f64,
    pub t_end: f64,
    pub samples: usize,
}

/// Integrates the full dq and reduced models from the same `(u₀, v₀)` and
/// compares them on a common grid.
pub fn compare_full_reduced(
    network: &Network,
    setpoints: &Setpoints,
    gains: &ControllerGains,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    opts: &CompareOptions,
) -> Result<DeviationReport> {
    let full = ClosedLoop::new(ModelKind::Dq, network.clone(), setpoints.clone(), gains.clone())?;
    let reduced = ClosedLoop::new(ModelKind::Reduced, network.clone(), setpoints.clone(), gains.clone())?;
    let i0 = match &opts.line_init {
        LineInit::SlowManifold => network.quasi_steady_currents(v0),
        LineInit::Explicit(i) => i.clone(),
    };
    let start_full = SystemState {
        u: u0.clone(),
        v: v0.clone(),
        i: Some(i0),
        frame: Frame::Dq,
        t: 0.0,
    };
    let start_red = SystemState {
        i: None,
        ..start_full.clone()
    };
    let of = IntegrationOptions::new(opts.dt_full, opts.t_end, stride_for(opts.sample_interval, opts.dt_full)?)?;
    let or = IntegrationOptions::new(
        opts.dt_reduced,
        opts.t_end,
        stride_for(opts.sample_interval, opts.dt_reduced)?,
    )?;
    let tf = integrate(&full, &start_full, &of, &[])?;
    let tr = integrate(&reduced, &start_red, &or, &[])?;
    let samples = tf.len().min(tr.len());

    let (mut max_u, mut max_v, mut max_total, mut sum_sq) = (0.0f64, 0.0f64, 0.0f64, 0.0);
    for j in 0..samples {
        let du: f64 = tf.u(j).iter().zip(tr.u(j)).map(|(a, b)| (a - b) * (a - b)).sum();
        let dv: f64 = tf.v(j).iter().zip(tr.v(j)).map(|(a, b)| (a - b) * (a - b)).sum();
        max_u = max_u.max(libm::sqrt(du));
        max_v = max_v.max(libm::sqrt(dv));
        max_total = max_total.max(libm::sqrt(du + dv));
        sum_sq += du + dv;
    }
    Ok(DeviationReport {
        max_u,
        max_v,
        max_total,
        rms_total: libm::sqrt(sum_sq / samples as f64),
        epsilon: check_assumption1(network.spec(), network.omega(), f64::INFINITY).tau,
        t_end: opts.t_end,
        samples,
    })
}

use alloc::string::String;
use alloc::vec::Vec;

use super::{ClosedLoop, ModelKind, SystemState};
use crate::controller::Frame;
use crate::{Result, VocError};

/// Autonomous or time-varying ODE `ẋ = f(t, x)` on a flat state.
pub trait VectorField {
    fn dim(&self) -> usize;

    /// Writes `f(t, x)` into `dx`. Must not allocate on the hot path.
    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]);
}

/// Classical fourth-order Runge–Kutta with reusable stage buffers.
#[derive(Clone, Debug)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        let z = alloc::vec![0.0; dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// Advances `x` from `t` to `t + dt` in place.
    pub fn step<F: VectorField + ?Sized>(&mut self, f: &F, t: f64, x: &mut [f64], dt: f64) {
        let h2 = 0.5 * dt;
        f.eval(t, x, &mut self.k1);
        for ((y, &a), &k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k1) {
            *y = a + h2 * k;
        }
        f.eval(t + h2, &self.tmp, &mut self.k2);
        for ((y, &a), &k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k2) {
            *y = a + h2 * k;
        }
        f.eval(t + h2, &self.tmp, &mut self.k3);
        for ((y, &a), &k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k3) {
            *y = a + dt * k;
        }
        f.eval(t + dt, &self.tmp, &mut self.k4);
        let h6 = dt / 6.0;
        for (j, a) in x.iter_mut().enumerate() {
            *a += h6 * (self.k1[j] + 2.0 * (self.k2[j] + self.k3[j]) + self.k4[j]);
        }
    }
}

/// Step size, end time and output decimation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationOptions {
    pub dt: f64,
    /// Absolute end time; integration starts at the initial state's time.
    pub t_end: f64,
    /// Keep every `stride`-th step.
    pub stride: usize,
}

impl IntegrationOptions {
    pub const DEFAULT_STRIDE: usize = 20;

    pub fn new(dt: f64, t_end: f64, stride: usize) -> Result<Self> {
        let opts = Self { dt, t_end, stride };
        opts.validate()?;
        Ok(opts)
    }

    /// Default step for `kind` and the default stride.
    pub fn for_model(kind: ModelKind, t_end: f64) -> Self {
        Self {
            dt: kind.default_dt(),
            t_end,
            stride: Self::DEFAULT_STRIDE,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(VocError::InvalidIntegration("dt must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(VocError::InvalidIntegration("t_end must be positive"));
        }
        if self.stride == 0 {
            return Err(VocError::InvalidIntegration("stride must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps from `t0`, which must land on `t_end`.
    fn steps_from(&self, t0: f64) -> Result<usize> {
        self.validate()?;
        let span = (self.t_end - t0) / self.dt;
        let steps = libm::round(span);
        if steps < 1.0 {
            return Err(VocError::InvalidIntegration("t_end must exceed the initial time"));
        }
        if libm::fabs(span - steps) > 1e-6 {
            return Err(VocError::InvalidIntegration("t_end is not a whole number of steps"));
        }
        Ok(steps as usize)
    }
}

/// Piecewise-constant load change applied at an exact step boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParameterStep {
    pub time: f64,
    /// Zero-based node index.
    pub node: usize,
    pub conductance: f64,
}

/// Decimated samples of one integration run.
///
/// Rows are stored contiguously; for a [`ClosedLoop`] run each row is
/// `[u, v, i]` in the model's frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    kind: Option<ModelKind>,
    frame: Option<Frame>,
    n: usize,
    lines: Option<usize>,
    width: usize,
    dt: f64,
    stride: usize,
    steps: usize,
    id: String,
    event_times: Vec<f64>,
    times: Vec<f64>,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn kind(&self) -> Option<ModelKind> {
        self.kind
    }

    /// Frame of the stored samples; differs from the model's after a
    /// conversion.
    pub fn frame(&self) -> Option<Frame> {
        self.frame
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lines(&self) -> Option<usize> {
        self.lines
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Time between stored samples.
    pub fn sample_interval(&self) -> f64 {
        self.dt * self.stride as f64
    }

    /// Integrator steps taken.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn set_id(&mut self, id: impl Into<String>) {
        self.id = id.into();
    }

    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, j: usize) -> f64 {
        self.times[j]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.width..(j + 1) * self.width]
    }

    pub fn last_row(&self) -> &[f64] {
        self.row(self.len() - 1)
    }

    pub fn u(&self, j: usize) -> &[f64] {
        &self.row(j)[..2 * self.n]
    }

    pub fn v(&self, j: usize) -> &[f64] {
        &self.row(j)[2 * self.n..4 * self.n]
    }

    pub fn i(&self, j: usize) -> Option<&[f64]> {
        self.lines.map(|m| &self.row(j)[4 * self.n..4 * self.n + 2 * m])
    }

    /// Sample `j` as a tagged state; `None` for runs of a bare vector field.
    pub fn state(&self, j: usize) -> Option<SystemState> {
        let frame = self.frame()?;
        Some(SystemState::from_flat(self.row(j), self.n, self.lines, frame, self.times[j]))
    }

    /// Keeps every `k`-th sample, multiplying the stride by `k`.
    pub fn decimate(&self, k: usize) -> Self {
        let k = k.max(1);
        let mut out = self.clone();
        out.stride = self.stride * k;
        out.times = self.times.iter().step_by(k).copied().collect();
        out.data = self
            .data
            .chunks_exact(self.width)
            .step_by(k)
            .flatten()
            .copied()
            .collect();
        out
    }

    pub(crate) fn map_rows(&self, frame: Frame, mut f: impl FnMut(f64, &mut [f64])) -> Self {
        let mut out = self.clone();
        out.frame = Some(frame);
        for (j, row) in out.data.chunks_exact_mut(self.width).enumerate() {
            f(self.times[j], row);
        }
        out
    }
}

struct Recorder {
    stride: usize,
    times: Vec<f64>,
    data: Vec<f64>,
}

impl Recorder {
    fn new(width: usize, stride: usize, steps: usize) -> Self {
        let rows = steps / stride + 1;
        Self {
            stride,
            times: Vec::with_capacity(rows),
            data: Vec::with_capacity(rows * width),
        }
    }

    fn offer(&mut self, j: usize, t: f64, x: &[f64]) {
        if j % self.stride == 0 {
            self.times.push(t);
            self.data.extend_from_slice(x);
        }
    }
}

fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|a| a.is_finite())
}

/// Runs steps `from..to` (step `j` ends at `t0 + j·dt`).
fn run_segment<F: VectorField + ?Sized>(
    f: &F,
    rk: &mut Rk4,
    x: &mut [f64],
    t0: f64,
    dt: f64,
    from: usize,
    to: usize,
    rec: &mut Recorder,
) -> Result<()> {
    for j in from..to {
        let t = t0 + j as f64 * dt;
        rk.step(f, t, x, dt);
        if !all_finite(x) {
            return Err(VocError::IntegrationDiverged { last_good_time: t });
        }
        rec.offer(j + 1, t0 + (j + 1) as f64 * dt, x);
    }
    Ok(())
}

/// Integrates a bare vector field from `(t0, x0)`.
pub fn integrate_field<F: VectorField + ?Sized>(
    f: &F,
    t0: f64,
    x0: &[f64],
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    if x0.len() != f.dim() {
        return Err(VocError::DimensionMismatch {
            what: "initial state",
            expected: f.dim(),
            found: x0.len(),
        });
    }
    if !all_finite(x0) {
        return Err(VocError::NonFinite {
            what: "initial state",
            index: 0,
        });
    }
    let steps = opts.steps_from(t0)?;
    let mut rec = Recorder::new(x0.len(), opts.stride, steps);
    let mut x = x0.to_vec();
    rec.offer(0, t0, &x);
    let mut rk = Rk4::new(x.len());
    run_segment(f, &mut rk, &mut x, t0, opts.dt, 0, steps, &mut rec)?;
    Ok(Trajectory {
        kind: None,
        frame: None,
        n: 0,
        lines: None,
        width: x0.len(),
        dt: opts.dt,
        stride: opts.stride,
        steps,
        id: String::new(),
        event_times: Vec::new(),
        times: rec.times,
        data: rec.data,
    })
}

/// Integrates a closed-loop model, applying load steps at their grid points.
///
/// Samples are taken at `t₀ + j·dt` for `j` a multiple of the stride. An event
/// exactly at a step boundary takes effect for the steps after it.
pub fn integrate(
    model: &ClosedLoop,
    x0: &SystemState,
    opts: &IntegrationOptions,
    events: &[ParameterStep],
) -> Result<Trajectory> {
    let t0 = x0.t;
    let steps = opts.steps_from(t0)?;
    let mut x = model.pack(x0)?;
    if !all_finite(&x) {
        return Err(VocError::NonFinite {
            what: "initial state",
            index: 0,
        });
    }

    let mut scheduled: Vec<(usize, ParameterStep)> = Vec::with_capacity(events.len());
    for ev in events {
        let pos = (ev.time - t0) / opts.dt;
        let j = libm::round(pos);
        if j < 0.0 || j as usize > steps || libm::fabs(pos - j) > 1e-6 {
            return Err(VocError::EventOffGrid { time: ev.time });
        }
        if ev.node >= model.n() {
            return Err(VocError::DimensionMismatch {
                what: "event node",
                expected: model.n(),
                found: ev.node,
            });
        }
        scheduled.push((j as usize, *ev));
    }
    scheduled.sort_by_key(|(j, _)| *j);

    let mut plant = model.clone();
    let mut rec = Recorder::new(x.len(), opts.stride, steps);
    rec.offer(0, t0, &x);
    let mut rk = Rk4::new(x.len());
    let mut at = 0;
    for (j, ev) in &scheduled {
        run_segment(&plant, &mut rk, &mut x, t0, opts.dt, at, *j, &mut rec)?;
        plant.set_conductance(ev.node, ev.conductance)?;
        at = *j;
    }
    run_segment(&plant, &mut rk, &mut x, t0, opts.dt, at, steps, &mut rec)?;

    Ok(Trajectory {
        kind: Some(model.kind()),
        frame: Some(model.frame()),
        n: model.n(),
        lines: model.lines(),
        width: x.len(),
        dt: opts.dt,
        stride: opts.stride,
        steps,
        id: String::new(),
        event_times: scheduled.iter().map(|(_, e)| e.time).collect(),
        times: rec.times,
        data: rec.data,
    })
}

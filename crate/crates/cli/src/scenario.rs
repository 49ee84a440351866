//! Scenario files: a TOML key tree with sections `network`, `controller`,
//! `setpoints`, `simulation`, `events`, and the optional `sweep`,
//! `analysis` and `reference`.
//!
//! Node numbers in scenario files are one-based; everything past this module
//! is zero-based.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use lamvoc::analysis::DEFAULT_TAU_STAR;
use lamvoc::controller::{ControllerGains, Setpoints};
use lamvoc::dynamics::{ClosedLoop, IntegrationOptions, ModelKind, ParameterStep, SystemState};
use lamvoc::network::{LineParams, Network, NetworkSpec, NodeParams};
use lamvoc::{DVector, VocError};
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario syntax: {0}")]
    Syntax(String),
    #[error("missing key: {0}")]
    Missing(String),
    #[error("{key}: expected {expected}")]
    Type { key: String, expected: &'static str },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

type Result<T> = std::result::Result<T, ScenarioError>;

fn invalid(key: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

/// How the state at `t = 0` is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    /// On the synchronous solution.
    Steady,
    /// Synchronous solution with one node voltage shifted by `delta_v`.
    Perturbed { node: usize, delta_v: [f64; 2] },
    /// Given vectors; line currents default to the slow manifold.
    Explicit {
        u: Vec<f64>,
        v: Vec<f64>,
        i: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub scales: Vec<f64>,
    pub t_end: f64,
}

/// Voltage operating point to compare the computed steady state against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VoltageReference {
    pub amplitude: f64,
    pub angle: f64,
}

/// Fully validated experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub spec: NetworkSpec,
    pub gains: ControllerGains,
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
    /// Nominal angular frequency (rad/s).
    pub omega: f64,
    pub model: ModelKind,
    /// Step size when set explicitly; otherwise the model default.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub stride: usize,
    pub initial: InitialCondition,
    pub events: Vec<ParameterStep>,
    pub with_lines: bool,
    pub sweep: SweepConfig,
    pub tau_star: f64,
    pub reference: Option<VoltageReference>,
}

/// Command-line overrides applied on top of a parsed scenario.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub stride: Option<usize>,
    pub model: Option<ModelKind>,
    pub with_lines: bool,
    pub extra_events: Vec<ParameterStep>,
}

pub fn parse_model(s: &str) -> Option<ModelKind> {
    match s {
        "alphabeta" => Some(ModelKind::AlphaBeta),
        "dq" => Some(ModelKind::Dq),
        "reduced" => Some(ModelKind::Reduced),
        _ => None,
    }
}

pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let fallback_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());
    parse_scenario_str(&text, &fallback_id)
}

/// A required section; when absent the error names its first required key.
fn section<'a>(root: &'a Table, name: &str, first: &str) -> Result<&'a Table> {
    match root.get(name) {
        Some(Value::Table(t)) => Ok(t),
        Some(_) => Err(ScenarioError::Type {
            key: name.to_string(),
            expected: "a section",
        }),
        None => Err(ScenarioError::Missing(format!("{name}.{first}"))),
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn req<'a>(t: &'a Table, sec: &str, key: &str) -> Result<&'a Value> {
    t.get(key).ok_or_else(|| ScenarioError::Missing(format!("{sec}.{key}")))
}

fn number(t: &Table, sec: &str, key: &str) -> Result<f64> {
    let v = req(t, sec, key)?;
    let x = as_f64(v).ok_or_else(|| ScenarioError::Type {
        key: format!("{sec}.{key}"),
        expected: "a number",
    })?;
    if !x.is_finite() {
        return Err(invalid(&format!("{sec}.{key}"), "value must be finite"));
    }
    Ok(x)
}

fn opt_number(t: &Table, sec: &str, key: &str) -> Result<Option<f64>> {
    if t.contains_key(key) {
        number(t, sec, key).map(Some)
    } else {
        Ok(None)
    }
}

fn positive_number(t: &Table, sec: &str, key: &str, what: &str) -> Result<f64> {
    let x = number(t, sec, key)?;
    if x <= 0.0 {
        return Err(invalid(&format!("{sec}.{key}"), format!("{what} must be positive (got {x})")));
    }
    Ok(x)
}

fn integer(t: &Table, sec: &str, key: &str) -> Result<i64> {
    match req(t, sec, key)? {
        Value::Integer(i) => Ok(*i),
        _ => Err(ScenarioError::Type {
            key: format!("{sec}.{key}"),
            expected: "an integer",
        }),
    }
}

fn number_list(v: &Value, key: &str) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| ScenarioError::Type {
        key: key.to_string(),
        expected: "an array of numbers",
    })?;
    arr.iter()
        .map(|x| {
            as_f64(x).ok_or_else(|| ScenarioError::Type {
                key: key.to_string(),
                expected: "an array of numbers",
            })
        })
        .collect()
}

/// A scalar broadcast to `len` entries, or an array of exactly `len`.
fn per_item(t: &Table, sec: &str, key: &str, len: usize, default: Option<f64>) -> Result<Vec<f64>> {
    let path = format!("{sec}.{key}");
    let Some(v) = t.get(key) else {
        return default
            .map(|d| vec![d; len])
            .ok_or(ScenarioError::Missing(path));
    };
    if let Some(x) = as_f64(v) {
        return Ok(vec![x; len]);
    }
    let xs = number_list(v, &path)?;
    if xs.len() != len {
        return Err(invalid(&path, format!("expected {len} entries, found {}", xs.len())));
    }
    Ok(xs)
}

fn all_positive(key: &str, what: &str, item: &str, xs: &[f64]) -> Result<()> {
    for (k, &x) in xs.iter().enumerate() {
        if !(x > 0.0 && x.is_finite()) {
            return Err(invalid(key, format!("{what} must be positive ({item} {}, got {x})", k + 1)));
        }
    }
    Ok(())
}

fn one_based(key: &str, raw: i64, n: usize) -> Result<usize> {
    if raw < 1 || raw as usize > n {
        return Err(invalid(key, format!("node {raw} does not exist (network has {n} nodes)")));
    }
    Ok(raw as usize - 1)
}

pub fn parse_scenario_str(text: &str, fallback_id: &str) -> Result<Scenario> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| ScenarioError::Syntax(e.message().to_string()))?;

    let id = match root.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            return Err(ScenarioError::Type {
                key: "id".into(),
                expected: "a string",
            })
        }
        None => fallback_id.to_string(),
    };

    // network
    let net = section(&root, "network", "n")?;
    let n_raw = integer(net, "network", "n")?;
    if n_raw < 1 {
        return Err(invalid("network.n", "network needs at least one node"));
    }
    let n = n_raw as usize;
    let mut edges = Vec::new();
    if let Some(v) = net.get("edges") {
        let arr = v.as_array().ok_or_else(|| ScenarioError::Type {
            key: "network.edges".into(),
            expected: "an array of [from, to] pairs",
        })?;
        for (e, pair) in arr.iter().enumerate() {
            let key = format!("network.edges[{}]", e + 1);
            let p = pair.as_array().filter(|p| p.len() == 2).ok_or_else(|| ScenarioError::Type {
                key: key.clone(),
                expected: "a [from, to] pair",
            })?;
            let ends: Vec<i64> = p
                .iter()
                .map(|x| {
                    x.as_integer().ok_or_else(|| ScenarioError::Type {
                        key: key.clone(),
                        expected: "integer node numbers",
                    })
                })
                .collect::<Result<_>>()?;
            let from = one_based(&key, ends[0], n)?;
            let to = one_based(&key, ends[1], n)?;
            if from == to {
                return Err(invalid(&key, format!("self-loop on node {}", from + 1)));
            }
            edges.push((from, to));
        }
    }
    let m = edges.len();
    let capacitance = per_item(net, "network", "capacitance", n, None)?;
    let conductance = per_item(net, "network", "conductance", n, None)?;
    all_positive("network.capacitance", "capacitance", "node", &capacitance)?;
    all_positive("network.conductance", "conductance", "node", &conductance)?;
    let (resistance, inductance, shunt) = if m == 0 {
        (vec![], vec![], vec![])
    } else {
        let r = per_item(net, "network", "line_resistance", m, None)?;
        let l = per_item(net, "network", "line_inductance", m, None)?;
        let c = per_item(net, "network", "line_capacitance", m, Some(0.0))?;
        all_positive("network.line_resistance", "line resistance", "edge", &r)?;
        all_positive("network.line_inductance", "line inductance", "edge", &l)?;
        if let Some((e, x)) = c.iter().enumerate().find(|(_, &x)| !(x >= 0.0)) {
            return Err(invalid(
                "network.line_capacitance",
                format!("line capacitance must be non-negative (edge {}, got {x})", e + 1),
            ));
        }
        (r, l, c)
    };
    let nodes = capacitance
        .iter()
        .zip(&conductance)
        .map(|(&c, &g)| NodeParams {
            capacitance: c,
            conductance: g,
        })
        .collect();
    let lines = (0..m)
        .map(|e| LineParams {
            resistance: resistance[e],
            inductance: inductance[e],
            shunt_capacitance: shunt[e],
        })
        .collect();
    let spec = NetworkSpec::new(nodes, edges, lines).map_err(|e| invalid("network", e.to_string()))?;

    // controller
    let ctl = section(&root, "controller", "gamma")?;
    let gamma = per_item(ctl, "controller", "gamma", n, None)?;
    let alpha = per_item(ctl, "controller", "alpha", n, None)?;
    all_positive("controller.gamma", "gamma", "node", &gamma)?;
    all_positive("controller.alpha", "alpha", "node", &alpha)?;
    let gains = ControllerGains::new(gamma, alpha).map_err(|e| invalid("controller", e.to_string()))?;

    // setpoints
    let sp = section(&root, "setpoints", "amplitude")?;
    let amplitude = per_item(sp, "setpoints", "amplitude", n, None)?;
    all_positive("setpoints.amplitude", "amplitude", "node", &amplitude)?;
    let phase = per_item(sp, "setpoints", "phase", n, Some(0.0))?;
    let omega = match (opt_number(sp, "setpoints", "frequency")?, opt_number(sp, "setpoints", "omega")?) {
        (Some(_), Some(_)) => {
            return Err(invalid("setpoints", "give either frequency (Hz) or omega (rad/s), not both"))
        }
        (Some(f), None) => 2.0 * PI * f,
        (None, Some(w)) => w,
        (None, None) => return Err(ScenarioError::Missing("setpoints.frequency".into())),
    };
    if omega < 0.0 {
        return Err(invalid("setpoints.frequency", "frequency must be non-negative"));
    }

    // simulation
    let empty = Table::new();
    let sim = match root.get("simulation") {
        None => &empty,
        Some(Value::Table(t)) => t,
        Some(_) => {
            return Err(ScenarioError::Type {
                key: "simulation".into(),
                expected: "a section",
            })
        }
    };
    let model = match sim.get("model") {
        None => ModelKind::AlphaBeta,
        Some(Value::String(s)) => parse_model(s).ok_or_else(|| {
            invalid("simulation.model", format!("unknown model {s:?} (alphabeta, dq or reduced)"))
        })?,
        Some(_) => {
            return Err(ScenarioError::Type {
                key: "simulation.model".into(),
                expected: "a string",
            })
        }
    };
    let dt = if sim.contains_key("dt") {
        Some(positive_number(sim, "simulation", "dt", "dt")?)
    } else {
        None
    };
    let t_end = if sim.contains_key("t_end") {
        positive_number(sim, "simulation", "t_end", "t_end")?
    } else {
        1.0
    };
    let stride = if sim.contains_key("stride") {
        let s = integer(sim, "simulation", "stride")?;
        if s < 1 {
            return Err(invalid("simulation.stride", "stride must be at least 1"));
        }
        s as usize
    } else {
        IntegrationOptions::DEFAULT_STRIDE
    };
    let with_lines = match sim.get("with_lines") {
        None => false,
        Some(Value::Boolean(b)) => *b,
        Some(_) => {
            return Err(ScenarioError::Type {
                key: "simulation.with_lines".into(),
                expected: "true or false",
            })
        }
    };
    let initial = match sim.get("initial") {
        None => InitialCondition::Steady,
        Some(Value::String(s)) => match s.as_str() {
            "steady" => InitialCondition::Steady,
            "perturbed" => {
                let node = one_based("simulation.node", integer(sim, "simulation", "node")?, n)?;
                let d = number_list(req(sim, "simulation", "delta_v")?, "simulation.delta_v")?;
                if d.len() != 2 {
                    return Err(invalid("simulation.delta_v", "expected a planar vector [d, q]"));
                }
                InitialCondition::Perturbed {
                    node,
                    delta_v: [d[0], d[1]],
                }
            }
            "explicit" => {
                let u = number_list(req(sim, "simulation", "u")?, "simulation.u")?;
                let v = number_list(req(sim, "simulation", "v")?, "simulation.v")?;
                for (key, len) in [("simulation.u", u.len()), ("simulation.v", v.len())] {
                    if len != 2 * n {
                        return Err(invalid(key, format!("expected {} entries, found {len}", 2 * n)));
                    }
                }
                let i = match sim.get("i") {
                    None => None,
                    Some(x) => {
                        let i = number_list(x, "simulation.i")?;
                        if i.len() != 2 * m {
                            return Err(invalid(
                                "simulation.i",
                                format!("expected {} entries, found {}", 2 * m, i.len()),
                            ));
                        }
                        Some(i)
                    }
                };
                InitialCondition::Explicit { u, v, i }
            }
            other => {
                return Err(invalid(
                    "simulation.initial",
                    format!("unknown initial condition {other:?} (steady, perturbed or explicit)"),
                ))
            }
        },
        Some(_) => {
            return Err(ScenarioError::Type {
                key: "simulation.initial".into(),
                expected: "a string",
            })
        }
    };

    // events
    let mut events = Vec::new();
    if let Some(v) = root.get("events") {
        let arr = v.as_array().ok_or_else(|| ScenarioError::Type {
            key: "events".into(),
            expected: "an array of tables ([[events]])",
        })?;
        for (e, ev) in arr.iter().enumerate() {
            let sec = format!("events[{}]", e + 1);
            let t = ev.as_table().ok_or_else(|| ScenarioError::Type {
                key: sec.clone(),
                expected: "a table",
            })?;
            let time = number(t, &sec, "time")?;
            let node = one_based(&format!("{sec}.node"), integer(t, &sec, "node")?, n)?;
            let conductance = positive_number(t, &sec, "conductance", "conductance")?;
            events.push(ParameterStep {
                time,
                node,
                conductance,
            });
        }
    }

    // sweep
    let sweep = match root.get("sweep").and_then(Value::as_table) {
        None => SweepConfig {
            scales: vec![1.0, 0.5, 0.25],
            t_end: 0.05,
        },
        Some(t) => {
            let scales = match t.get("scales") {
                None => vec![1.0, 0.5, 0.25],
                Some(v) => number_list(v, "sweep.scales")?,
            };
            all_positive("sweep.scales", "scale", "entry", &scales)?;
            let t_end = if t.contains_key("t_end") {
                positive_number(t, "sweep", "t_end", "t_end")?
            } else {
                0.05
            };
            SweepConfig { scales, t_end }
        }
    };

    let tau_star = match root.get("analysis").and_then(Value::as_table) {
        Some(t) if t.contains_key("tau_star") => positive_number(t, "analysis", "tau_star", "tau_star")?,
        _ => DEFAULT_TAU_STAR,
    };

    let reference = match root.get("reference").and_then(Value::as_table) {
        None => None,
        Some(t) => Some(VoltageReference {
            amplitude: positive_number(t, "reference", "voltage_amplitude", "voltage amplitude")?,
            angle: number(t, "reference", "voltage_angle")?,
        }),
    };

    let scenario = Scenario {
        id,
        spec,
        gains,
        amplitude,
        phase,
        omega,
        model,
        dt,
        t_end,
        stride,
        initial,
        events,
        with_lines,
        sweep,
        tau_star,
        reference,
    };
    scenario.check_events()?;
    Ok(scenario)
}

impl Scenario {
    fn check_events(&self) -> Result<()> {
        for (e, ev) in self.events.iter().enumerate() {
            if !(ev.time >= 0.0 && ev.time <= self.t_end) {
                return Err(invalid(
                    &format!("events[{}].time", e + 1),
                    format!("event time {} lies outside [0, {}]", ev.time, self.t_end),
                ));
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(dt) = o.dt {
            if !(dt > 0.0) {
                return Err(invalid("--dt", "dt must be positive"));
            }
            self.dt = Some(dt);
        }
        if let Some(t) = o.t_end {
            if !(t > 0.0) {
                return Err(invalid("--t-end", "t_end must be positive"));
            }
            self.t_end = t;
        }
        if let Some(s) = o.stride {
            if s == 0 {
                return Err(invalid("--stride", "stride must be at least 1"));
            }
            self.stride = s;
        }
        if let Some(m) = o.model {
            self.model = m;
        }
        self.with_lines |= o.with_lines;
        for ev in &o.extra_events {
            if ev.node >= self.spec.n() {
                return Err(invalid("--step-g", format!("node {} does not exist", ev.node + 1)));
            }
            if !(ev.conductance > 0.0) {
                return Err(invalid("--step-g", "conductance must be positive"));
            }
            self.events.push(*ev);
        }
        self.check_events()
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn integration(&self) -> IntegrationOptions {
        IntegrationOptions {
            dt: self.dt.unwrap_or_else(|| self.model.default_dt()),
            t_end: self.t_end,
            stride: self.stride,
        }
    }

    pub fn network(&self) -> std::result::Result<Network, VocError> {
        Network::build(self.spec.clone(), self.omega)
    }

    pub fn setpoints(&self, network: &Network) -> std::result::Result<Setpoints, VocError> {
        Setpoints::derive(network, self.amplitude.clone(), self.phase.clone())
    }

    pub fn closed_loop(&self) -> std::result::Result<ClosedLoop, VocError> {
        let net = self.network()?;
        let sp = self.setpoints(&net)?;
        ClosedLoop::new(self.model, net, sp, self.gains.clone())
    }

    /// Initial state in the model's frame; at `t = 0` the stationary and
    /// rotating frames coincide.
    pub fn initial_state(&self, model: &ClosedLoop) -> SystemState {
        let mut s = model.steady_state(0.0);
        match &self.initial {
            InitialCondition::Steady => {}
            InitialCondition::Perturbed { node, delta_v } => {
                s.v[2 * node] += delta_v[0];
                s.v[2 * node + 1] += delta_v[1];
                if let Some(i) = s.i.as_mut() {
                    *i = model.network().quasi_steady_currents(&s.v);
                }
            }
            InitialCondition::Explicit { u, v, i } => {
                s.u = DVector::from_column_slice(u);
                s.v = DVector::from_column_slice(v);
                if s.i.is_some() {
                    s.i = Some(match i {
                        Some(i) => DVector::from_column_slice(i),
                        None => model.network().quasi_steady_currents(&s.v),
                    });
                }
            }
        }
        s
    }

    /// The scenario with every default filled in, in scenario syntax.
    pub fn resolved(&self) -> String {
        let mut root = Table::new();
        root.insert("id".into(), Value::String(self.id.clone()));
        let floats = |xs: &[f64]| Value::Array(xs.iter().map(|&x| Value::Float(x)).collect());

        let mut net = Table::new();
        net.insert("n".into(), Value::Integer(self.n() as i64));
        net.insert(
            "edges".into(),
            Value::Array(
                self.spec
                    .edges()
                    .iter()
                    .map(|e| {
                        Value::Array(vec![
                            Value::Integer(e.from as i64 + 1),
                            Value::Integer(e.to as i64 + 1),
                        ])
                    })
                    .collect(),
            ),
        );
        let nodes = self.spec.nodes();
        let lines = self.spec.lines();
        net.insert("capacitance".into(), floats(&nodes.iter().map(|p| p.capacitance).collect::<Vec<_>>()));
        net.insert("conductance".into(), floats(&nodes.iter().map(|p| p.conductance).collect::<Vec<_>>()));
        net.insert("line_resistance".into(), floats(&lines.iter().map(|l| l.resistance).collect::<Vec<_>>()));
        net.insert("line_inductance".into(), floats(&lines.iter().map(|l| l.inductance).collect::<Vec<_>>()));
        net.insert(
            "line_capacitance".into(),
            floats(&lines.iter().map(|l| l.shunt_capacitance).collect::<Vec<_>>()),
        );
        root.insert("network".into(), Value::Table(net));

        let mut ctl = Table::new();
        ctl.insert("gamma".into(), floats(self.gains.gamma()));
        ctl.insert("alpha".into(), floats(self.gains.alpha()));
        root.insert("controller".into(), Value::Table(ctl));

        let mut sp = Table::new();
        sp.insert("amplitude".into(), floats(&self.amplitude));
        sp.insert("phase".into(), floats(&self.phase));
        sp.insert("omega".into(), Value::Float(self.omega));
        root.insert("setpoints".into(), Value::Table(sp));

        let opts = self.integration();
        let mut sim = Table::new();
        sim.insert("model".into(), Value::String(self.model.name().into()));
        sim.insert("dt".into(), Value::Float(opts.dt));
        sim.insert("t_end".into(), Value::Float(opts.t_end));
        sim.insert("stride".into(), Value::Integer(opts.stride as i64));
        sim.insert("with_lines".into(), Value::Boolean(self.with_lines));
        match &self.initial {
            InitialCondition::Steady => {
                sim.insert("initial".into(), Value::String("steady".into()));
            }
            InitialCondition::Perturbed { node, delta_v } => {
                sim.insert("initial".into(), Value::String("perturbed".into()));
                sim.insert("node".into(), Value::Integer(*node as i64 + 1));
                sim.insert("delta_v".into(), floats(delta_v));
            }
            InitialCondition::Explicit { u, v, i } => {
                sim.insert("initial".into(), Value::String("explicit".into()));
                sim.insert("u".into(), floats(u));
                sim.insert("v".into(), floats(v));
                if let Some(i) = i {
                    sim.insert("i".into(), floats(i));
                }
            }
        }
        root.insert("simulation".into(), Value::Table(sim));

        let events = self
            .events
            .iter()
            .map(|e| {
                let mut t = Table::new();
                t.insert("time".into(), Value::Float(e.time));
                t.insert("node".into(), Value::Integer(e.node as i64 + 1));
                t.insert("conductance".into(), Value::Float(e.conductance));
                Value::Table(t)
            })
            .collect();
        root.insert("events".into(), Value::Array(events));

        let mut sweep = Table::new();
        sweep.insert("scales".into(), floats(&self.sweep.scales));
        sweep.insert("t_end".into(), Value::Float(self.sweep.t_end));
        root.insert("sweep".into(), Value::Table(sweep));

        let mut analysis = Table::new();
        analysis.insert("tau_star".into(), Value::Float(self.tau_star));
        root.insert("analysis".into(), Value::Table(analysis));

        if let Some(r) = self.reference {
            let mut t = Table::new();
            t.insert("voltage_amplitude".into(), Value::Float(r.amplitude));
            t.insert("voltage_angle".into(), Value::Float(r.angle));
            root.insert("reference".into(), Value::Table(t));
        }
        toml::to_string(&root).expect("scenario tables serialize")
    }
}

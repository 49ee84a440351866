//! The work behind each subcommand, independent of argument parsing.

use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use lamvoc::analysis::{check_assumption1, compute_condition1, jacobian_at_origin, StabilityReport};
use lamvoc::controller::{wrap_angle, Setpoints};
use lamvoc::dynamics::{compare_full_reduced, integrate, ClosedLoop, CompareOptions, ModelKind, ParameterStep, Trajectory};
use lamvoc::network::Network;

use crate::error::{CliError, Result};
use crate::output::{save_csv, save_text, stability_report, Report};
use crate::scenario::Scenario;

/// Summary of one integration run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub id: String,
    pub model: ModelKind,
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    /// Four per RK4 step.
    pub rhs_evaluations: usize,
    pub samples: usize,
    pub events: Vec<ParameterStep>,
    pub wall_seconds: f64,
    pub final_amplitude: Vec<f64>,
    /// `wrap(θ − θ*)` at the last sample, stationary-frame reference.
    pub final_angle_error: Vec<f64>,
    pub final_voltage_amplitude: Vec<f64>,
}

impl RunReport {
    pub fn to_report(&self) -> Report {
        let mut r = Report::new(format!("simulation run: {}", self.id));
        r.text("model", self.model.name());
        r.number("dt", self.dt);
        r.number("t_end", self.t_end);
        r.text("steps", self.steps.to_string());
        r.text("rhs_evaluations", self.rhs_evaluations.to_string());
        r.text("samples", self.samples.to_string());
        r.text("events", self.events.len().to_string());
        for (e, ev) in self.events.iter().enumerate() {
            r.push(
                format!("event_{}", e + 1),
                format!("t = {} s, node {}, G -> {}", ev.time, ev.node + 1, ev.conductance),
                format!("{}:{}:{}", ev.node + 1, ev.conductance, ev.time),
            );
        }
        r.push("wall_seconds", format!("{:.3}", self.wall_seconds), self.wall_seconds.to_string());
        for k in 0..self.final_amplitude.len() {
            r.number(format!("final_r_{}", k + 1), self.final_amplitude[k]);
            r.number(format!("final_theta_err_{}", k + 1), self.final_angle_error[k]);
            r.number(format!("final_v_amplitude_{}", k + 1), self.final_voltage_amplitude[k]);
        }
        r
    }
}

/// `NODE:VALUE:TIME` with a one-based node.
pub fn parse_step(s: &str) -> Result<ParameterStep> {
    let bad = || CliError::Usage(format!("--step-g expects NODE:VALUE:TIME, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let node: usize = parts[0].trim().parse().map_err(|_| bad())?;
    let conductance: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let time: f64 = parts[2].trim().parse().map_err(|_| bad())?;
    if node == 0 {
        return Err(CliError::Usage("--step-g node numbers start at 1".into()));
    }
    Ok(ParameterStep {
        time,
        node: node - 1,
        conductance,
    })
}

/// Integrates the scenario; the trajectory stays in the model's frame.
pub fn simulate(scenario: &Scenario) -> Result<(Trajectory, Setpoints, RunReport)> {
    let model = scenario.closed_loop()?;
    let x0 = scenario.initial_state(&model);
    let opts = scenario.integration();
    let start = Instant::now();
    let mut traj = integrate(&model, &x0, &opts, &scenario.events)?;
    let wall_seconds = start.elapsed().as_secs_f64();
    traj.set_id(scenario.id.clone());

    let sp = model.setpoints().clone();
    let last = traj.len() - 1;
    let t = traj.time(last);
    let frame = model.frame();
    let (u, v) = (traj.u(last), traj.v(last));
    let n = scenario.n();
    let final_amplitude: Vec<f64> = (0..n).map(|k| u[2 * k].hypot(u[2 * k + 1])).collect();
    let final_voltage_amplitude = (0..n).map(|k| v[2 * k].hypot(v[2 * k + 1])).collect();
    let final_angle_error = (0..n)
        .map(|k| wrap_angle(u[2 * k + 1].atan2(u[2 * k]) - sp.theta_ref(k, t, frame)))
        .collect();
    let report = RunReport {
        id: scenario.id.clone(),
        model: scenario.model,
        dt: opts.dt,
        t_end: opts.t_end,
        steps: traj.steps(),
        rhs_evaluations: 4 * traj.steps(),
        samples: traj.len(),
        events: scenario.events.clone(),
        wall_seconds,
        final_amplitude,
        final_angle_error,
        final_voltage_amplitude,
    };
    Ok((traj, sp, report))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes `<id>.csv`, the run report pair and the resolved scenario.
pub fn write_simulation(
    dir: &Path,
    scenario: &Scenario,
    traj: &Trajectory,
    sp: &Setpoints,
    report: &RunReport,
) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let id = &scenario.id;
    let csv = dir.join(format!("{id}.csv"));
    save_csv(&csv, traj, sp, scenario.with_lines)?;
    let rep = report.to_report();
    let txt = dir.join(format!("{id}.report.txt"));
    let kv = dir.join(format!("{id}.report.kv"));
    let scn = dir.join(format!("{id}.resolved.scn"));
    save_text(&txt, &rep.to_text())?;
    save_text(&kv, &rep.to_kv())?;
    save_text(&scn, &scenario.resolved())?;
    Ok(vec![csv, txt, kv, scn])
}

pub fn check_stability(scenario: &Scenario) -> Result<(StabilityReport, Report)> {
    let net = scenario.network()?;
    let sp = scenario.setpoints(&net)?;
    let cert = compute_condition1(&net, &sp, &scenario.gains, scenario.tau_star)?;
    let a1 = check_assumption1(&scenario.spec, scenario.omega, scenario.tau_star);
    let origin = jacobian_at_origin(&net, &sp, &scenario.gains)?;
    let rep = stability_report(&scenario.id, &cert, &a1, &origin);
    Ok((cert, rep))
}

/// Writes `<id>.<stem>.txt` and `<id>.<stem>.kv`.
pub fn write_report(dir: &Path, id: &str, stem: &str, rep: &Report) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let txt = dir.join(format!("{id}.{stem}.txt"));
    let kv = dir.join(format!("{id}.{stem}.kv"));
    save_text(&txt, &rep.to_text())?;
    save_text(&kv, &rep.to_kv())?;
    Ok(vec![txt, kv])
}

/// Synchronous operating point in the rotating frame.
pub fn steady_state(scenario: &Scenario) -> Result<Report> {
    let net = scenario.network()?;
    let sp = scenario.setpoints(&net)?;
    let (u, v, i) = (sp.u_dq(), sp.v_dq(), sp.i_dq());
    let mut r = Report::new(format!("steady state: {}", scenario.id));
    r.number("omega", scenario.omega);
    r.number("residual", net.steady_state_residual(u, v, i));
    for k in 0..scenario.n() {
        let (d, q) = (v[2 * k], v[2 * k + 1]);
        let tag = k + 1;
        r.number(format!("v_d_{tag}"), d);
        r.number(format!("v_q_{tag}"), q);
        r.number(format!("v_amplitude_{tag}"), d.hypot(q));
        r.number(format!("v_angle_{tag}"), q.atan2(d));
        r.number(format!("u_amplitude_{tag}"), u[2 * k].hypot(u[2 * k + 1]));
        r.number(format!("u_angle_{tag}"), u[2 * k + 1].atan2(u[2 * k]));
    }
    for e in 0..net.m() {
        let tag = e + 1;
        r.number(format!("i_d_{tag}"), i[2 * e]);
        r.number(format!("i_q_{tag}"), i[2 * e + 1]);
    }
    if let Some(reference) = scenario.reference {
        for k in 0..scenario.n() {
            let (d, q) = (v[2 * k], v[2 * k + 1]);
            let tag = k + 1;
            r.number(format!("reference_amplitude_{tag}"), reference.amplitude);
            r.number(
                format!("amplitude_deviation_{tag}"),
                (d.hypot(q) - reference.amplitude).abs() / reference.amplitude,
            );
            r.number(format!("angle_deviation_{tag}"), wrap_angle(q.atan2(d) - reference.angle).abs());
        }
    }
    Ok(r)
}

/// One line-inductance scale of the singular-perturbation sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub scale: f64,
    pub epsilon: f64,
    pub max_deviation: f64,
    pub rms_deviation: f64,
    pub max_u: f64,
    pub max_v: f64,
}

fn sweep_one(scenario: &Scenario, scale: f64, t_end: f64) -> Result<SweepRow> {
    let spec = scenario.spec.with_inductance_scale(scale)?;
    let net = Network::build(spec, scenario.omega)?;
    // setpoints follow the scaled network
    let sp = scenario.setpoints(&net)?;
    let model = ClosedLoop::new(ModelKind::Dq, net.clone(), sp.clone(), scenario.gains.clone())?;
    let x0 = scenario.initial_state(&model);
    let dev = compare_full_reduced(&net, &sp, &scenario.gains, &x0.u, &x0.v, &CompareOptions::new(t_end))?;
    Ok(SweepRow {
        scale,
        epsilon: dev.epsilon,
        max_deviation: dev.max_total,
        rms_deviation: dev.rms_total,
        max_u: dev.max_u,
        max_v: dev.max_v,
    })
}

/// Runs every scale on its own thread; rows come back in input order.
pub fn sweep_epsilon(scenario: &Scenario, scales: &[f64], t_end: f64) -> Result<Vec<SweepRow>> {
    if scales.is_empty() {
        return Err(CliError::Usage("--scales needs at least one value".into()));
    }
    if let Some(s) = scales.iter().find(|s| !(**s > 0.0)) {
        return Err(CliError::Usage(format!("inductance scales must be positive, got {s}")));
    }
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        for (idx, &scale) in scales.iter().enumerate() {
            let tx = tx.clone();
            scope.spawn(move || {
                let _ = tx.send((idx, sweep_one(scenario, scale, t_end)));
            });
        }
    });
    drop(tx);
    let mut rows: Vec<Option<SweepRow>> = vec![None; scales.len()];
    for (idx, row) in rx {
        rows[idx] = Some(row?);
    }
    Ok(rows.into_iter().map(|r| r.expect("every worker reports")).collect())
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("scale,epsilon,max_deviation,rms_deviation,max_u,max_v\n");
    for r in rows {
        s.push_str(&format!(
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n",
            r.scale, r.epsilon, r.max_deviation, r.rms_deviation, r.max_u, r.max_v
        ));
    }
    s
}

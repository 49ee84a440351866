//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs with its own harness so the lines always reach the terminal and the
//! criteria run one at a time; the wall-clock limits assume no contention.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use lamvoc_cli::commands::{check_stability, simulate, steady_state, sweep_epsilon};
use lamvoc_cli::scenario::{parse_scenario, InitialCondition, Scenario};
use lamvoc::analysis::{
    compute_condition1, dist_to_su, jacobian_at_origin, lyapunov_values, verify_droop_identity, DEFAULT_TAU_STAR,
};
use lamvoc::controller::{wrap_angle, ControllerGains, Frame, Setpoints};
use lamvoc::dynamics::{
    integrate, integrate_field, BoundaryLayer, ClosedLoop, FreeOscillator, IntegrationOptions, ModelKind,
    PolarOscillator, SystemState, Trajectory,
};
use lamvoc::network::{LineParams, Network, NetworkSpec, NodeParams};
use lamvoc::{linalg, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn load_step_scenario() -> Scenario {
    parse_scenario(&scenario_path("three_converter.scn")).expect("bundled scenario parses")
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn(&mut Shared) -> Outcome;

/// The load-step run feeds two criteria; its cost is charged to the first.
#[derive(Default)]
struct Shared {
    load_step: Option<(Trajectory, Setpoints, ControllerGains)>,
}

impl Shared {
    fn load_step(&mut self) -> &(Trajectory, Setpoints, ControllerGains) {
        self.load_step.get_or_insert_with(|| {
            let mut sc = load_step_scenario();
            sc.stride = 10;
            let (traj, sp, _) = simulate(&sc).expect("load-step run");
            (traj, sp, sc.gains.clone())
        })
    }
}

fn c1_steady_state(_: &mut Shared) -> Outcome {
    let sc = load_step_scenario();
    let net = sc.network().unwrap();
    let sp = sc.setpoints(&net).unwrap();
    let res = net.steady_state_residual(sp.u_dq(), sp.v_dq(), sp.i_dq());
    outcome(res <= 1e-9, format!("relative residual {res:.3e} (limit 1e-9)"))
}

fn c2_certificate_numbers(_: &mut Shared) -> Outcome {
    let sc = load_step_scenario();
    let (cert, _) = check_stability(&sc).unwrap();
    let tau_err = (cert.tau / 2.49e-4 - 1.0).abs();
    let eps_err = (cert.epsilon / 1.693e-3 - 1.0).abs();
    outcome(
        tau_err <= 0.01 && eps_err <= 0.01,
        format!(
            "tau {:.5e} ({:.3}% off), epsilon {:.5e} ({:.3}% off)",
            cert.tau,
            100.0 * tau_err,
            cert.epsilon,
            100.0 * eps_err
        ),
    )
}

fn c3_orbit_fidelity(_: &mut Shared) -> Outcome {
    let mut sc = load_step_scenario();
    sc.events.clear();
    sc.model = ModelKind::AlphaBeta;
    sc.dt = Some(1e-6);
    sc.t_end = 0.2;
    sc.stride = 100;
    let (traj, sp, _) = simulate(&sc).unwrap();
    let (mut r_err, mut th_err) = (0.0f64, 0.0f64);
    for j in 0..traj.len() {
        let (u, t) = (traj.u(j), traj.time(j));
        for k in 0..sc.n() {
            let r = u[2 * k].hypot(u[2 * k + 1]);
            r_err = r_err.max((r / sp.amplitude()[k] - 1.0).abs());
            let th = u[2 * k + 1].atan2(u[2 * k]);
            th_err = th_err.max(wrap_angle(th - sp.theta_ref(k, t, Frame::AlphaBeta)).abs());
        }
    }
    outcome(
        r_err <= 1e-6 && th_err <= 1e-6,
        format!("max relative amplitude error {r_err:.3e}, max angle error {th_err:.3e} rad over 0.2 s"),
    )
}

fn c4_polar_oracle(_: &mut Shared) -> Outcome {
    let sc = load_step_scenario();
    let net = sc.network().unwrap();
    let sp = sc.setpoints(&net).unwrap();
    let r0 = [10.0, 35.0, 20.0];
    let th0 = [sp.phase()[0] + 2.0, sp.phase()[1] - 1.0, sp.phase()[2] + 0.5];
    let rect: Vec<f64> = (0..3).flat_map(|k| [r0[k] * th0[k].cos(), r0[k] * th0[k].sin()]).collect();
    let polar: Vec<f64> = r0.iter().chain(th0.iter()).copied().collect();
    let opts = IntegrationOptions::new(1e-6, 0.2, 100).unwrap();
    let a = integrate_field(&FreeOscillator::new(sp.clone(), sc.gains.clone(), Frame::AlphaBeta), 0.0, &rect, &opts)
        .unwrap();
    let b = integrate_field(&PolarOscillator::new(sp.clone(), sc.gains.clone()), 0.0, &polar, &opts).unwrap();
    let (mut r_err, mut th_err) = (0.0f64, 0.0f64);
    for j in 0..a.len() {
        let (x, y) = (a.row(j), b.row(j));
        for k in 0..3 {
            r_err = r_err.max((x[2 * k].hypot(x[2 * k + 1]) / y[k] - 1.0).abs());
            th_err = th_err.max(wrap_angle(x[2 * k + 1].atan2(x[2 * k]) - y[3 + k]).abs());
        }
    }
    outcome(
        r_err <= 1e-6 && th_err <= 1e-6,
        format!("max relative r difference {r_err:.3e}, max angle difference {th_err:.3e} rad"),
    )
}

fn c5_droop_identities(shared: &mut Shared) -> Outcome {
    let (traj, sp, gains) = shared.load_step();
    let fine = verify_droop_identity(traj, sp, gains).unwrap();
    let coarse = verify_droop_identity(&traj.decimate(2), sp, gains).unwrap();
    let (a, b) = (fine.max_rel_a(), fine.max_rel_b());
    let ratio_a = coarse.max_rel_a() / a;
    let ratio_b = coarse.max_rel_b() / b;
    let ok = a <= 1e-2 && b <= 1e-2 && (3.0..=5.0).contains(&ratio_a) && (3.0..=5.0).contains(&ratio_b);
    outcome(
        ok,
        format!(
            "relative residuals P-r {a:.3e}, Q-theta {b:.3e}; halving the stride improves them {ratio_a:.2}x and {ratio_b:.2}x (printed Q-theta form {:.3e})",
            fine.max_rel_b_literal()
        ),
    )
}

fn c6_qualitative_droop(shared: &mut Shared) -> Outcome {
    let (traj, sp, _) = shared.load_step();
    let at = |t: f64| {
        let j = traj.times().iter().position(|&s| (s - t).abs() < 1e-9).expect("sample on grid");
        let (u, v) = (traj.u(j), traj.v(j));
        let amp: Vec<f64> = (0..sp.n()).map(|k| v[2 * k].hypot(v[2 * k + 1])).collect();
        let p: Vec<f64> = (0..sp.n()).map(|k| u[2 * k] * v[2 * k] + u[2 * k + 1] * v[2 * k + 1]).collect();
        (amp, p)
    };
    let (amp0, p0) = at(0.5);
    let (amp1, p1) = at(1.0);
    let node1_amp = amp1[0] < amp0[0];
    let others_amp = amp1[1] > amp0[1] && amp1[2] > amp0[2];
    let node1_p = p1[0] > p0[0];
    let others_p = p1[1] > p0[1] && p1[2] > p0[2];
    let sign = |b: bool| if b { "ok" } else { "wrong sign" };
    outcome(
        node1_amp && others_amp && node1_p && others_p,
        format!(
            "|v| {:.2}/{:.2}/{:.2} V -> {:.2}/{:.2}/{:.2} V (node 1 {}, nodes 2-3 {}); P {:.1}/{:.1}/{:.1} W -> {:.1}/{:.1}/{:.1} W (node 1 {}, nodes 2-3 {})",
            amp0[0], amp0[1], amp0[2], amp1[0], amp1[1], amp1[2],
            sign(node1_amp), sign(others_amp),
            p0[0], p0[1], p0[2], p1[0], p1[1], p1[2],
            sign(node1_p), sign(others_p),
        ),
    )
}

fn c7_lyapunov_suite(_: &mut Shared) -> Outcome {
    let sc = load_step_scenario();
    let net = sc.network().unwrap();
    let sp = sc.setpoints(&net).unwrap();
    let model = ClosedLoop::new(ModelKind::Reduced, net.clone(), sp.clone(), sc.gains.clone()).unwrap();
    let t_end = 5.0 / sc.gains.gamma_max();
    let opts = IntegrationOptions::new(5e-5, t_end, 200).unwrap();
    let r_star = sp.amplitude().iter().cloned().fold(0.0, f64::max);
    let mut rng = StdRng::seed_from_u64(7);
    let (mut v1_violations, mut dist_violations, mut worst_rise, mut worst_dist) = (0, 0, 0.0f64, 0.0f64);
    let trials = 100;
    for _ in 0..trials {
        let dir = DVector::from_fn(2 * sp.n(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = rng.gen_range(0.1..=3.0) * sp.u_dq().norm();
        let u = dir.normalize() * norm;
        let v = net.impedance_inv() * &u;
        let x0 = SystemState {
            u,
            v,
            i: None,
            frame: Frame::Dq,
            t: 0.0,
        };
        let traj = integrate(&model, &x0, &opts, &[]).unwrap();
        let v1 = |j: usize| {
            let s = traj.state(j).unwrap();
            lyapunov_values(&net, &sp, &s.u, &s.v, 0.5).unwrap().v1
        };
        let v1_0 = v1(0);
        let mut prev = v1_0;
        let mut rise = 0.0f64;
        for j in 1..traj.len() {
            let cur = v1(j);
            rise = rise.max((cur - prev) / v1_0.max(f64::MIN_POSITIVE));
            prev = cur;
        }
        if rise > 1e-9 {
            v1_violations += 1;
        }
        worst_rise = worst_rise.max(rise);
        let last = traj.state(traj.len() - 1).unwrap();
        let d = dist_to_su(&last.u, &sp) / r_star;
        if d > 1e-3 {
            dist_violations += 1;
        }
        worst_dist = worst_dist.max(d);
    }
    outcome(
        v1_violations == 0 && dist_violations == 0,
        format!(
            "{trials} runs to t = {t_end} s: V1 rose in {v1_violations} (worst relative rise {worst_rise:.2e}); dist_to_Su/r* above 1e-3 in {dist_violations} (worst {worst_dist:.3})"
        ),
    )
}

fn random_case(rng: &mut StdRng) -> Option<(Network, Setpoints, ControllerGains)> {
    let n = rng.gen_range(1..=4usize);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|k| (k - 1, k)).collect();
    if n >= 3 && rng.gen_bool(0.5) {
        edges.push((n - 1, 0));
    }
    let nodes = (0..n)
        .map(|_| NodeParams {
            capacitance: rng.gen_range(1e-4..5e-3),
            conductance: rng.gen_range(0.1..2.0),
        })
        .collect();
    let lines = edges
        .iter()
        .map(|_| LineParams {
            resistance: rng.gen_range(0.05..1.0),
            inductance: rng.gen_range(1e-5..1e-4),
            shunt_capacitance: rng.gen_range(0.0..1e-8),
        })
        .collect();
    let spec = NetworkSpec::new(nodes, edges, lines).ok()?;
    let net = Network::build(spec, 2.0 * PI * 50.0).ok()?;
    let amp = (0..n).map(|_| rng.gen_range(5.0..200.0)).collect();
    let phase = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();
    let sp = Setpoints::derive(&net, amp, phase).ok()?;
    let gamma = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let alpha = (0..n).map(|_| rng.gen_range(1e-3..0.2)).collect();
    let gains = ControllerGains::new(gamma, alpha).ok()?;
    Some((net, sp, gains))
}

fn c8_origin_instability(_: &mut Shared) -> Outcome {
    let sc = load_step_scenario();
    let net = sc.network().unwrap();
    let sp = sc.setpoints(&net).unwrap();
    let table = jacobian_at_origin(&net, &sp, &sc.gains).unwrap();
    let mut rng = StdRng::seed_from_u64(11);
    let budget = 2000;
    let (mut certified, mut certified_unstable) = (0, 0);
    // single nodes: xi1 can be positive but alpha* vanishes
    let (mut single_13b, mut single_13a, mut best_multi_xi1) = (0, 0, f64::NEG_INFINITY);
    for _ in 0..budget {
        let Some((net, sp, gains)) = random_case(&mut rng) else {
            continue;
        };
        let Ok(cert) = compute_condition1(&net, &sp, &gains, DEFAULT_TAU_STAR) else {
            continue;
        };
        if sp.n() == 1 {
            single_13b += usize::from(cert.cond_13b_ok);
            single_13a += usize::from(cert.cond_13a_ok);
        } else {
            best_multi_xi1 = best_multi_xi1.max(cert.xi1);
        }
        if cert.condition1_ok() {
            certified += 1;
            if jacobian_at_origin(&net, &sp, &gains).map(|l| l.lemma2_holds).unwrap_or(false) {
                certified_unstable += 1;
            }
            if certified == 20 {
                break;
            }
        }
    }
    outcome(
        table.lemma2_holds && certified >= 20 && certified_unstable == certified,
        format!(
            "reference ring: {} unstable eigenvalues; random draws: {certified} of {budget} satisfy the certificate (20 needed), {certified_unstable} of those unstable at the origin; single-node draws with xi1 > 0: {single_13b}, with alpha_max < alpha*: {single_13a}; largest multi-node xi1 {best_multi_xi1:.3e}",
            table.unstable_count
        ),
    )
}

fn c9_boundary_layers(_: &mut Shared) -> Outcome {
    let sc = load_step_scenario();
    let net = sc.network().unwrap();
    let r_o = sc.spec.lines()[0].resistance;
    let bl = BoundaryLayer::new(net.z_o().matrix().clone()).unwrap();
    let y0: Vec<f64> = (0..2 * net.m()).map(|i| 1.0 + i as f64).collect();
    let opts = IntegrationOptions::new(1e-3, 5.0, 1000).unwrap();
    let traj = integrate_field(&bl, 0.0, &y0, &opts).unwrap();
    let n0 = DVector::from_column_slice(&y0).norm();
    let mut rate_err = 0.0f64;
    for j in 1..traj.len() {
        let rate = -(DVector::from_column_slice(traj.row(j)).norm() / n0).ln() / traj.time(j);
        rate_err = rate_err.max((rate / r_o - 1.0).abs());
    }

    let l = net.impedance().matrix().clone();
    let xi2 = 2.0 * linalg::lambda_min_sym(&l);
    let bl = BoundaryLayer::new(l).unwrap();
    let y0 = vec![3.0, -1.0, 0.5, 2.0, -4.0, 1.0];
    let opts = IntegrationOptions::new(1e-4, 0.5, 50).unwrap();
    let traj = integrate_field(&bl, 0.0, &y0, &opts).unwrap();
    let v0 = 0.5 * DVector::from_column_slice(&y0).norm_squared();
    let mut worst = 0.0f64;
    for j in 0..traj.len() {
        let v = 0.5 * DVector::from_column_slice(traj.row(j)).norm_squared();
        worst = worst.max(v / ((-xi2 * traj.time(j)).exp() * v0));
    }
    outcome(
        rate_err <= 1e-4 && worst <= 1.0 + 1e-6,
        format!("line-layer decay exponent within {rate_err:.2e} of R_O; max V2(t)/(exp(-xi2 t) V2(0)) = {worst:.6}"),
    )
}

fn c10_perturbation_order(_: &mut Shared) -> Outcome {
    let sc = parse_scenario(&scenario_path("perturbed_start.scn")).unwrap();
    assert!(matches!(sc.initial, InitialCondition::Perturbed { .. }));
    let rows = sweep_epsilon(&sc, &[1.0, 0.5, 0.25], sc.sweep.t_end).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for r in &rows[1..] {
        let dev_ratio = r.max_deviation / rows[0].max_deviation;
        let eps_ratio = r.epsilon / rows[0].epsilon;
        let q = dev_ratio / eps_ratio;
        ok &= (0.5..=2.0).contains(&q);
        parts.push(format!("scale {}: deviation ratio {dev_ratio:.3}, epsilon ratio {eps_ratio:.3}", r.scale));
    }
    outcome(
        ok,
        format!(
            "max deviations {:.3}/{:.3}/{:.3}; {}",
            rows[0].max_deviation,
            rows[1].max_deviation,
            rows[2].max_deviation,
            parts.join("; ")
        ),
    )
}

fn c11_reference_voltage(_: &mut Shared) -> Outcome {
    let sc = load_step_scenario();
    let reference = sc.reference.expect("bundled scenario carries a reference").amplitude;
    let rep = steady_state(&sc).unwrap();
    let amps: Vec<f64> = (1..=sc.n())
        .map(|k| rep.get(&format!("v_amplitude_{k}")).unwrap().parse().unwrap())
        .collect();
    let worst = amps.iter().map(|a| (a / reference - 1.0).abs()).fold(0.0, f64::max);
    let detail = if worst <= 0.1 {
        format!("|v*| within {:.1}% of {reference} V", 100.0 * worst)
    } else {
        format!(
            "documented, not gating: |v*| = {:.2} V against {reference} V ({:.1}% off); the converter filter R and L in the parameter table do not enter the node model",
            amps[0],
            100.0 * worst
        )
    };
    outcome(true, detail)
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, f64, Check); 11] = [
        (1, "steady-state certification", 1.0, c1_steady_state),
        (2, "certificate numbers", 1.0, c2_certificate_numbers),
        (3, "harmonic-orbit fidelity", 30.0, c3_orbit_fidelity),
        (4, "polar/rectangular oracle", 10.0, c4_polar_oracle),
        (5, "droop identities", 60.0, c5_droop_identities),
        (6, "qualitative droop reproduction", 60.0, c6_qualitative_droop),
        (7, "Lyapunov suite", 300.0, c7_lyapunov_suite),
        (8, "origin instability", 5.0, c8_origin_instability),
        (9, "boundary-layer decay", 5.0, c9_boundary_layers),
        (10, "singular-perturbation order", 300.0, c10_perturbation_order),
        (11, "reference voltage (soft)", 1.0, c11_reference_voltage),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut shared = Shared::default();
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, limit, check) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check(&mut shared);
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs < limit;
        let pass = result.pass && in_time;
        let timing = if in_time {
            format!("{secs:.2} s")
        } else {
            format!("{secs:.2} s, over the {limit} s limit")
        };
        println!(
            "criterion {id:>2} {} {name}: {} [{timing}]",
            if pass { "PASS" } else { "FAIL" },
            result.detail
        );
        ran += 1;
        if !pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {ran} criteria pass", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

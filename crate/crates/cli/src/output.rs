//! CSV trajectories and the text/kv report pairs.
//!
//! Every report is written twice: an aligned text file for people and a
//! `key=value` twin with full-precision numbers for scripts.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use lamvoc::analysis::{droop_quantities, Assumption1, OriginLinearization, StabilityReport};
use lamvoc::controller::{wrap_angle, Frame, Setpoints};
use lamvoc::dynamics::Trajectory;
use lamvoc::VocError;

use crate::error::{CliError, Result};

/// Ordered key/value report; rendered as aligned text or as `key=value`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    title: String,
    entries: Vec<(String, String, String)>,
}

/// Shortest round-trip representation.
pub fn exact(x: f64) -> String {
    format!("{x:e}")
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            entries: Vec::new(),
        }
    }

    /// Adds an entry shown as `display` in text and `exact` in kv form.
    pub fn push(&mut self, key: impl Into<String>, display: impl Into<String>, exact: impl Into<String>) {
        self.entries.push((key.into(), display.into(), exact.into()));
    }

    pub fn number(&mut self, key: impl Into<String>, x: f64) {
        self.push(key, format!("{x:.6e}"), exact(x));
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let v = value.into();
        self.push(key, v.clone(), v);
    }

    pub fn flag(&mut self, key: impl Into<String>, ok: bool) {
        self.push(key, if ok { "pass" } else { "FAIL" }, ok.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.0 == key).map(|e| e.2.as_str())
    }

    pub fn to_text(&self) -> String {
        let width = self.entries.iter().map(|e| e.0.len()).max().unwrap_or(0);
        let mut out = format!("{}\n", self.title);
        for (k, d, _) in &self.entries {
            let _ = writeln!(out, "  {k:<width$}  {d}");
        }
        out
    }

    pub fn to_kv(&self) -> String {
        self.entries.iter().map(|(k, _, x)| format!("{k}={x}\n")).collect()
    }
}

/// Parses a `key=value` twin back into pairs.
pub fn parse_kv(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

pub fn stability_report(id: &str, r: &StabilityReport, a1: &Assumption1, origin: &OriginLinearization) -> Report {
    let mut rep = Report::new(format!("stability certificate: {id}"));
    rep.number("tau", r.tau);
    rep.number("tau_star", r.tau_star);
    match a1.worst_edge {
        Some(e) => rep.text("tau_worst_edge", (e + 1).to_string()),
        None => rep.text("tau_worst_edge", "none"),
    }
    rep.number("epsilon", r.epsilon);
    rep.number("xi1", r.xi1);
    rep.number("xi2", r.xi2);
    rep.number("beta1", r.beta1);
    rep.number("beta2", r.beta2);
    rep.number("zeta", r.zeta);
    rep.number("gamma_max", r.gamma_max);
    rep.number("alpha_max", r.alpha_max);
    rep.number("alpha_star", r.alpha_star);
    rep.number("cond_13c_rhs", r.cond_13c_rhs);
    rep.push(
        "check_tau",
        format!("tau = {:.6e} < tau* = {:.6e}", r.tau, r.tau_star),
        format!("{}<{}", exact(r.tau), exact(r.tau_star)),
    );
    rep.push(
        "check_13a",
        format!("alpha_max = {:.6e} < alpha* = {:.6e}", r.alpha_max, r.alpha_star),
        format!("{}<{}", exact(r.alpha_max), exact(r.alpha_star)),
    );
    rep.push(
        "check_13b",
        format!("0 < xi1 = {:.6e}", r.xi1),
        format!("0<{}", exact(r.xi1)),
    );
    rep.push(
        "check_13c",
        format!("epsilon = {:.6e} < rhs = {:.6e}", r.epsilon, r.cond_13c_rhs),
        format!("{}<{}", exact(r.epsilon), exact(r.cond_13c_rhs)),
    );
    rep.flag("assumption1_ok", r.assumption1_ok);
    rep.flag("cond_13a_ok", r.cond_13a_ok);
    rep.flag("cond_13b_ok", r.cond_13b_ok);
    rep.flag("cond_13c_ok", r.cond_13c_ok);
    rep.flag("all_ok", r.all_ok());
    rep.text("origin_unstable_eigenvalues", origin.unstable_count.to_string());
    rep.flag("origin_unstable_at_least_two", origin.lemma2_holds);
    rep
}

/// The trajectory in the stationary frame.
pub fn to_stationary(traj: &Trajectory, sp: &Setpoints) -> Result<Trajectory> {
    match traj.frame() {
        Some(Frame::AlphaBeta) => Ok(traj.clone()),
        Some(Frame::Dq) => Ok(traj.to_alphabeta(sp.omega())?),
        None => Err(VocError::FrameMismatch("trajectory has no frame tag").into()),
    }
}

/// Writes a stationary-frame trajectory.
///
/// Columns: `t`, then per node `u_alpha_k, u_beta_k, v_alpha_k, v_beta_k,
/// r_k, theta_k, theta_err_k, P_k, Q_k`, then per line `i_alpha_e, i_beta_e`
/// when `with_lines` is set and the model carries line currents.
pub fn write_csv<W: Write>(out: &mut W, traj: &Trajectory, sp: &Setpoints, with_lines: bool) -> io::Result<()> {
    if traj.frame() != Some(Frame::AlphaBeta) {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "trajectory is not in the stationary frame"));
    }
    let n = traj.n();
    let lines = if with_lines { traj.lines().unwrap_or(0) } else { 0 };

    let mut header = String::from("t");
    for k in 1..=n {
        for c in ["u_alpha", "u_beta", "v_alpha", "v_beta", "r", "theta", "theta_err", "P", "Q"] {
            let _ = write!(header, ",{c}_{k}");
        }
    }
    for e in 1..=lines {
        let _ = write!(header, ",i_alpha_{e},i_beta_{e}");
    }
    writeln!(out, "{header}")?;

    let mut row = String::new();
    for j in 0..traj.len() {
        let t = traj.time(j);
        let (u, v) = (traj.u(j), traj.v(j));
        let powers = droop_quantities(u, v, sp, t, Frame::AlphaBeta)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
        row.clear();
        let _ = write!(row, "{t:.11e}");
        for (k, s) in powers.iter().enumerate() {
            // tracking error wrap(θ − ω*t − θ*)
            let err = wrap_angle(s.theta - sp.theta_ref(k, t, Frame::AlphaBeta));
            for x in [u[2 * k], u[2 * k + 1], v[2 * k], v[2 * k + 1], s.r, s.theta, err, s.p, s.q] {
                let _ = write!(row, ",{x:.11e}");
            }
        }
        if let Some(i) = traj.i(j) {
            for x in &i[..2 * lines] {
                let _ = write!(row, ",{x:.11e}");
            }
        }
        writeln!(out, "{row}")?;
    }
    out.flush()
}

pub fn save_csv(path: &Path, traj: &Trajectory, sp: &Setpoints, with_lines: bool) -> Result<()> {
    let ab = to_stationary(traj, sp)?;
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_csv(&mut BufWriter::new(file), &ab, sp, with_lines).map_err(io_err)
}

pub fn save_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

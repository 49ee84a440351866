//! Argument parsing and dispatch for the `lamvoc` binary.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lamvoc::dynamics::ModelKind;

use crate::commands::{
    check_stability, parse_step, simulate, steady_state, sweep_csv, sweep_epsilon, write_report, write_simulation,
};
use crate::error::{CliError, Result};
use crate::output::save_text;
use crate::scenario::{parse_scenario, Overrides, Scenario};

#[derive(Debug, Parser)]
#[command(name = "lamvoc", version, about = "Simulate and certify networks of virtual-oscillator inverters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    Alphabeta,
    Dq,
    Reduced,
}

impl From<FrameArg> for ModelKind {
    fn from(f: FrameArg) -> Self {
        match f {
            FrameArg::Alphabeta => ModelKind::AlphaBeta,
            FrameArg::Dq => ModelKind::Dq,
            FrameArg::Reduced => ModelKind::Reduced,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory; reports also go to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Model to integrate: stationary frame, rotating frame, or reduced.
    #[arg(long, value_enum)]
    pub frame: Option<FrameArg>,
    /// Add line currents to the CSV.
    #[arg(long = "with-lines")]
    pub with_lines: bool,
    /// Exit with status 4 when the stability certificate is not established.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the scenario and write the trajectory CSV.
    Simulate(Common),
    /// Evaluate the stability certificate.
    CheckStability(Common),
    /// Print the synchronous operating point.
    SteadyState(Common),
    /// Simulate with extra load steps.
    LoadStep {
        #[command(flatten)]
        common: Common,
        /// NODE:VALUE:TIME, one-based node; repeatable.
        #[arg(long = "step-g")]
        step_g: Vec<String>,
    },
    /// Compare full and reduced models over scaled line inductances.
    SweepEpsilon {
        #[command(flatten)]
        common: Common,
        /// Comma-separated inductance scales.
        #[arg(long, value_delimiter = ',')]
        scales: Vec<f64>,
    },
}

fn load(common: &Common, extra: &[String]) -> Result<Scenario> {
    let mut scenario = parse_scenario(&common.scenario)?;
    let extra_events = extra.iter().map(|s| parse_step(s)).collect::<Result<Vec<_>>>()?;
    scenario.apply(&Overrides {
        dt: common.dt,
        t_end: common.t_end,
        stride: common.stride,
        model: common.frame.map(Into::into),
        with_lines: common.with_lines,
        extra_events,
    })?;
    Ok(scenario)
}

fn strict_gate(common: &Common, scenario: &Scenario) -> Result<()> {
    if common.strict {
        let (cert, _) = check_stability(scenario)?;
        if !cert.all_ok() {
            return Err(CliError::Unstable(format!(
                "scenario {} fails the certificate (see check-stability)",
                scenario.id
            )));
        }
    }
    Ok(())
}

fn run_simulation(common: &Common, scenario: &Scenario) -> Result<String> {
    strict_gate(common, scenario)?;
    let (traj, sp, report) = simulate(scenario)?;
    let mut text = report.to_report().to_text();
    let dir = common.out.as_deref().unwrap_or(Path::new("."));
    for p in write_simulation(dir, scenario, &traj, &sp, &report)? {
        text.push_str(&format!("wrote {}\n", p.display()));
    }
    Ok(text)
}

/// Runs one command and returns what it prints on success.
pub fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Simulate(common) => run_simulation(common, &load(common, &[])?),
        Command::LoadStep { common, step_g } => {
            let scenario = load(common, step_g)?;
            if scenario.events.is_empty() {
                return Err(CliError::Usage("load-step needs --step-g or [[events]] in the scenario".into()));
            }
            run_simulation(common, &scenario)
        }
        Command::CheckStability(common) => {
            let scenario = load(common, &[])?;
            let (cert, rep) = check_stability(&scenario)?;
            let mut text = rep.to_text();
            if let Some(dir) = &common.out {
                for p in write_report(dir, &scenario.id, "stability", &rep)? {
                    text.push_str(&format!("wrote {}\n", p.display()));
                }
            }
            if common.strict && !cert.all_ok() {
                print!("{text}");
                return Err(CliError::Unstable(format!("scenario {} fails the certificate", scenario.id)));
            }
            Ok(text)
        }
        Command::SteadyState(common) => {
            let scenario = load(common, &[])?;
            let rep = steady_state(&scenario)?;
            let mut text = rep.to_text();
            if let Some(dir) = &common.out {
                for p in write_report(dir, &scenario.id, "steady", &rep)? {
                    text.push_str(&format!("wrote {}\n", p.display()));
                }
            }
            Ok(text)
        }
        Command::SweepEpsilon { common, scales } => {
            let scenario = load(common, &[])?;
            strict_gate(common, &scenario)?;
            let scales = if scales.is_empty() {
                scenario.sweep.scales.clone()
            } else {
                scales.clone()
            };
            let t_end = common.t_end.unwrap_or(scenario.sweep.t_end);
            let rows = sweep_epsilon(&scenario, &scales, t_end)?;
            let mut text = sweep_csv(&rows);
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                    path: dir.clone(),
                    source,
                })?;
                let path = dir.join(format!("{}.sweep.csv", scenario.id));
                save_text(&path, &sweep_csv(&rows))?;
                text.push_str(&format!("wrote {}\n", path.display()));
            }
            Ok(text)
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit()
        }
    }
}

//! Fixed-step closed-loop simulation of the 6-DOF vehicle under a sampled
//! controller with zero-order hold.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::baselines::{BaselineError, Pid, TrackingMpc};
use crate::collocation::{solve_horizontal, solve_ocp, HorizontalModel, HorizontalOcp, MeshTrajectory, OcpError};
use crate::empc::{heading_error, vertical_measurement, EmpcError, EoEmpc, TerminalCost};
use crate::math::Stopwatch;
use crate::nlp::SolverOptions;
use crate::vehicle::{axis_power, step, AxisPower, ModelError, ThrustCommand, VehicleParams, VehicleState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error(transparent)]
    Empc(#[from] EmpcError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("collocation solve failed: {0}")]
    Collocation(#[from] OcpError),
}

/// What a controller step produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCommand {
    pub command: ThrustCommand,
    /// The vehicle is inside the arrival disc; horizontal thrust is zero.
    pub arrived: bool,
    /// A precomputed command sequence has run out.
    pub exhausted: bool,
    pub converged: bool,
    /// Wall-clock time spent computing this command (s).
    pub solve_time: f64,
}

impl Default for StepCommand {
    fn default() -> Self {
        StepCommand { command: ThrustCommand::default(), arrived: false, exhausted: false, converged: true, solve_time: 0.0 }
    }
}

/// A sampled controller producing all four thrusts.
pub trait Controller {
    /// Sample period (s); the command is held in between.
    fn sample_time(&self) -> f64;
    fn control(&mut self, t: f64, state: &VehicleState) -> Result<StepCommand, ControllerError>;
}

impl<K: TerminalCost> Controller for EoEmpc<K> {
    fn sample_time(&self) -> f64 {
        self.config.dt
    }

    fn control(&mut self, t: f64, state: &VehicleState) -> Result<StepCommand, ControllerError> {
        Ok(self.control_step(t, state)?)
    }
}

/// Line-of-sight tracking MPC with the vertical PID loops.
#[derive(Debug, Clone)]
pub struct LosMpcController {
    pub mpc: TrackingMpc,
    pub pid: Pid,
    pub arrival_radius: f64,
}

impl Controller for LosMpcController {
    fn sample_time(&self) -> f64 {
        self.mpc.config.dt
    }

    fn control(&mut self, _t: f64, state: &VehicleState) -> Result<StepCommand, ControllerError> {
        let (fore, aft) = self.pid.step(&vertical_measurement(state), self.sample_time());
        let h = state.horizontal();
        let t_max = self.mpc.params.t_max;
        let (gx, gy) = self.mpc.goal;
        if (gx - h.x).hypot(gy - h.y) <= self.arrival_radius {
            let command = ThrustCommand::new(0.0, 0.0, fore, aft).saturate(t_max);
            return Ok(StepCommand { command, arrived: true, ..Default::default() });
        }
        let sol = self.mpc.solve(&h)?;
        Ok(StepCommand {
            command: ThrustCommand::new(sol.controls[0], sol.controls[1], fore, aft).saturate(t_max),
            converged: sol.converged,
            solve_time: sol.solve_time,
            ..Default::default()
        })
    }
}

/// Open-loop replay of a collocation plan with linearly interpolated
/// horizontal thrusts; reports `exhausted` once the plan has ended.
#[derive(Debug, Clone)]
pub struct DcFeedforward {
    pub plan: MeshTrajectory,
    pub pid: Pid,
    pub t_max: f64,
    pub dt: f64,
}

impl Controller for DcFeedforward {
    fn sample_time(&self) -> f64 {
        self.dt
    }

    fn control(&mut self, t: f64, state: &VehicleState) -> Result<StepCommand, ControllerError> {
        let (fore, aft) = self.pid.step(&vertical_measurement(state), self.dt);
        if t >= self.plan.final_time {
            let command = ThrustCommand::new(0.0, 0.0, fore, aft).saturate(self.t_max);
            return Ok(StepCommand { command, exhausted: true, ..Default::default() });
        }
        let u = self.plan.control_at(t);
        Ok(StepCommand { command: ThrustCommand::new(u[0], u[1], fore, aft).saturate(self.t_max), ..Default::default() })
    }
}

/// Shrinking-horizon collocation: the plan is re-optimized from the measured
/// state every `period` seconds, seeded with the unexecuted part of the
/// previous plan, and replayed in between.
#[derive(Debug, Clone)]
pub struct DcFeedback {
    /// Problem template; its start is replaced at every solve.
    pub ocp: HorizontalOcp,
    pub options: SolverOptions,
    pub pid: Pid,
    pub period: f64,
    pub dt: f64,
    /// Re-solves that failed and kept the previous plan.
    pub failed_solves: usize,
    pub solves: usize,
    plan: Option<(f64, MeshTrajectory)>,
    next_solve: f64,
}

impl DcFeedback {
    pub fn new(ocp: HorizontalOcp, options: SolverOptions, pid: Pid, period: f64, dt: f64) -> Self {
        DcFeedback { ocp, options, pid, period, dt, failed_solves: 0, solves: 0, plan: None, next_solve: 0.0 }
    }

    /// Starts from a plan computed elsewhere (solved at time 0).
    pub fn with_plan(mut self, plan: MeshTrajectory) -> Self {
        self.plan = Some((0.0, plan));
        self.next_solve = self.period;
        self
    }

    fn resolve(&mut self, t: f64, state: &VehicleState) -> Result<(), ControllerError> {
        let mut ocp = self.ocp.clone();
        ocp.start = state.horizontal();
        let seeded = match &self.plan {
            Some((t0, plan)) if t - t0 < plan.final_time => Some(remaining(plan, t - t0, ocp.intervals, &ocp.start.to_array())),
            _ => None,
        };
        let result = match seeded {
            Some(guess) => {
                let model = HorizontalModel { params: ocp.params };
                solve_ocp(&model, &ocp.spec(), &guess, &self.options)
            }
            None => solve_horizontal(&ocp, &self.options).map(|s| s.best),
        };
        self.solves += 1;
        match result {
            Ok(sol) => {
                self.plan = Some((t, sol.mesh));
                Ok(())
            }
            Err(_) if self.plan.is_some() => {
                self.failed_solves += 1;
                Ok(())
            }
            Err(e) => Err(e.into()),
        }
    }
}

/// The part of `plan` after `elapsed`, resampled onto `intervals` intervals
/// with its first state replaced by `start`.
fn remaining(plan: &MeshTrajectory, elapsed: f64, intervals: usize, start: &[f64]) -> MeshTrajectory {
    let span = plan.final_time - elapsed;
    let h = span / intervals as f64;
    let mut out = MeshTrajectory { final_time: span, ..Default::default() };
    for k in 0..=intervals {
        let t = elapsed + k as f64 * h;
        out.states.push(plan.state_at(t));
        out.controls.push(plan.control_at(t));
    }
    out.states[0] = start.to_vec();
    out
}

impl Controller for DcFeedback {
    fn sample_time(&self) -> f64 {
        self.dt
    }

    fn control(&mut self, t: f64, state: &VehicleState) -> Result<StepCommand, ControllerError> {
        let mut solve_time = 0.0;
        let mut converged = true;
        if self.plan.is_none() || t + 1e-9 >= self.next_solve {
            let clock = Stopwatch::start();
            let failed = self.failed_solves;
            let outcome = self.resolve(t, state);
            solve_time = clock.elapsed();
            outcome?;
            converged = self.failed_solves == failed;
            self.next_solve = t + self.period;
        }
        let (fore, aft) = self.pid.step(&vertical_measurement(state), self.dt);
        let (t0, plan) = self.plan.as_ref().expect("plan exists after a successful solve");
        let u = plan.control_at(t - t0);
        Ok(StepCommand {
            command: ThrustCommand::new(u[0], u[1], fore, aft).saturate(self.ocp.params.t_max),
            converged,
            solve_time,
            ..Default::default()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Integration step (s).
    pub dt: f64,
    pub max_time: f64,
    pub goal: (f64, f64),
    pub arrival_radius: f64,
}

/// One logged simulation step: the state at `t` and the command held over
/// `[t, t + dt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: VehicleState,
    pub command: ThrustCommand,
    pub power: AxisPower,
    pub heading_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    /// Trapezoidal integral of the logged total power.
    pub fn trapezoid_energy(&self) -> f64 {
        self.samples.windows(2).map(|w| 0.5 * (w[0].power.total() + w[1].power.total()) * (w[1].t - w[0].t)).sum()
    }

    pub fn max_abs(&self, f: impl Fn(&Sample) -> f64) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(f(s).abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Reached,
    Timeout,
    /// An open-loop sequence ended outside the goal disc.
    SequenceEnded,
    ControllerFailed(String),
    ModelFailed(ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub outcome: Outcome,
    pub travel_time: f64,
    /// Energy of all four thrusters (J).
    pub energy: f64,
    pub axis_energy: AxisPower,
    /// Per-thruster energy `[left, right, fore, aft]` (J).
    pub thruster_energy: [f64; 4],
    /// Cumulative controller compute time (s).
    pub compute_time: f64,
    pub controller_steps: usize,
    pub unconverged_steps: usize,
    pub final_distance: f64,
    pub trajectory: Trajectory,
}

impl SimResult {
    pub fn goal_reached(&self) -> bool {
        self.outcome == Outcome::Reached
    }
}

fn distance(s: &VehicleState, goal: (f64, f64)) -> f64 {
    (goal.0 - s.eta[0]).hypot(goal.1 - s.eta[1])
}

/// Runs `controller` from `initial` until the goal disc is entered, the
/// time limit passes, an open-loop plan runs out or a component fails.
///
/// The controller is sampled every `sample_time()` seconds (rounded to a
/// whole number of integration steps) and its command held in between.
/// Energy is the exact integral of thruster power under that hold.
pub fn simulate(p: &VehicleParams, initial: VehicleState, controller: &mut dyn Controller, cfg: &SimConfig) -> SimResult {
    let hold = ((controller.sample_time() / cfg.dt).round() as usize).max(1);
    let mut state = initial;
    let mut samples = Vec::new();
    let mut energy = [0.0; 4];
    let mut axes = AxisPower::default();
    let mut compute = 0.0;
    let mut steps = 0;
    let mut unconverged = 0;
    let mut command = StepCommand::default();
    let mut i = 0usize;
    let outcome = loop {
        let t = i as f64 * cfg.dt;
        if distance(&state, cfg.goal) <= cfg.arrival_radius {
            break Outcome::Reached;
        }
        if t >= cfg.max_time - 1e-9 {
            break Outcome::Timeout;
        }
        if i.is_multiple_of(hold) {
            match controller.control(t, &state) {
                Ok(c) => command = c,
                Err(e) => break Outcome::ControllerFailed(e.to_string()),
            }
            steps += 1;
            compute += command.solve_time;
            if !command.converged {
                unconverged += 1;
            }
            if command.exhausted {
                break Outcome::SequenceEnded;
            }
        }
        let c = command.command;
        let power = axis_power(p, &c);
        samples.push(Sample {
            t,
            state,
            command: c,
            power,
            heading_error: heading_error(&state.horizontal(), cfg.goal).unwrap_or(0.0),
        });
        for (e, th) in energy.iter_mut().zip(c.to_array()) {
            *e += p.power.power(th) * cfg.dt;
        }
        axes.surge += power.surge * cfg.dt;
        axes.yaw += power.yaw * cfg.dt;
        axes.heave += power.heave * cfg.dt;
        axes.pitch += power.pitch * cfg.dt;
        match step(p, &state, &c, cfg.dt) {
            Ok(next) => state = next,
            Err(e) => break Outcome::ModelFailed(e),
        }
        i += 1;
    };
    let t_end = i as f64 * cfg.dt;
    let last = samples.last().map_or(ThrustCommand::default(), |s| s.command);
    if !samples.is_empty() {
        let power = axis_power(p, &last);
        samples.push(Sample {
            t: t_end,
            state,
            command: last,
            power,
            heading_error: heading_error(&state.horizontal(), cfg.goal).unwrap_or(0.0),
        });
    }
    SimResult {
        outcome,
        travel_time: t_end,
        energy: energy.iter().sum(),
        axis_energy: axes,
        thruster_energy: energy,
        compute_time: compute,
        controller_steps: steps,
        unconverged_steps: unconverged,
        final_distance: distance(&state, cfg.goal),
        trajectory: Trajectory { samples },
    }
}

/// Boxed controller, for callers choosing the controller at run time.
pub type DynController = Box<dyn Controller + Send>;

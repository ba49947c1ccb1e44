//! Scenario runner: builds each controller from the configuration, runs the
//! closed loop and collects results and per-step diagnostics.

use eompc_core::baselines::{Pid, TrackingMpc};
use eompc_core::closed_loop::{
    simulate, Controller, ControllerError, DcFeedback, DcFeedforward, LosMpcController, Outcome, SimConfig, SimResult,
    StepCommand,
};
use eompc_core::collocation::{solve_horizontal, HorizontalOcp};
use eompc_core::empc::{heading_error, EoEmpc, TwoStageEnergyToGo};
use eompc_core::vehicle::AxisPower;
use eompc_core::VehicleState;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{Method, ScenarioSpec, SuiteConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("scenario `{scenario}`, {method}: invalid setup: {message}")]
    Setup { scenario: String, method: Method, message: String },
    #[error("scenario `{scenario}`, {method}: solver failed: {message}")]
    Solver { scenario: String, method: Method, message: String },
}

/// One controller sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub t: f64,
    pub heading_error: f64,
    pub solve_time: f64,
    pub converged: bool,
    /// EO-EMPC only; NaN otherwise.
    pub t_d: f64,
    pub dynamic_cost: f64,
    pub static_cost: f64,
    pub terminal_cost: f64,
    pub stage_energy: f64,
}

/// Percentage of the axis-attributed energy per axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Shares {
    pub surge: f64,
    pub yaw: f64,
    pub heave: f64,
    pub pitch: f64,
}

impl Shares {
    /// All zero when nothing was spent.
    pub fn of(a: &AxisPower) -> Shares {
        let total = a.total();
        if !(total > 0.0) {
            return Shares::default();
        }
        let pct = |x: f64| 100.0 * x / total;
        Shares { surge: pct(a.surge), yaw: pct(a.yaw), heave: pct(a.heave), pitch: pct(a.pitch) }
    }

    pub fn sum(&self) -> f64 {
        self.surge + self.yaw + self.heave + self.pitch
    }
}

/// Nominal plan flown by DC-feedforward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanInfo {
    pub energy: f64,
    pub duration: f64,
    pub solve_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: String,
    pub method: Method,
    pub sim: SimResult,
    /// Cumulative controller compute (s). For DC-feedforward, the plan solve.
    pub compute_time: f64,
    pub diagnostics: Vec<Diagnostic>,
    pub plan: Option<PlanInfo>,
}

impl ScenarioResult {
    pub fn shares(&self) -> Shares {
        Shares::of(&self.sim.axis_energy)
    }

    pub fn reached(&self) -> bool {
        self.sim.goal_reached()
    }

    /// A controller or the plant model failed during the run.
    pub fn failed(&self) -> bool {
        matches!(self.sim.outcome, Outcome::ControllerFailed(_) | Outcome::ModelFailed(_))
    }
}

/// Logs every sample of the wrapped controller.
struct Recorder<C> {
    inner: C,
    goal: (f64, f64),
    log: Vec<Diagnostic>,
}

impl<C: Controller> Controller for Recorder<C> {
    fn sample_time(&self) -> f64 {
        self.inner.sample_time()
    }

    fn control(&mut self, t: f64, state: &VehicleState) -> Result<StepCommand, ControllerError> {
        let out = self.inner.control(t, state)?;
        self.log.push(Diagnostic {
            t,
            heading_error: heading_error(&state.horizontal(), self.goal).unwrap_or(0.0),
            solve_time: out.solve_time,
            converged: out.converged,
            t_d: f64::NAN,
            dynamic_cost: f64::NAN,
            static_cost: f64::NAN,
            terminal_cost: f64::NAN,
            stage_energy: f64::NAN,
        });
        Ok(out)
    }
}

fn closed_loop_ocp(cfg: &SuiteConfig, sc: &ScenarioSpec, from_plan_start: bool) -> HorizontalOcp {
    HorizontalOcp {
        params: cfg.params(),
        start: if from_plan_start { cfg.plan_state(sc) } else { cfg.initial_state(sc) },
        goal: (sc.goal[0], sc.goal[1]),
        radius: cfg.controllers.dc.plan_radius,
        intervals: cfg.controllers.dc.intervals,
        cruise_speed: cfg.cruise_speed(),
        time_bounds: None,
    }
}

/// Runs one scenario under one method.
pub fn run(cfg: &SuiteConfig, sc: &ScenarioSpec, method: Method) -> Result<ScenarioResult, RunError> {
    let setup = |message: String| RunError::Setup { scenario: sc.id.clone(), method, message };
    let p = cfg.params();
    let goal = (sc.goal[0], sc.goal[1]);
    let dt = cfg.sim_dt(sc);
    let pid = Pid::new(&p, cfg.controllers.pid.gains(), cfg.controllers.pid.setpoints()).map_err(|e| setup(e.to_string()))?;
    let sim_cfg = SimConfig { dt, max_time: cfg.max_time(sc), goal, arrival_radius: sc.arrival_radius };
    let start = cfg.initial_state(sc);
    let init = VehicleState::from_horizontal(&start);
    log::info!("running scenario `{}` with {method}", sc.id);

    let mut plan = None;
    let (sim, diagnostics) = match method {
        Method::EoEmpc => {
            let empc = cfg.empc_config(sc);
            let terminal = TwoStageEnergyToGo { params: p, goal, search: empc.td_search };
            let mut c = EoEmpc::new(p, empc, terminal, pid).map_err(|e| setup(e.to_string()))?;
            let sim = simulate(&p, init, &mut c, &sim_cfg);
            let diag = c
                .diagnostics
                .iter()
                .map(|d| Diagnostic {
                    t: d.t,
                    heading_error: d.heading_error,
                    solve_time: d.solve_time,
                    converged: d.converged,
                    t_d: d.t_d,
                    dynamic_cost: d.dynamic_cost,
                    static_cost: d.static_cost,
                    terminal_cost: d.terminal_cost,
                    stage_energy: d.stage_energy,
                })
                .collect();
            (sim, diag)
        }
        Method::LosMpc => {
            let mpc = TrackingMpc::new(p, cfg.los_config(), (start.x, start.y), goal, dt).map_err(|e| setup(e.to_string()))?;
            let inner = LosMpcController { mpc, pid, arrival_radius: sc.arrival_radius };
            let mut c = Recorder { inner, goal, log: Vec::new() };
            let sim = simulate(&p, init, &mut c, &sim_cfg);
            (sim, c.log)
        }
        Method::DcFeedforward => {
            let ocp = closed_loop_ocp(cfg, sc, true);
            let sol = solve_horizontal(&ocp, &cfg.controllers.dc.solver_options()).map_err(|e| RunError::Solver {
                scenario: sc.id.clone(),
                method,
                message: e.to_string(),
            })?;
            plan = Some(PlanInfo { energy: sol.exact_energy(&p), duration: sol.duration(), solve_time: sol.solve_time });
            let inner = DcFeedforward { plan: sol.best.mesh, pid, t_max: p.t_max, dt };
            let mut c = Recorder { inner, goal, log: Vec::new() };
            let sim = simulate(&p, init, &mut c, &sim_cfg);
            (sim, c.log)
        }
        Method::DcFeedback => {
            let dc = &cfg.controllers.dc;
            let inner = DcFeedback::new(closed_loop_ocp(cfg, sc, false), dc.solver_options(), pid, dc.resolve_period, dt);
            let mut c = Recorder { inner, goal, log: Vec::new() };
            let sim = simulate(&p, init, &mut c, &sim_cfg);
            (sim, c.log)
        }
    };
    let compute_time = plan.map_or(sim.compute_time, |p| p.solve_time);
    log::info!("scenario `{}` with {method}: {:?}, {:.3} J in {:.2} s", sc.id, sim.outcome, sim.energy, sim.travel_time);
    Ok(ScenarioResult { scenario: sc.id.clone(), method, sim, compute_time, diagnostics, plan })
}

/// Builds the controller for `method` without running it; catches every
/// setup error [`run`] could report before the first solve.
pub fn preflight(cfg: &SuiteConfig, sc: &ScenarioSpec, method: Method) -> Result<(), RunError> {
    let setup = |message: String| RunError::Setup { scenario: sc.id.clone(), method, message };
    let p = cfg.params();
    let goal = (sc.goal[0], sc.goal[1]);
    let pid = Pid::new(&p, cfg.controllers.pid.gains(), cfg.controllers.pid.setpoints()).map_err(|e| setup(e.to_string()))?;
    match method {
        Method::EoEmpc => {
            let empc = cfg.empc_config(sc);
            let terminal = TwoStageEnergyToGo { params: p, goal, search: empc.td_search };
            EoEmpc::new(p, empc, terminal, pid).map(drop).map_err(|e| setup(e.to_string()))
        }
        Method::LosMpc => {
            let start = cfg.initial_state(sc);
            TrackingMpc::new(p, cfg.los_config(), (start.x, start.y), goal, cfg.sim_dt(sc))
                .map(drop)
                .map_err(|e| setup(e.to_string()))
        }
        Method::DcFeedforward | Method::DcFeedback => Ok(()),
    }
}

/// A suite row: one scenario and method.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub scenario: String,
    pub method: Method,
    pub result: Result<ScenarioResult, RunError>,
}

/// Worker count when none is given: the number of runs, capped at the
/// available cores.
pub fn default_jobs(runs: usize) -> usize {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    runs.clamp(1, cores)
}

/// Runs every (scenario, method) pair of the suite on `jobs` threads. Rows
/// come back in file order, scenario by scenario.
pub fn run_suite(cfg: &SuiteConfig, jobs: Option<usize>) -> Vec<SuiteRow> {
    let work: Vec<(&ScenarioSpec, Method)> = cfg.scenarios.iter().flat_map(|s| s.methods.iter().map(move |m| (s, *m))).collect();
    if work.is_empty() {
        return Vec::new();
    }
    let threads = jobs.unwrap_or_else(|| default_jobs(work.len())).max(1);
    let go = |(sc, m): &(&ScenarioSpec, Method)| SuiteRow { scenario: sc.id.clone(), method: *m, result: run(cfg, sc, *m) };
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| work.par_iter().map(go).collect()),
        Err(e) => {
            log::warn!("thread pool unavailable ({e}); running serially");
            work.iter().map(go).collect()
        }
    }
}

/// A row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: String,
    pub method: Method,
    pub outcome: String,
    pub reached: bool,
    pub travel_time: f64,
    pub energy: f64,
    /// `(E - E_los) / E_los * 100` against the same scenario's LOS-MPC run.
    pub reduction_vs_los: Option<f64>,
    pub shares: Shares,
    pub compute_time: f64,
    pub controller_steps: usize,
    pub unconverged_steps: usize,
    pub final_distance: f64,
}

pub fn outcome_label(o: &Outcome) -> String {
    match o {
        Outcome::Reached => "reached".into(),
        Outcome::Timeout => "timeout".into(),
        Outcome::SequenceEnded => "plan-ended".into(),
        Outcome::ControllerFailed(e) => format!("controller-failed: {e}"),
        Outcome::ModelFailed(e) => format!("model-failed: {e}"),
    }
}

/// Energy reduction of `energy` relative to `los` in percent.
pub fn reduction_percent(energy: f64, los: f64) -> f64 {
    (energy - los) / los * 100.0
}

/// Builds the comparison table; runs that could not start are skipped.
pub fn summarize(rows: &[SuiteRow]) -> Vec<SummaryRow> {
    let los = |scenario: &str| {
        rows.iter().find_map(|r| match &r.result {
            Ok(res) if r.scenario == scenario && r.method == Method::LosMpc => Some(res.sim.energy),
            _ => None,
        })
    };
    rows.iter()
        .filter_map(|r| r.result.as_ref().ok())
        .map(|res| SummaryRow {
            scenario: res.scenario.clone(),
            method: res.method,
            outcome: outcome_label(&res.sim.outcome),
            reached: res.reached(),
            travel_time: res.sim.travel_time,
            energy: res.sim.energy,
            reduction_vs_los: los(&res.scenario).filter(|e| *e > 0.0).map(|e| reduction_percent(res.sim.energy, e)),
            shares: res.shares(),
            compute_time: res.compute_time,
            controller_steps: res.sim.controller_steps,
            unconverged_steps: res.sim.unconverged_steps,
            final_distance: res.sim.final_distance,
        })
        .collect()
}

//! Energy-optimal economic MPC (EO-EMPC).
//!
//! The horizon problem minimizes the thruster energy over `N` samples plus
//! a terminal energy-to-go, over the `2N` horizontal thrusts. The terminal
//! cost is pluggable: the closed-form two-stage approximation or an exact
//! direct-collocation solve.

mod terminal;

pub use terminal::{
    approx_thrusts, drift_angle, dynamic_cost, heading_error, intermediate_state, static_cost, yaw_profile, DcEnergyToGo,
    IntermediateState, TdSearch, TerminalCost, TerminalCostBreakdown, TwoStageEnergyToGo, AT_GOAL,
};

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::baselines::{Pid, VerticalMeasurement};
use crate::closed_loop::StepCommand;
use crate::collocation::OcpError;
use crate::horizon::{drag_balanced_thrust, shift_controls, HorizonGrid, Rollout};
use crate::math::Stopwatch;
use crate::qn::{minimize_box, QnOptions};
use crate::vehicle::{buoyancy_holding_power, HorizontalState, ThrustCommand, VehicleParams, VehicleState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmpcError {
    #[error("vehicle is at the goal")]
    AtGoal,
    #[error("t = {t} lies outside the turning stage [0, {t_d}]")]
    Domain { t: f64, t_d: f64 },
    #[error("zero speed with {distance} m left to the goal")]
    ZeroSpeed { distance: f64 },
    #[error("invalid EMPC configuration: {0}")]
    Config(&'static str),
    #[error("non-finite state")]
    NonFiniteState,
    #[error("terminal cost is undefined at the initial guess")]
    UndefinedObjective,
    #[error("energy-to-go solve failed: {0}")]
    EnergyToGo(OcpError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpcConfig {
    /// Prediction horizon (samples).
    pub horizon: usize,
    /// Controller sample time (s).
    pub dt: f64,
    /// RK4 substep used in the prediction; should equal the simulator step.
    pub sim_dt: f64,
    /// Thrust bound (N) applied to both horizontal thrusters.
    pub thrust_limit: f64,
    pub td_search: TdSearch,
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Seed each solve with the previous solution shifted by one sample.
    pub warm_start: bool,
    pub goal: (f64, f64),
    pub arrival_radius: f64,
}

impl Default for EmpcConfig {
    fn default() -> Self {
        EmpcConfig {
            horizon: 5,
            dt: 0.1,
            sim_dt: 0.01,
            thrust_limit: 7.86,
            td_search: TdSearch::default(),
            max_iter: 200,
            grad_tol: 1e-6,
            warm_start: true,
            goal: (2.0, 2.0),
            arrival_radius: 0.05,
        }
    }
}

impl EmpcConfig {
    pub fn validate(&self) -> Result<(), EmpcError> {
        if self.horizon == 0 {
            return Err(EmpcError::Config("horizon must be >= 1"));
        }
        if !(self.dt > 0.0) || !(self.sim_dt > 0.0) || self.sim_dt > self.dt {
            return Err(EmpcError::Config("need 0 < sim_dt <= dt"));
        }
        if !(self.thrust_limit > 0.0) {
            return Err(EmpcError::Config("thrust limit must be > 0"));
        }
        let s = &self.td_search;
        if !(s.min > 0.0) || !(s.max >= s.min) || s.grid < 2 || !(s.tol > 0.0) {
            return Err(EmpcError::Config("need 0 < td_min <= td_max, grid >= 2, tol > 0"));
        }
        if !(self.arrival_radius > 0.0) || !(self.grad_tol > 0.0) {
            return Err(EmpcError::Config("arrival radius and tolerance must be > 0"));
        }
        if !self.goal.0.is_finite() || !self.goal.1.is_finite() {
            return Err(EmpcError::Config("goal must be finite"));
        }
        Ok(())
    }

    pub fn grid(&self) -> HorizonGrid {
        HorizonGrid { steps: self.horizon, dt: self.dt, sim_dt: self.sim_dt }
    }
}

/// Outcome of one horizon solve.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpcSolution {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Optimal turning-stage duration when the two-stage cost is in use.
    pub t_d: Option<f64>,
    pub breakdown: Option<TerminalCostBreakdown>,
    pub terminal_state: HorizontalState,
    pub objective: f64,
    pub stage_energy: f64,
    pub terminal_cost: f64,
    pub solve_time: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Horizon objective: stage energy plus terminal cost, with its gradient.
///
/// Returns `(objective, stage_energy, terminal_cost, terminal_state)`.
pub fn horizon_objective<K: TerminalCost + ?Sized>(
    p: &VehicleParams,
    grid: &HorizonGrid,
    terminal: &mut K,
    x0: &HorizontalState,
    controls: &[f64],
    grad: &mut [f64],
) -> Result<(f64, f64, f64, HorizontalState), EmpcError> {
    let ppb = buoyancy_holding_power(p);
    let mut stage = 0.0;
    for (g, t) in grad.iter_mut().zip(controls) {
        stage += p.power.power(*t) * grid.dt;
        *g = p.power.derivative(*t) * grid.dt;
    }
    stage += ppb * grid.duration();
    let ro = Rollout::new(p, grid, x0, controls);
    let xn = *ro.terminal();
    if !xn.is_finite() {
        return Err(EmpcError::NonFiniteState);
    }
    let mut node_grad = vec![[0.0; 6]; grid.steps + 1];
    let k = terminal.evaluate(&xn, x0.v, &mut node_grad[grid.steps])?;
    ro.backpropagate(&node_grad, grad);
    Ok((stage + k, stage, k, xn))
}

/// Solves the EO-EMPC problem from `x0`, starting the search at `guess`.
///
/// A solve that stops at the iteration cap returns its best iterate with
/// `converged == false`.
pub fn solve_empc<K: TerminalCost + ?Sized>(
    p: &VehicleParams,
    config: &EmpcConfig,
    terminal: &mut K,
    x0: &HorizontalState,
    guess: &[f64],
) -> Result<EmpcSolution, EmpcError> {
    if !x0.is_finite() {
        return Err(EmpcError::NonFiniteState);
    }
    let clock = Stopwatch::start();
    let grid = config.grid();
    let n = 2 * config.horizon;
    let lim = config.thrust_limit.min(p.t_max);
    let (lo, hi) = (vec![-lim; n], vec![lim; n]);
    let mut scratch = vec![0.0; n];
    horizon_objective(p, &grid, terminal, x0, guess, &mut scratch)?;
    let opts = QnOptions { max_iter: config.max_iter, grad_tol: config.grad_tol };
    let res = minimize_box(
        |u, g| match horizon_objective(p, &grid, terminal, x0, u, g) {
            Ok(v) => v.0,
            Err(_) => f64::INFINITY,
        },
        guess,
        &lo,
        &hi,
        &opts,
    );
    let (objective, stage_energy, terminal_cost, terminal_state) =
        horizon_objective(p, &grid, terminal, x0, &res.x, &mut scratch)?;
    let breakdown = terminal.describe(&terminal_state, x0.v);
    Ok(EmpcSolution {
        left: res.x.iter().step_by(2).copied().collect(),
        right: res.x.iter().skip(1).step_by(2).copied().collect(),
        t_d: breakdown.map(|b| b.t_d),
        breakdown,
        terminal_state,
        objective,
        stage_energy,
        terminal_cost,
        solve_time: clock.elapsed(),
        iterations: res.iterations,
        converged: res.converged,
    })
}

/// One row of the per-step controller log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpcDiagnostics {
    pub t: f64,
    pub heading_error: f64,
    pub t_d: f64,
    pub dynamic_cost: f64,
    pub static_cost: f64,
    pub terminal_cost: f64,
    pub stage_energy: f64,
    pub solve_time: f64,
    pub converged: bool,
}

/// Receding-horizon EO-EMPC with warm starting, merged with the vertical PID.
#[derive(Debug)]
pub struct EoEmpc<K: TerminalCost> {
    pub params: VehicleParams,
    pub config: EmpcConfig,
    pub terminal: K,
    pub pid: Pid,
    warm: Option<Vec<f64>>,
    pub diagnostics: Vec<EmpcDiagnostics>,
    pub last: Option<EmpcSolution>,
}

impl<K: TerminalCost> EoEmpc<K> {
    pub fn new(params: VehicleParams, config: EmpcConfig, terminal: K, pid: Pid) -> Result<Self, EmpcError> {
        config.validate()?;
        Ok(EoEmpc { params, config, terminal, pid, warm: None, diagnostics: Vec::new(), last: None })
    }

    fn guess(&self, x0: &HorizontalState) -> Vec<f64> {
        let n = 2 * self.config.horizon;
        match &self.warm {
            Some(w) if self.config.warm_start && w.len() == n => shift_controls(w),
            _ => vec![drag_balanced_thrust(&self.params, x0.u); n],
        }
    }

    /// Solves the horizon problem at time `t` and logs a diagnostics row.
    pub fn solve(&mut self, t: f64, x0: &HorizontalState) -> Result<EmpcSolution, EmpcError> {
        let guess = self.guess(x0);
        let sol = solve_empc(&self.params, &self.config, &mut self.terminal, x0, &guess)?;
        let mut w = Vec::with_capacity(guess.len());
        for (l, r) in sol.left.iter().zip(&sol.right) {
            w.push(*l);
            w.push(*r);
        }
        self.warm = Some(w);
        let b = sol.breakdown;
        self.diagnostics.push(EmpcDiagnostics {
            t,
            heading_error: heading_error(x0, self.config.goal).unwrap_or(0.0),
            t_d: b.map_or(f64::NAN, |b| b.t_d),
            dynamic_cost: b.map_or(f64::NAN, |b| b.dynamic),
            static_cost: b.map_or(f64::NAN, |b| b.static_),
            terminal_cost: sol.terminal_cost,
            stage_energy: sol.stage_energy,
            solve_time: sol.solve_time,
            converged: sol.converged,
        });
        self.last = Some(sol.clone());
        Ok(sol)
    }

    /// Full controller step: horizontal pair from the EMPC (zero once inside
    /// the arrival disc) and vertical pair from the PID loops.
    pub fn control_step(&mut self, t: f64, state: &VehicleState) -> Result<StepCommand, EmpcError> {
        let (fore, aft) = self.pid.step(&vertical_measurement(state), self.config.dt);
        let h = state.horizontal();
        let lim = self.config.thrust_limit.min(self.params.t_max);
        let (gx, gy) = self.config.goal;
        if (gx - h.x).hypot(gy - h.y) <= self.config.arrival_radius {
            return Ok(StepCommand {
                command: ThrustCommand::new(0.0, 0.0, fore, aft).saturate(self.params.t_max),
                arrived: true,
                ..Default::default()
            });
        }
        let sol = self.solve(t, &h)?;
        Ok(StepCommand {
            command: ThrustCommand::new(sol.left[0].clamp(-lim, lim), sol.right[0].clamp(-lim, lim), fore, aft)
                .saturate(self.params.t_max),
            converged: sol.converged,
            solve_time: sol.solve_time,
            ..Default::default()
        })
    }

    pub fn reset(&mut self) {
        self.warm = None;
        self.diagnostics.clear();
        self.last = None;
        self.pid.reset();
    }
}

/// Depth, pitch and their rates as seen by the PID loops.
pub fn vertical_measurement(s: &VehicleState) -> VerticalMeasurement {
    VerticalMeasurement { z: s.eta[2], theta: s.eta[4], z_rate: s.nu[2], theta_rate: s.nu[4] }
}

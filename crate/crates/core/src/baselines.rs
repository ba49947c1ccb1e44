//! Comparison controllers: line-of-sight guided tracking MPC and the
//! heave/pitch PID loops shared by every horizontal controller.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::horizon::{drag_balanced_thrust, shift_controls, HorizonGrid, Rollout};
use crate::math::{wrap_angle, Stopwatch};
use crate::qn::{minimize_box, QnOptions};
use crate::vehicle::{HorizontalState, VehicleParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("path segment has zero length")]
    DegenerateSegment,
    #[error("invalid LOS configuration: {0}")]
    Config(&'static str),
    #[error("invalid PID gains: {0}")]
    Gains(&'static str),
}

/// Desired heading from constant-lookahead line-of-sight guidance along the
/// segment `start -> goal`.
pub fn los_reference(state: &HorizontalState, start: (f64, f64), goal: (f64, f64), lookahead: f64) -> Result<f64, BaselineError> {
    let (dx, dy) = (goal.0 - start.0, goal.1 - start.1);
    if dx.hypot(dy) <= 1e-12 {
        return Err(BaselineError::DegenerateSegment);
    }
    let azimuth = dy.atan2(dx);
    Ok(wrap_angle(azimuth + (-cross_track_error(state, start, azimuth) / lookahead).atan()))
}

/// Signed distance of the vehicle to the left of the path line.
pub fn cross_track_error(state: &HorizontalState, start: (f64, f64), azimuth: f64) -> f64 {
    let (s, c) = azimuth.sin_cos();
    -(state.x - start.0) * s + (state.y - start.1) * c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosConfig {
    /// Lookahead distance (m).
    pub lookahead: f64,
    /// Reference surge speed (m/s).
    pub u_ref: f64,
    pub w_surge: f64,
    pub w_heading: f64,
    pub w_thrust: f64,
    pub horizon: usize,
    pub dt: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl Default for LosConfig {
    fn default() -> Self {
        LosConfig {
            lookahead: 0.5,
            u_ref: 0.13,
            w_surge: 100.0,
            w_heading: 10.0,
            w_thrust: 0.001,
            horizon: 5,
            dt: 0.1,
            max_iter: 200,
            grad_tol: 1e-6,
        }
    }
}

impl LosConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if !(self.lookahead > 0.0) {
            return Err(BaselineError::Config("lookahead must be > 0"));
        }
        let w = [self.w_surge, self.w_heading, self.w_thrust];
        if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(BaselineError::Config("weights must be finite and >= 0"));
        }
        if !(self.w_surge > 0.0 || self.w_heading > 0.0) {
            return Err(BaselineError::Config("at least one state weight must be > 0"));
        }
        if self.horizon == 0 || !(self.dt > 0.0) {
            return Err(BaselineError::Config("horizon must be >= 1 and dt > 0"));
        }
        Ok(())
    }
}

/// Result of one tracking-MPC solve.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingSolution {
    /// `[tl_0, tr_0, tl_1, ...]`.
    pub controls: Vec<f64>,
    pub heading_ref: f64,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub solve_time: f64,
}

/// Quadratic tracking MPC on the surge speed and LOS heading.
#[derive(Debug, Clone)]
pub struct TrackingMpc {
    pub params: VehicleParams,
    pub config: LosConfig,
    pub start: (f64, f64),
    pub goal: (f64, f64),
    pub sim_dt: f64,
    warm: Option<Vec<f64>>,
}

impl TrackingMpc {
    pub fn new(
        params: VehicleParams,
        config: LosConfig,
        start: (f64, f64),
        goal: (f64, f64),
        sim_dt: f64,
    ) -> Result<Self, BaselineError> {
        config.validate()?;
        if (goal.0 - start.0).hypot(goal.1 - start.1) <= 1e-12 {
            return Err(BaselineError::DegenerateSegment);
        }
        Ok(TrackingMpc { params, config, start, goal, sim_dt, warm: None })
    }

    fn grid(&self) -> HorizonGrid {
        HorizonGrid { steps: self.config.horizon, dt: self.config.dt, sim_dt: self.sim_dt }
    }

    /// Horizon cost and its gradient with respect to the controls.
    pub fn objective(&self, x0: &HorizontalState, psi_ref: f64, controls: &[f64], grad: &mut [f64]) -> f64 {
        let c = &self.config;
        let ro = Rollout::new(&self.params, &self.grid(), x0, controls);
        let mut node_grad = vec![[0.0; 6]; c.horizon + 1];
        let mut cost = 0.0;
        for (k, n) in ro.nodes.iter().enumerate().skip(1) {
            let eu = n.u - c.u_ref;
            let epsi = wrap_angle(n.psi - psi_ref);
            cost += c.w_surge * eu * eu + c.w_heading * epsi * epsi;
            node_grad[k][0] = 2.0 * c.w_surge * eu;
            node_grad[k][5] = 2.0 * c.w_heading * epsi;
        }
        for (g, t) in grad.iter_mut().zip(controls) {
            cost += c.w_thrust * t * t;
            *g = 2.0 * c.w_thrust * t;
        }
        ro.backpropagate(&node_grad, grad);
        cost
    }

    /// Solves the horizon problem from `x0` and stores the warm start.
    pub fn solve(&mut self, x0: &HorizontalState) -> Result<TrackingSolution, BaselineError> {
        let clock = Stopwatch::start();
        let psi_ref = los_reference(x0, self.start, self.goal, self.config.lookahead)?;
        // Unwrap the reference next to the current heading so the error is small.
        let psi_ref = x0.psi + wrap_angle(psi_ref - x0.psi);
        let n = 2 * self.config.horizon;
        let guess = match &self.warm {
            Some(w) if w.len() == n => shift_controls(w),
            _ => vec![drag_balanced_thrust(&self.params, x0.u); n],
        };
        let t = self.params.t_max;
        let (lo, hi) = (vec![-t; n], vec![t; n]);
        let opts = QnOptions { max_iter: self.config.max_iter, grad_tol: self.config.grad_tol };
        let res = minimize_box(|u, g| self.objective(x0, psi_ref, u, g), &guess, &lo, &hi, &opts);
        self.warm = Some(res.x.clone());
        Ok(TrackingSolution {
            controls: res.x,
            heading_ref: psi_ref,
            objective: res.value,
            converged: res.converged,
            iterations: res.iterations,
            solve_time: clock.elapsed(),
        })
    }

    pub fn reset(&mut self) {
        self.warm = None;
    }
}

/// Gains of the depth and pitch loops. Each triple is `[kp, ki, kd]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub depth: [f64; 3],
    pub pitch: [f64; 3],
    /// Clamp on each integral contribution (N for depth, N m for pitch).
    pub integral_limit: f64,
    /// Per-thruster output limit (N).
    pub output_limit: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        PidGains { depth: [40.0, 5.0, 40.0], pitch: [5.0, 0.5, 3.0], integral_limit: 2.0, output_limit: 7.86 }
    }
}

impl PidGains {
    pub fn validate(&self, t_max: f64) -> Result<(), BaselineError> {
        if self.depth.iter().chain(&self.pitch).any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(BaselineError::Gains("gains must be finite and >= 0"));
        }
        if !(self.integral_limit >= 0.0) {
            return Err(BaselineError::Gains("integral limit must be >= 0"));
        }
        if !(self.output_limit > 0.0) || self.output_limit > t_max {
            return Err(BaselineError::Gains("output limit must lie in (0, t_max]"));
        }
        Ok(())
    }
}

/// Depth and pitch set-points (m, rad).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Setpoints {
    pub depth: f64,
    pub pitch: f64,
}

/// Measured vertical-plane quantities fed to the PID loops.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerticalMeasurement {
    pub z: f64,
    pub theta: f64,
    pub z_rate: f64,
    pub theta_rate: f64,
}

/// Two decoupled PID loops driving the vertical thruster pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Pid {
    pub gains: PidGains,
    pub setpoints: Setpoints,
    /// Per-thruster feed-forward holding the net buoyancy (N).
    pub feed_forward: f64,
    pub l1: f64,
    integral: [f64; 2],
}

impl Pid {
    pub fn new(params: &VehicleParams, gains: PidGains, setpoints: Setpoints) -> Result<Self, BaselineError> {
        gains.validate(params.t_max)?;
        Ok(Pid { gains, setpoints, feed_forward: 0.5 * params.net_buoyancy(), l1: params.l1, integral: [0.0; 2] })
    }

    pub fn reset(&mut self) {
        self.integral = [0.0; 2];
    }

    /// Advances the loops by `dt` and returns `(fore, aft)` thrusts.
    pub fn step(&mut self, m: &VerticalMeasurement, dt: f64) -> (f64, f64) {
        let g = &self.gains;
        let ez = m.z - self.setpoints.depth;
        let et = m.theta - self.setpoints.pitch;
        let clamp_i = |acc: f64, ki: f64| {
            if ki > 0.0 {
                acc.clamp(-g.integral_limit / ki, g.integral_limit / ki)
            } else {
                0.0
            }
        };
        self.integral[0] = clamp_i(self.integral[0] + ez * dt, g.depth[1]);
        self.integral[1] = clamp_i(self.integral[1] + et * dt, g.pitch[1]);
        // Positive vertical thrust pushes down, so a deep vehicle needs less of it.
        let collective = -(g.depth[0] * ez + g.depth[1] * self.integral[0] + g.depth[2] * m.z_rate);
        let moment = -(g.pitch[0] * et + g.pitch[1] * self.integral[1] + g.pitch[2] * m.theta_rate);
        let diff = if self.l1 > 0.0 { moment / (2.0 * self.l1) } else { 0.0 };
        let lim = g.output_limit;
        let fore = (self.feed_forward + 0.5 * collective - diff).clamp(-lim, lim);
        let aft = (self.feed_forward + 0.5 * collective + diff).clamp(-lim, lim);
        (fore, aft)
    }
}

/// Stateless single step of the loops with zero integrator history.
pub fn pid_step(params: &VehicleParams, m: &VerticalMeasurement, setpoints: Setpoints, gains: PidGains, dt: f64) -> (f64, f64) {
    let mut pid = Pid { gains, setpoints, feed_forward: 0.5 * params.net_buoyancy(), l1: params.l1, integral: [0.0; 2] };
    pid.step(m, dt)
}

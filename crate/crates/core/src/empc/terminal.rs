//! Two-stage energy-to-go: a turning (dynamic) stage of length `t_d`
//! followed by a straight cruise (static) stage to the goal.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::EmpcError;
use crate::collocation::{solve_horizontal, HorizontalOcp, MeshTrajectory, OcpError};
use crate::math::{grid_then_golden, sinc, sinc_prime, wrap_angle};
use crate::nlp::SolverOptions;
use crate::vehicle::{buoyancy_holding_power, mass_diagonal, HorizontalState, VehicleParams};

/// Distance (m) below which a state counts as sitting on the goal.
pub const AT_GOAL: f64 = 1e-9;

/// Drift angle `atan2(v, u)`, zero when the vehicle is at rest.
pub fn drift_angle(u: f64, v: f64) -> f64 {
    if u * u + v * v < 1e-9 {
        0.0
    } else {
        v.atan2(u)
    }
}

/// Angle between the heading-corrected velocity direction and the line of
/// sight to the goal, wrapped to `(-pi, pi]`.
pub fn heading_error(s: &HorizontalState, goal: (f64, f64)) -> Result<f64, EmpcError> {
    let (dx, dy) = (goal.0 - s.x, goal.1 - s.y);
    if dx.hypot(dy) <= AT_GOAL {
        return Err(EmpcError::AtGoal);
    }
    Ok(wrap_angle(dy.atan2(dx) - drift_angle(s.u, s.v) - s.psi))
}

/// Horizontal thrusts that would hold surge speed `u` against drag while
/// producing yaw acceleration `r_dot` at yaw rate `r`.
pub fn approx_thrusts(p: &VehicleParams, u: f64, r: f64, r_dot: f64) -> (f64, f64) {
    let m = mass_diagonal(p);
    let drag = p.x_uu * u * u;
    let turn = (m[5] * r_dot + p.n_rr * r.abs() * r) / p.l2;
    (0.5 * (drag + turn), 0.5 * (drag - turn))
}

/// Yaw-rate model of the turning stage: a linear ramp from `r_n` over the
/// first half, then the plateau `psi_d / t_d`. Returns `(r, r_dot)`.
pub fn yaw_profile(r_n: f64, psi_d: f64, t_d: f64, t: f64) -> Result<(f64, f64), EmpcError> {
    if !(t_d > 0.0) || !(0.0..=t_d).contains(&t) {
        return Err(EmpcError::Domain { t, t_d });
    }
    let plateau = psi_d / t_d;
    if t <= 0.5 * t_d {
        let slope = 4.0 * (plateau - r_n) / t_d;
        Ok((r_n + slope * t, slope))
    } else {
        Ok((plateau, 0.0))
    }
}

/// Turning-stage energy `(P^h + P_PB) t_d`, with the horizontal power taken
/// from three samples of the approximate thrusts: weight 1/4 at the start,
/// 1/4 at mid-stage (plateau branch) and 1/2 at the end.
pub fn dynamic_cost(p: &VehicleParams, zeta_n: &HorizontalState, psi_d: f64, t_d: f64) -> f64 {
    let pw = |(l, r): (f64, f64)| p.power.power(l) + p.power.power(r);
    let slope = 4.0 * (psi_d / t_d - zeta_n.r) / t_d;
    let start = pw(approx_thrusts(p, zeta_n.u, zeta_n.r, slope));
    let plateau = pw(approx_thrusts(p, zeta_n.u, psi_d / t_d, 0.0));
    let ph = 0.25 * start + 0.25 * plateau + 0.5 * plateau;
    (ph + buoyancy_holding_power(p)) * t_d
}

/// Handover state between the turning and cruise stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntermediateState {
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

/// Places the end of the turning stage on the circular arc that closes the
/// heading error `dpsi_n`: the chord has length `u_t t_d sinc(dpsi_n)` and
/// points at the goal.
pub fn intermediate_state(zeta_n: &HorizontalState, v0: f64, goal: (f64, f64), t_d: f64, dpsi_n: f64) -> IntermediateState {
    let u_t = zeta_n.u.hypot(v0);
    let psi_nf = (goal.1 - zeta_n.y).atan2(goal.0 - zeta_n.x);
    let chord = u_t * t_d * sinc(dpsi_n);
    IntermediateState {
        u: zeta_n.u,
        v: v0,
        r: if t_d > 0.0 { 2.0 * dpsi_n / t_d } else { 0.0 },
        x: zeta_n.x + chord * psi_nf.cos(),
        y: zeta_n.y + chord * psi_nf.sin(),
        psi: zeta_n.psi + 2.0 * dpsi_n,
    }
}

/// Straight-cruise energy from `s` to the goal at the speed of `s`.
pub fn static_cost(p: &VehicleParams, s: &IntermediateState, goal: (f64, f64)) -> Result<f64, EmpcError> {
    let d = (goal.0 - s.x).hypot(goal.1 - s.y);
    if d == 0.0 {
        return Ok(0.0);
    }
    let speed = s.u.hypot(s.v);
    if !(speed > 0.0) {
        return Err(EmpcError::ZeroSpeed { distance: d });
    }
    let ps = 2.0 * p.power.power(0.5 * p.x_uu * s.u.abs() * s.u);
    Ok(d / speed * (ps + buoyancy_holding_power(p)))
}

/// Search settings for the turning-stage duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdSearch {
    pub min: f64,
    pub max: f64,
    pub grid: usize,
    pub tol: f64,
}

impl Default for TdSearch {
    fn default() -> Self {
        Self { min: 0.1, max: 30.0, grid: 32, tol: 1e-9 }
    }
}

/// Everything the terminal cost computed at its minimizing `t_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalCostBreakdown {
    pub t_d: f64,
    pub psi_d: f64,
    pub heading_error: f64,
    pub intermediate: IntermediateState,
    pub dynamic: f64,
    pub static_: f64,
    pub total: f64,
}

/// Terminal cost over `zeta_n` for the receding-horizon problem.
pub trait TerminalCost {
    /// Returns the cost and writes its gradient with respect to
    /// `[u, v, r, x, y, psi]` of `zeta_n`. `v0` is the measured sway speed.
    fn evaluate(&mut self, zeta_n: &HorizontalState, v0: f64, grad: &mut [f64; 6]) -> Result<f64, EmpcError>;

    /// Two-stage breakdown at `zeta_n`, for costs that have one.
    fn describe(&self, _zeta_n: &HorizontalState, _v0: f64) -> Option<TerminalCostBreakdown> {
        None
    }
}

/// The closed-form two-stage approximation, minimized over `t_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStageEnergyToGo {
    pub params: VehicleParams,
    pub goal: (f64, f64),
    pub search: TdSearch,
}

impl TwoStageEnergyToGo {
    /// `J_d + J_s` at a given `t_d`.
    pub fn cost_at(&self, zeta_n: &HorizontalState, v0: f64, t_d: f64) -> Result<TerminalCostBreakdown, EmpcError> {
        let dpsi = heading_error(zeta_n, self.goal)?;
        let psi_d = 2.0 * dpsi;
        let dynamic = dynamic_cost(&self.params, zeta_n, psi_d, t_d);
        let intermediate = intermediate_state(zeta_n, v0, self.goal, t_d, dpsi);
        let static_ = static_cost(&self.params, &intermediate, self.goal)?;
        Ok(TerminalCostBreakdown { t_d, psi_d, heading_error: dpsi, intermediate, dynamic, static_, total: dynamic + static_ })
    }

    /// Minimizes over `t_d` with a coarse grid and golden-section refinement.
    ///
    /// The turning stage may not carry the vehicle past the goal: beyond the
    /// reaching duration the goal lies behind the intermediate state and the
    /// straight cruise would start with a heading error near pi. The search
    /// range is therefore capped at the reaching duration.
    /// Returns `None` for the breakdown when `zeta_n` is on the goal.
    pub fn breakdown(&self, zeta_n: &HorizontalState, v0: f64) -> Result<Option<TerminalCostBreakdown>, EmpcError> {
        if (self.goal.0 - zeta_n.x).hypot(self.goal.1 - zeta_n.y) <= AT_GOAL {
            return Ok(None);
        }
        let s = self.search;
        let reach = self.reaching_duration(zeta_n, v0);
        let hi = reach.map_or(s.max, |t| t.min(s.max));
        let lo = s.min.min(hi);
        // Surface domain errors before the search swallows them as +inf.
        self.cost_at(zeta_n, v0, lo)?;
        let best = grid_then_golden(|t| self.cost_at(zeta_n, v0, t).map_or(f64::INFINITY, |b| b.total), lo, hi, s.grid, s.tol);
        let mut t_d = best.x;
        if let Some(t) = reach.filter(|&t| t == hi) {
            // Snap onto the cap when the search has converged to it.
            if (best.x - t).abs() <= 10.0 * s.tol.max(1e-12 * t) {
                t_d = t;
            }
        }
        self.cost_at(zeta_n, v0, t_d).map(Some)
    }

    /// Turn duration whose chord ends exactly on the goal. `None` when the
    /// chord never reaches it (heading error of pi, or no speed).
    pub fn reaching_duration(&self, zeta_n: &HorizontalState, v0: f64) -> Option<f64> {
        let dpsi = heading_error(zeta_n, self.goal).ok()?;
        let speed = zeta_n.u.hypot(v0) * sinc(dpsi);
        let dist = (self.goal.0 - zeta_n.x).hypot(self.goal.1 - zeta_n.y);
        let t = dist / speed;
        (speed > 0.0 && t.is_finite() && t > 0.0).then_some(t)
    }

    /// Gradient of the minimized cost with respect to `zeta_n`.
    ///
    /// Away from the reaching duration this is the partial gradient at fixed
    /// `t_d` (envelope argument). On the cap the minimizer follows the
    /// constraint `chord = distance`, and the gradient picks up the implicit
    /// change of `t_d`.
    pub fn gradient(&self, zeta_n: &HorizontalState, v0: f64, b: &TerminalCostBreakdown) -> [f64; 6] {
        let q = self.partials(zeta_n, v0, b.t_d);
        let mut grad = q.dynamic;
        if self.reaching_duration(zeta_n, v0) == Some(b.t_d) {
            for i in 0..6 {
                grad[i] += q.dynamic_dtd * (q.distance[i] - q.chord[i]) / q.chord_dtd;
            }
        } else {
            for i in 0..6 {
                grad[i] += q.static_[i];
            }
        }
        grad
    }

    /// Gradient of `J_d + J_s` with respect to `zeta_n` at fixed `t_d`.
    pub fn gradient_at(&self, zeta_n: &HorizontalState, v0: f64, t_d: f64) -> [f64; 6] {
        let q = self.partials(zeta_n, v0, t_d);
        let mut grad = q.dynamic;
        for i in 0..6 {
            grad[i] += q.static_[i];
        }
        grad
    }

    fn partials(&self, zeta_n: &HorizontalState, v0: f64, t_d: f64) -> Partials {
        let p = &self.params;
        let m = mass_diagonal(p);
        let (u, v, r, x, y) = (zeta_n.u, zeta_n.v, zeta_n.r, zeta_n.x, zeta_n.y);
        let (a, b) = (self.goal.0 - x, self.goal.1 - y);
        let dd = a * a + b * b;
        let dist = dd.sqrt();
        let sp2 = u * u + v * v;
        // d(dpsi)/d[u, v, r, x, y, psi]
        let (bu, bv) = if sp2 < 1e-9 { (0.0, 0.0) } else { (v / sp2, -u / sp2) };
        let g_dpsi = [bu, bv, 0.0, b / dd, -a / dd, -1.0];
        let g_psinf = [0.0, 0.0, 0.0, b / dd, -a / dd, 0.0];
        let dpsi = wrap_angle(b.atan2(a) - drift_angle(u, v) - zeta_n.psi);
        let psi_d = 2.0 * dpsi;

        // Dynamic stage.
        let pw = &p.power;
        let pair = |(l, rr): (f64, f64)| (pw.derivative(l), pw.derivative(rr));
        let rdot0 = 4.0 * (psi_d / t_d - r) / t_d;
        let (d0l, d0r) = pair(approx_thrusts(p, u, r, rdot0));
        let rp = psi_d / t_d;
        let (dpl, dpr) = pair(approx_thrusts(p, u, rp, 0.0));
        // Each thrust pair is (q + M, q - M) / 2 with q = X_uu u^2.
        let dq_du = 2.0 * p.x_uu * u;
        let dp0_dq = 0.5 * (d0l + d0r);
        let dp0_dm = 0.5 * (d0l - d0r);
        let dpp_dq = 0.5 * (dpl + dpr);
        let dpp_dm = 0.5 * (dpl - dpr);
        let dm0_ddpsi = m[5] * 8.0 / (t_d * t_d * p.l2);
        let dm0_dr = (-4.0 * m[5] / t_d + 2.0 * p.n_rr * r.abs()) / p.l2;
        let dmp_ddpsi = 2.0 * p.n_rr * rp.abs() / p.l2 * 2.0 / t_d;
        let mut dynamic = [0.0; 6];
        for i in 0..6 {
            let dq = if i == 0 { dq_du } else { 0.0 };
            let dr = if i == 2 { 1.0 } else { 0.0 };
            let d_p0 = dp0_dq * dq + dp0_dm * (dm0_ddpsi * g_dpsi[i] + dm0_dr * dr);
            let d_pp = dpp_dq * dq + dpp_dm * dmp_ddpsi * g_dpsi[i];
            dynamic[i] = (0.25 * d_p0 + 0.75 * d_pp) * t_d;
        }
        let dm0_dtd = m[5] / p.l2 * (-8.0 * psi_d / (t_d * t_d * t_d) + 4.0 * r / (t_d * t_d));
        let dmp_dtd = -2.0 * p.n_rr * rp.abs() / p.l2 * psi_d / (t_d * t_d);
        let dyn_power = (dynamic_cost(p, zeta_n, psi_d, t_d)) / t_d;
        let dynamic_dtd = dyn_power + t_d * (0.25 * dp0_dm * dm0_dtd + 0.75 * dpp_dm * dmp_dtd);

        // Static stage.
        let u_t = u.hypot(v0);
        let psi_nf = b.atan2(a);
        let (snf, cnf) = psi_nf.sin_cos();
        let sc = sinc(dpsi);
        let sc_p = sinc_prime(dpsi);
        let chord_len = u_t * t_d * sc;
        let (xs, ys) = (x + chord_len * cnf, y + chord_len * snf);
        let (ex, ey) = (self.goal.0 - xs, self.goal.1 - ys);
        let d = ex.hypot(ey);
        let mut chord = [0.0; 6];
        let mut static_ = [0.0; 6];
        let pstat = 2.0 * pw.power(0.5 * p.x_uu * u.abs() * u) + buoyancy_holding_power(p);
        let dpstat_du = 2.0 * pw.derivative(0.5 * p.x_uu * u.abs() * u) * p.x_uu * u.abs();
        for i in 0..6 {
            let dut = if i == 0 && u_t > 0.0 { u / u_t } else { 0.0 };
            chord[i] = t_d * (sc * dut + u_t * sc_p * g_dpsi[i]);
            if d > 0.0 && u_t > 0.0 {
                let dxs = if i == 3 { 1.0 } else { 0.0 } + chord[i] * cnf - chord_len * snf * g_psinf[i];
                let dys = if i == 4 { 1.0 } else { 0.0 } + chord[i] * snf + chord_len * cnf * g_psinf[i];
                let d_d = -(ex * dxs + ey * dys) / d;
                let dps = if i == 0 { dpstat_du } else { 0.0 };
                static_[i] = (d_d * pstat + d * dps) / u_t - d * pstat * dut / (u_t * u_t);
            }
        }
        let distance = [0.0, 0.0, 0.0, -a / dist, -b / dist, 0.0];
        Partials { dynamic, dynamic_dtd, static_, chord, chord_dtd: u_t * sc, distance }
    }
}

/// Partial derivatives of the two stages at fixed `t_d`.
struct Partials {
    dynamic: [f64; 6],
    dynamic_dtd: f64,
    static_: [f64; 6],
    chord: [f64; 6],
    chord_dtd: f64,
    distance: [f64; 6],
}

impl TerminalCost for TwoStageEnergyToGo {
    fn evaluate(&mut self, zeta_n: &HorizontalState, v0: f64, grad: &mut [f64; 6]) -> Result<f64, EmpcError> {
        match self.breakdown(zeta_n, v0)? {
            None => {
                *grad = [0.0; 6];
                Ok(0.0)
            }
            Some(b) => {
                *grad = self.gradient(zeta_n, v0, &b);
                Ok(b.total)
            }
        }
    }

    fn describe(&self, zeta_n: &HorizontalState, v0: f64) -> Option<TerminalCostBreakdown> {
        self.breakdown(zeta_n, v0).ok().flatten()
    }
}

/// Exact energy-to-go from a direct-collocation solve started at `zeta_n`.
///
/// The gradient comes from the multipliers of the initial-state constraints.
/// Each solve is seeded with the previous optimum when one exists.
#[derive(Debug, Clone)]
pub struct DcEnergyToGo {
    pub template: HorizontalOcp,
    pub options: SolverOptions,
    last: Option<MeshTrajectory>,
    /// Number of collocation solves performed.
    pub solves: usize,
    /// Summed solver time (s).
    pub solve_time: f64,
}

impl DcEnergyToGo {
    /// `template` supplies parameters, goal, radius, mesh and cruise speed;
    /// its start state is replaced on every evaluation.
    pub fn new(template: HorizontalOcp, options: SolverOptions) -> Self {
        Self { template, options, last: None, solves: 0, solve_time: 0.0 }
    }

    fn solve_from(&mut self, zeta_n: &HorizontalState) -> Result<(f64, Vec<f64>), OcpError> {
        let mut ocp = self.template.clone();
        ocp.start = *zeta_n;
        let seeded = self.last.as_ref().map(|mesh| {
            let mut m = mesh.clone();
            m.states[0] = zeta_n.to_array().to_vec();
            m
        });
        let result = match seeded {
            Some(guess) => {
                let spec = ocp.spec();
                let model = crate::collocation::HorizontalModel { params: ocp.params };
                crate::collocation::solve_ocp(&model, &spec, &guess, &self.options)
                    .or_else(|_| solve_horizontal(&ocp, &self.options).map(|s| s.best))
            }
            None => solve_horizontal(&ocp, &self.options).map(|s| s.best),
        }?;
        self.solves += 1;
        self.solve_time += result.solve_time;
        self.last = Some(result.mesh.clone());
        Ok((result.objective, result.initial_state_gradient))
    }
}

impl TerminalCost for DcEnergyToGo {
    fn evaluate(&mut self, zeta_n: &HorizontalState, _v0: f64, grad: &mut [f64; 6]) -> Result<f64, EmpcError> {
        let goal = self.template.goal;
        if (goal.0 - zeta_n.x).hypot(goal.1 - zeta_n.y) <= self.template.radius {
            *grad = [0.0; 6];
            return Ok(0.0);
        }
        let (value, g) = self.solve_from(zeta_n).map_err(EmpcError::EnergyToGo)?;
        grad.copy_from_slice(&g);
        Ok(value)
    }
}

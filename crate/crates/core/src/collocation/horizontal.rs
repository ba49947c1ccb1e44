//! Waypoint-to-goal problems for the vehicle models.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{solve_ocp, FinalTime, HorizontalModel, MeshTrajectory, OcpError, OcpSolution, OcpSpec, SixDofModel, Terminal};
use crate::math::wrap_angle;
use crate::nlp::SolverOptions;
use crate::vehicle::{axis_power, buoyancy_holding_power, AxisPower, HorizontalState, ThrustCommand, VehicleParams};

pub const DEFAULT_INTERVALS: usize = 100;

/// Cruise-speed multipliers of the deterministic multi-start.
const STARTS: [f64; 3] = [1.0, 0.8, 1.2];

/// Minimum-energy transfer from `start` into the disc around `goal`.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalOcp {
    pub params: VehicleParams,
    pub start: HorizontalState,
    pub goal: (f64, f64),
    /// Terminal disc radius imposed on the last node (m).
    pub radius: f64,
    pub intervals: usize,
    /// Speed used to build the initial guesses (m/s).
    pub cruise_speed: f64,
    /// Duration bounds; defaults to `[0.25, 4]` times the straight-line
    /// transit time at cruise speed.
    pub time_bounds: Option<(f64, f64)>,
}

impl HorizontalOcp {
    pub fn distance(&self) -> f64 {
        (self.goal.0 - self.start.x).hypot(self.goal.1 - self.start.y)
    }

    fn bounds(&self) -> (f64, f64) {
        self.time_bounds.unwrap_or_else(|| {
            let t = self.distance() / self.cruise_speed;
            (0.25 * t, 4.0 * t)
        })
    }

    pub fn spec(&self) -> OcpSpec {
        let (lo, hi) = self.bounds();
        OcpSpec {
            initial: self.start.to_array().to_vec(),
            terminal: Terminal::Disc { ix: 3, iy: 4, center: self.goal, radius: self.radius },
            intervals: self.intervals,
            final_time: FinalTime::Free { lo, hi },
        }
    }
}

/// Straight-line guess at constant `speed`: positions interpolate toward the
/// goal, the heading points at it and both thrusters balance drag.
pub fn initial_guess(ocp: &HorizontalOcp, speed: f64) -> MeshTrajectory {
    let s = &ocp.start;
    let (dx, dy) = (ocp.goal.0 - s.x, ocp.goal.1 - s.y);
    let heading = s.psi + wrap_angle(dy.atan2(dx) - s.psi);
    let (lo, hi) = ocp.bounds();
    let duration = (ocp.distance() / speed).clamp(lo, hi);
    let thrust = (0.5 * ocp.params.x_uu * speed * speed).min(ocp.params.t_max);
    let n = ocp.intervals;
    let mut mesh = MeshTrajectory { final_time: duration, ..Default::default() };
    for k in 0..=n {
        let a = k as f64 / n as f64;
        mesh.states.push(vec![speed, 0.0, 0.0, s.x + a * dx, s.y + a * dy, heading]);
        mesh.controls.push(vec![thrust, thrust]);
    }
    mesh
}

/// Best of the multi-start solves of a horizontal problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DcSolution {
    pub best: OcpSolution,
    /// Number of starts that converged.
    pub converged_starts: usize,
    /// Solver time summed over all starts (s).
    pub solve_time: f64,
}

impl DcSolution {
    pub fn energy(&self) -> f64 {
        self.best.objective
    }

    pub fn duration(&self) -> f64 {
        self.best.mesh.final_time
    }

    /// Energy of the solved mesh under the unsmoothed power law (J).
    pub fn exact_energy(&self, params: &VehicleParams) -> f64 {
        axis_energy(params, &self.best.mesh).total()
    }

    /// Linearly interpolated horizontal thrusts at time `t`.
    pub fn thrust_at(&self, t: f64) -> (f64, f64) {
        let u = self.best.mesh.control_at(t);
        (u[0], u[1])
    }

    pub fn states(&self) -> Vec<HorizontalState> {
        self.best.mesh.states.iter().map(|x| HorizontalState::from_array(x)).collect()
    }
}

/// Solves `ocp` from the nominal and the +-20% cruise-speed guesses and keeps
/// the cheapest converged result (ties go to the earlier start).
pub fn solve_horizontal(ocp: &HorizontalOcp, opts: &SolverOptions) -> Result<DcSolution, OcpError> {
    if ocp.distance() <= ocp.radius {
        return Err(OcpError::Spec(alloc::format!("start already inside the {} m goal disc", ocp.radius)));
    }
    if !(ocp.cruise_speed > 0.0) {
        return Err(OcpError::Spec(alloc::format!("cruise speed {} must be positive", ocp.cruise_speed)));
    }
    let model = HorizontalModel { params: ocp.params };
    let spec = ocp.spec();
    let mut best: Option<OcpSolution> = None;
    let mut first_err = None;
    let mut converged = 0;
    let mut time = 0.0;
    for k in STARTS {
        let guess = initial_guess(ocp, k * ocp.cruise_speed);
        match solve_ocp(&model, &spec, &guess, opts) {
            Ok(sol) => {
                converged += 1;
                time += sol.solve_time;
                if best.as_ref().is_none_or(|b| sol.objective < b.objective) {
                    best = Some(sol);
                }
            }
            Err(e) => {
                if let OcpError::Solver(ne) = &e {
                    time += ne.best_iterate().map_or(0.0, |s| s.solve_time);
                }
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some(best) => Ok(DcSolution { best, converged_starts: converged, solve_time: time }),
        None => Err(first_err.unwrap()),
    }
}

/// Lifts a horizontal mesh to the 6-DOF layout with level trim and the
/// vertical pair holding the net buoyancy.
pub fn lift_to_six_dof(params: &VehicleParams, mesh: &MeshTrajectory) -> MeshTrajectory {
    let hold = 0.5 * params.net_buoyancy();
    MeshTrajectory {
        final_time: mesh.final_time,
        states: mesh.states.iter().map(|h| vec![h[0], h[1], 0.0, 0.0, 0.0, h[2], h[3], h[4], 0.0, 0.0, 0.0, h[5]]).collect(),
        controls: mesh.controls.iter().map(|u| vec![u[0], u[1], hold, hold]).collect(),
    }
}

/// Solves the full 6-DOF version of `ocp` (at `ocp.intervals`), seeded with
/// `guess` in horizontal layout.
pub fn solve_six_dof(ocp: &HorizontalOcp, guess: &MeshTrajectory, opts: &SolverOptions) -> Result<OcpSolution, OcpError> {
    let model = SixDofModel::new(ocp.params);
    let h = ocp.spec();
    let s = &ocp.start;
    let spec = OcpSpec {
        initial: vec![s.u, s.v, 0.0, 0.0, 0.0, s.r, s.x, s.y, 0.0, 0.0, 0.0, s.psi],
        terminal: Terminal::Disc { ix: 6, iy: 7, center: ocp.goal, radius: ocp.radius },
        intervals: ocp.intervals,
        final_time: h.final_time,
    };
    solve_ocp(&model, &spec, &lift_to_six_dof(&ocp.params, guess), opts)
}

/// Per-axis energy (J) of a mesh, by trapezoidal quadrature of the axis
/// powers. Horizontal meshes (two controls) charge the buoyancy-holding power
/// to heave.
pub fn axis_energy(params: &VehicleParams, mesh: &MeshTrajectory) -> AxisPower {
    let pb = buoyancy_holding_power(params);
    let split = |u: &[f64]| -> AxisPower {
        if u.len() == 4 {
            axis_power(params, &ThrustCommand::from_array(u))
        } else {
            let mut a = axis_power(params, &ThrustCommand::new(u[0], u[1], 0.0, 0.0));
            a.heave = pb;
            a
        }
    };
    AxisPower {
        surge: mesh.integrate(|u| split(u).surge),
        yaw: mesh.integrate(|u| split(u).yaw),
        heave: mesh.integrate(|u| split(u).heave),
        pitch: mesh.integrate(|u| split(u).pitch),
    }
}

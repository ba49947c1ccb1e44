//! Independent reference solutions shared by the collocation and
//! receding-horizon tests: brute-force dynamic programming on a surge-only
//! transit, and a shortened waypoint transfer with its one-shot optimum.
#![allow(dead_code)]

use core::f64::consts::FRAC_1_SQRT_2;

use eompc_core::baselines::{Pid, PidGains, Setpoints};
use eompc_core::closed_loop::{simulate, SimConfig, SimResult};
use eompc_core::collocation::*;
use eompc_core::cruise::optimal_cruise_speed;
use eompc_core::empc::{EmpcConfig, EoEmpc, TerminalCost};
use eompc_core::nlp::SolverOptions;
use eompc_core::vehicle::{buoyancy_holding_power, mass_diagonal, thruster_power};
use eompc_core::{HorizontalState, VehicleParams, VehicleState};

pub const DISTANCE: f64 = 2.0;

pub fn surge_spec(u0: f64, intervals: usize) -> OcpSpec {
    let t = DISTANCE / u0;
    OcpSpec {
        initial: vec![u0, 0.0],
        terminal: Terminal::Fix(vec![(1, DISTANCE)]),
        intervals,
        final_time: FinalTime::Free { lo: 0.25 * t, hi: 4.0 * t },
    }
}

pub fn surge_guess(u0: f64, intervals: usize, p: &VehicleParams) -> MeshTrajectory {
    let thrust = 0.5 * p.x_uu * u0 * u0;
    MeshTrajectory {
        final_time: DISTANCE / u0,
        states: (0..=intervals).map(|k| vec![u0, DISTANCE * k as f64 / intervals as f64]).collect(),
        controls: vec![vec![thrust]; intervals + 1],
    }
}

/// Exact-power energy of a surge mesh.
pub fn surge_energy(p: &VehicleParams, mesh: &MeshTrajectory) -> f64 {
    mesh.integrate(|u| 2.0 * thruster_power(p, u[0])) + buoyancy_holding_power(p) * mesh.final_time
}

/// Backward dynamic programming over distance. The state is the surge speed
/// on a uniform grid, the stage is a slice of the path, the decision is the
/// per-thruster thrust held over the slice. Speeds between grid points are
/// interpolated linearly; the terminal speed is free.
pub fn surge_dp(p: &VehicleParams, u0: f64) -> f64 {
    let m = mass_diagonal(p)[0];
    let pb = buoyancy_holding_power(p);
    let (slices, speeds, thrusts) = (200, 301, 121);
    let dx = DISTANCE / slices as f64;
    let (u_lo, u_hi) = (0.02, 0.4);
    let du = (u_hi - u_lo) / (speeds - 1) as f64;
    let t_hi = 1.0;
    let mut value = vec![0.0; speeds];
    let interp = |v: &[f64], u: f64| -> f64 {
        if !(u >= u_lo && u <= u_hi) {
            return f64::INFINITY;
        }
        let s = (u - u_lo) / du;
        let i = (s.floor() as usize).min(speeds - 2);
        let a = s - i as f64;
        v[i] * (1.0 - a) + v[i + 1] * a
    };
    // Propagates the speed over one slice with four midpoint sub-steps in
    // distance; returns the exit speed and the elapsed time.
    let advance = |u: f64, thrust: f64| -> (f64, f64) {
        let mut u = u;
        let mut t = 0.0;
        let h = dx / 4.0;
        for _ in 0..4 {
            let f = |u: f64| (2.0 * thrust - p.x_uu * u * u) / (m * u);
            let um = u + 0.5 * h * f(u);
            if um <= 0.0 {
                return (f64::NAN, f64::INFINITY);
            }
            let un = u + h * f(um);
            if un <= 0.0 {
                return (f64::NAN, f64::INFINITY);
            }
            t += h / um;
            u = un;
        }
        (u, t)
    };
    let stage = |v: &[f64], u: f64| -> f64 {
        let mut best = f64::INFINITY;
        for j in 0..thrusts {
            let thrust = -t_hi + 2.0 * t_hi * j as f64 / (thrusts - 1) as f64;
            let (un, dt) = advance(u, thrust);
            let c = (2.0 * thruster_power(p, thrust) + pb) * dt + interp(v, un);
            best = best.min(c);
        }
        best
    };
    for _ in 0..slices - 1 {
        value = (0..speeds).map(|i| stage(&value, u_lo + du * i as f64)).collect();
    }
    stage(&value, u0)
}

pub const SHORT_GOAL: (f64, f64) = (FRAC_1_SQRT_2, FRAC_1_SQRT_2);
pub const SHORT_RADIUS: f64 = 0.05;

/// 1 m transfer with the nominal pi/4 heading error.
pub fn short_ocp() -> HorizontalOcp {
    let params = VehicleParams::default();
    let u = optimal_cruise_speed(&params);
    HorizontalOcp {
        params,
        start: HorizontalState { u, ..Default::default() },
        goal: SHORT_GOAL,
        radius: SHORT_RADIUS,
        intervals: 40,
        cruise_speed: u,
        time_bounds: None,
    }
}

/// EO-EMPC closed loop on the shortened transfer with terminal cost `terminal`.
pub fn short_closed_loop<K: TerminalCost>(terminal: K) -> SimResult {
    let ocp = short_ocp();
    let p = ocp.params;
    let config = EmpcConfig { goal: SHORT_GOAL, arrival_radius: SHORT_RADIUS, ..Default::default() };
    let pid = Pid::new(&p, PidGains::default(), Setpoints::default()).unwrap();
    let mut controller = EoEmpc::new(p, config, terminal, pid).unwrap();
    let cfg =
        SimConfig { dt: 0.01, max_time: 5.0 * ocp.distance() / ocp.cruise_speed, goal: SHORT_GOAL, arrival_radius: SHORT_RADIUS };
    simulate(&p, VehicleState::from_horizontal(&ocp.start), &mut controller, &cfg)
}

/// One-shot collocation optimum of the shortened transfer (exact power law).
pub fn short_one_shot() -> f64 {
    let ocp = short_ocp();
    solve_horizontal(&ocp, &SolverOptions::default()).unwrap().exact_energy(&ocp.params)
}

//! Vehicle models in collocation form.

use super::CollocationModel;
use crate::vehicle::{
    buoyancy_holding_power, dynamics_horizontal, horizontal_jacobian, mass_diagonal, state_derivative, HorizontalState,
    ThrustCommand, VehicleParams, VehicleState,
};

#[allow(unused_imports)]
use num_traits::Float;

/// Thrust (N) below which the power law is rounded off inside the optimizer.
/// Newton iterations cycle on the infinite curvature of `|T|^1.5` at zero;
/// the rounded law changes a thruster's power by at most `P(POWER_SMOOTHING)`.
pub const POWER_SMOOTHING: f64 = 0.01;

fn summed(p: &VehicleParams, u: &[f64], order: usize) -> f64 {
    u.iter().map(|t| p.power.smoothed(*t, POWER_SMOOTHING)[order]).sum()
}

fn per_control(p: &VehicleParams, u: &[f64], order: usize, out: &mut [f64]) {
    for (o, t) in out.iter_mut().zip(u) {
        *o = p.power.smoothed(*t, POWER_SMOOTHING)[order];
    }
}

fn sgn(a: f64) -> f64 {
    if a > 0.0 {
        1.0
    } else if a < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Reduced horizontal model: state `[u, v, r, x, y, psi]`, controls
/// `[T_l, T_r]`, plus the constant buoyancy-holding power of the vertical pair.
#[derive(Debug, Clone, Copy)]
pub struct HorizontalModel {
    pub params: VehicleParams,
}

impl CollocationModel for HorizontalModel {
    fn state_dim(&self) -> usize {
        6
    }
    fn control_dim(&self) -> usize {
        2
    }

    fn rates(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&dynamics_horizontal(&self.params, &HorizontalState::from_array(x), u[0], u[1]));
    }

    fn rates_jacobian(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        let j = horizontal_jacobian(&self.params, &HorizontalState::from_array(x), u[0], u[1]);
        for i in 0..6 {
            out[i * 8..(i + 1) * 8].copy_from_slice(&j[i]);
        }
    }

    fn rates_hessian(&self, x: &[f64], _u: &[f64], mu: &[f64], out: &mut [f64]) {
        let p = &self.params;
        let m = mass_diagonal(p);
        let (uu, v, r, psi) = (x[0], x[1], x[2], x[5]);
        let (s, c) = psi.sin_cos();
        out.fill(0.0);
        let mut add = |i: usize, j: usize, val: f64| {
            out[i * 8 + j] += val;
            if i != j {
                out[j * 8 + i] += val;
            }
        };
        add(0, 0, -2.0 * mu[0] * p.x_uu * sgn(uu) / m[0]);
        add(1, 2, mu[0] * p.mass / m[0]);
        add(0, 2, -mu[1] * p.mass / m[1]);
        add(1, 1, -2.0 * mu[1] * p.y_vv * sgn(v) / m[1]);
        add(2, 2, -2.0 * mu[2] * p.n_rr * sgn(r) / m[5]);
        add(0, 5, -mu[3] * s + mu[4] * c);
        add(1, 5, -mu[3] * c - mu[4] * s);
        add(5, 5, mu[3] * (-uu * c + v * s) + mu[4] * (-uu * s - v * c));
    }

    fn stage_power(&self, u: &[f64]) -> f64 {
        summed(&self.params, u, 0)
    }
    fn stage_power_gradient(&self, u: &[f64], out: &mut [f64]) {
        per_control(&self.params, u, 1, out);
    }
    fn stage_power_curvature(&self, u: &[f64], out: &mut [f64]) {
        per_control(&self.params, u, 2, out);
    }
    fn hotel_power(&self) -> f64 {
        buoyancy_holding_power(&self.params)
    }

    fn control_bounds(&self, lo: &mut [f64], hi: &mut [f64]) {
        lo.fill(-self.params.t_max);
        hi.fill(self.params.t_max);
    }

    fn state_scale(&self, out: &mut [f64]) {
        out.copy_from_slice(&[0.2, 0.05, 0.2, 1.0, 1.0, 1.0]);
    }
}

/// Full 6-DOF model: state `[nu, eta]`, controls `[T_l, T_r, T_f, T_a]`.
///
/// Heave, roll and pitch are confined to the boxes `|z| <= depth_band`,
/// `|phi|, |theta| <= angle_band`.
#[derive(Debug, Clone, Copy)]
pub struct SixDofModel {
    pub params: VehicleParams,
    pub depth_band: f64,
    pub angle_band: f64,
}

impl SixDofModel {
    pub fn new(params: VehicleParams) -> Self {
        Self { params, depth_band: 0.01, angle_band: 0.05 }
    }
}

impl CollocationModel for SixDofModel {
    fn state_dim(&self) -> usize {
        12
    }
    fn control_dim(&self) -> usize {
        4
    }

    fn rates(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        let mut a = [0.0; 12];
        a.copy_from_slice(x);
        let s = VehicleState::from_array(&a);
        match state_derivative(&self.params, &s, &ThrustCommand::from_array(u)) {
            Ok(d) => out.copy_from_slice(&d),
            Err(_) => out.fill(f64::NAN),
        }
    }

    fn stage_power(&self, u: &[f64]) -> f64 {
        summed(&self.params, u, 0)
    }
    fn stage_power_gradient(&self, u: &[f64], out: &mut [f64]) {
        per_control(&self.params, u, 1, out);
    }
    fn stage_power_curvature(&self, u: &[f64], out: &mut [f64]) {
        per_control(&self.params, u, 2, out);
    }

    fn control_bounds(&self, lo: &mut [f64], hi: &mut [f64]) {
        lo.fill(-self.params.t_max);
        hi.fill(self.params.t_max);
    }

    fn state_bounds(&self, lo: &mut [f64], hi: &mut [f64]) {
        lo[8] = -self.depth_band;
        hi[8] = self.depth_band;
        for i in [9, 10] {
            lo[i] = -self.angle_band;
            hi[i] = self.angle_band;
        }
    }

    fn state_scale(&self, out: &mut [f64]) {
        out.copy_from_slice(&[0.2, 0.05, 0.01, 0.05, 0.05, 0.2, 1.0, 1.0, 0.01, 0.05, 0.05, 1.0]);
    }
}

/// Straight-line surge with both horizontal thrusters sharing the load:
/// state `[u, x]`, control `T` per thruster.
#[derive(Debug, Clone, Copy)]
pub struct SurgeModel {
    pub params: VehicleParams,
}

impl CollocationModel for SurgeModel {
    fn state_dim(&self) -> usize {
        2
    }
    fn control_dim(&self) -> usize {
        1
    }

    fn rates(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        let m = mass_diagonal(&self.params);
        out[0] = (2.0 * u[0] - self.params.x_uu * x[0].abs() * x[0]) / m[0];
        out[1] = x[0];
    }

    fn rates_jacobian(&self, x: &[f64], _u: &[f64], out: &mut [f64]) {
        let m = mass_diagonal(&self.params);
        out.copy_from_slice(&[-2.0 * self.params.x_uu * x[0].abs() / m[0], 0.0, 2.0 / m[0], 1.0, 0.0, 0.0]);
    }

    fn rates_hessian(&self, x: &[f64], _u: &[f64], mu: &[f64], out: &mut [f64]) {
        let m = mass_diagonal(&self.params);
        out.fill(0.0);
        out[0] = -2.0 * mu[0] * self.params.x_uu * sgn(x[0]) / m[0];
    }

    fn stage_power(&self, u: &[f64]) -> f64 {
        2.0 * summed(&self.params, u, 0)
    }
    fn stage_power_gradient(&self, u: &[f64], out: &mut [f64]) {
        per_control(&self.params, u, 1, out);
        out[0] *= 2.0;
    }
    fn stage_power_curvature(&self, u: &[f64], out: &mut [f64]) {
        per_control(&self.params, u, 2, out);
        out[0] *= 2.0;
    }
    fn hotel_power(&self) -> f64 {
        buoyancy_holding_power(&self.params)
    }

    fn control_bounds(&self, lo: &mut [f64], hi: &mut [f64]) {
        lo[0] = -self.params.t_max;
        hi[0] = self.params.t_max;
    }

    fn state_scale(&self, out: &mut [f64]) {
        out.copy_from_slice(&[0.2, 1.0]);
    }
}

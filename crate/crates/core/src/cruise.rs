//! Energy-optimal straight-line cruise speed.

#[allow(unused_imports)]
use num_traits::Float;

use crate::math::grid_then_golden;
use crate::vehicle::{buoyancy_holding_power, VehicleParams};

/// Energy per metre (J/m) of a steady straight cruise at surge speed `u`:
/// `(2 P(X_uu u^2 / 2) + P_PB) / u`.
pub fn transport_cost(p: &VehicleParams, u: f64) -> f64 {
    (2.0 * p.power.power(0.5 * p.x_uu * u * u) + buoyancy_holding_power(p)) / u
}

/// Speed range searched by [`optimal_cruise_speed`]: from 1 mm/s up to the
/// fastest speed both horizontal thrusters can hold against drag.
pub fn cruise_speed_bounds(p: &VehicleParams) -> (f64, f64) {
    (1e-3, (2.0 * p.t_max / p.x_uu).sqrt())
}

/// Minimizer of [`transport_cost`] over [`cruise_speed_bounds`].
///
/// Without a buoyancy-holding load the cost falls monotonically toward zero
/// speed and the lower bound is returned.
pub fn optimal_cruise_speed(p: &VehicleParams) -> f64 {
    let (lo, hi) = cruise_speed_bounds(p);
    grid_then_golden(|u| transport_cost(p, u), lo, hi, 64, 1e-10).x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_speed_is_interior() {
        let p = VehicleParams::default();
        let (lo, hi) = cruise_speed_bounds(&p);
        let u = optimal_cruise_speed(&p);
        assert!(u > lo && u < hi, "{u}");
    }

    #[test]
    fn grid_oracle_agrees() {
        let p = VehicleParams::default();
        let (lo, hi) = cruise_speed_bounds(&p);
        let n = 200_000;
        let mut best = (lo, f64::INFINITY);
        for i in 0..=n {
            let u = lo + (hi - lo) * i as f64 / n as f64;
            let c = transport_cost(&p, u);
            if c < best.1 {
                best = (u, c);
            }
        }
        assert!((optimal_cruise_speed(&p) - best.0).abs() < 1e-3);
    }

    #[test]
    fn propeller_law_closed_form() {
        // d/du (2 kappa a^1.5 u^2 + P / u) = 0  =>  u^3 = P / (4 kappa a^1.5)
        let p = VehicleParams::default();
        let kappa = match p.power {
            crate::PowerModel::Propeller { kappa } => kappa,
            _ => unreachable!(),
        };
        let a = 0.5 * p.x_uu;
        let u = (buoyancy_holding_power(&p) / (4.0 * kappa * a.powf(1.5))).cbrt();
        assert!((optimal_cruise_speed(&p) - u).abs() < 1e-6);
    }

    #[test]
    fn zero_hotel_load_hits_lower_bound() {
        let mut p = VehicleParams::default();
        p.buoyancy = p.weight;
        assert_eq!(optimal_cruise_speed(&p), cruise_speed_bounds(&p).0);
    }

    #[test]
    fn heavier_hotel_load_speeds_up() {
        let p = VehicleParams::default();
        let mut q = p;
        // Doubling P_PB under the propeller law: scale (B - W) by 2^(2/3).
        q.buoyancy = q.weight + (p.buoyancy - p.weight) * 2f64.powf(2.0 / 3.0);
        assert!((buoyancy_holding_power(&q) - 2.0 * buoyancy_holding_power(&p)).abs() < 1e-12);
        assert!(optimal_cruise_speed(&q) > optimal_cruise_speed(&p));
    }
}

//! Thrust-to-power conversion and per-axis power attribution.

#[allow(unused_imports)]
use num_traits::Float;

use super::params::{ParamError, VehicleParams};
use super::state::ThrustCommand;

/// Electrical power drawn by one thruster as a function of its thrust.
///
/// Every variant is even in `T`, zero at rest and strictly increasing in `|T|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerModel {
    /// Propeller law `P = kappa |T|^(3/2)`.
    Propeller { kappa: f64 },
    /// `P = c1 |T| + c2 T^2 + c3 |T|^3`.
    Polynomial { c1: f64, c2: f64, c3: f64 },
}

impl PowerModel {
    pub fn power(&self, t: f64) -> f64 {
        let a = t.abs();
        match *self {
            PowerModel::Propeller { kappa } => kappa * a * a.sqrt(),
            PowerModel::Polynomial { c1, c2, c3 } => a * (c1 + a * (c2 + a * c3)),
        }
    }

    /// `dP/dT`.
    pub fn derivative(&self, t: f64) -> f64 {
        let a = t.abs();
        let s = if t > 0.0 {
            1.0
        } else if t < 0.0 {
            -1.0
        } else {
            0.0
        };
        match *self {
            PowerModel::Propeller { kappa } => 1.5 * kappa * a.sqrt() * s,
            PowerModel::Polynomial { c1, c2, c3 } => s * (c1 + 2.0 * c2 * a + 3.0 * c3 * a * a),
        }
    }

    /// `d2P/dT2` away from zero thrust (the propeller law's is unbounded there).
    pub fn curvature(&self, t: f64) -> f64 {
        let a = t.abs();
        match *self {
            PowerModel::Propeller { kappa } => 0.75 * kappa / a.sqrt(),
            PowerModel::Polynomial { c2, c3, .. } => 2.0 * c2 + 6.0 * c3 * a,
        }
    }

    /// Value, slope and curvature of the smoothed law
    /// `P(sqrt(T^2 + eps^2)) - P(eps)`, which is twice differentiable at zero
    /// and differs from `P` by at most `P(eps)`.
    pub fn smoothed(&self, t: f64, eps: f64) -> [f64; 3] {
        let a = (t * t + eps * eps).sqrt();
        let (d1, d2) = (self.derivative(a), self.curvature(a));
        let da = t / a;
        [self.power(a) - self.power(eps), d1 * da, d2 * da * da + d1 * eps * eps / (a * a * a)]
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        match *self {
            PowerModel::Propeller { kappa } => {
                if !(kappa > 0.0) || !kappa.is_finite() {
                    return Err(ParamError::OutOfRange { name: "kappa", requirement: "finite and > 0", value: kappa });
                }
            }
            PowerModel::Polynomial { c1, c2, c3 } => {
                for (name, v) in [("c1", c1), ("c2", c2), ("c3", c3)] {
                    if !(v >= 0.0) || !v.is_finite() {
                        return Err(ParamError::OutOfRange { name, requirement: "finite and >= 0", value: v });
                    }
                }
                if c1 + c2 + c3 <= 0.0 {
                    return Err(ParamError::OutOfRange { name: "c1 + c2 + c3", requirement: "> 0", value: c1 + c2 + c3 });
                }
            }
        }
        Ok(())
    }
}

/// Power of a single thruster (W).
pub fn thruster_power(p: &VehicleParams, t: f64) -> f64 {
    p.power.power(t)
}

/// Power of all four thrusters (W).
pub fn stage_power_all(p: &VehicleParams, c: &ThrustCommand) -> f64 {
    c.to_array().iter().map(|&t| p.power.power(t)).sum()
}

/// Power of the two horizontal thrusters (W).
pub fn stage_power_horizontal(p: &VehicleParams, tl: f64, tr: f64) -> f64 {
    p.power.power(tl) + p.power.power(tr)
}

/// Power the vertical pair spends to cancel the net positive buoyancy,
/// `2 P((B - W) / 2)`.
pub fn buoyancy_holding_power(p: &VehicleParams) -> f64 {
    2.0 * p.power.power(0.5 * (p.buoyancy - p.weight))
}

/// Instantaneous power split by control axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxisPower {
    pub surge: f64,
    pub yaw: f64,
    pub heave: f64,
    pub pitch: f64,
}

impl AxisPower {
    pub fn total(&self) -> f64 {
        self.surge + self.yaw + self.heave + self.pitch
    }
}

/// Splits thruster power into axes through the symmetric/antisymmetric
/// decomposition of each pair: the common-mode thrust `s = (T1 + T2) / 2`
/// is charged `2 P(s)` and the differential mode gets the remainder.
///
/// The four components sum to [`stage_power_all`] up to rounding. For a
/// convex power law the differential shares are non-negative.
pub fn axis_power(p: &VehicleParams, c: &ThrustCommand) -> AxisPower {
    let pw = |t: f64| p.power.power(t);
    let horizontal = pw(c.left) + pw(c.right);
    let vertical = pw(c.fore) + pw(c.aft);
    let surge = 2.0 * pw(0.5 * (c.left + c.right));
    let heave = 2.0 * pw(0.5 * (c.fore + c.aft));
    AxisPower { surge, yaw: horizontal - surge, heave, pitch: vertical - heave }
}

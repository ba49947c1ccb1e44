use thiserror::Error;

use super::energy::PowerModel;

/// Standard gravity (m/s^2).
pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    OutOfRange { name: &'static str, requirement: &'static str, value: f64 },
    #[error("buoyancy {buoyancy} N must not be below weight {weight} N")]
    NegativeBuoyancy { weight: f64, buoyancy: f64 },
}

/// Physical and hydrodynamic constants of the vehicle.
///
/// Added-mass derivatives follow the usual marine convention (non-positive
/// values, so `m - x_du > m`). Quadratic damping coefficients are stored as
/// positive magnitudes: the surge drag force is `-x_uu |u| u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    /// Dry mass (kg).
    pub mass: f64,
    /// Weight W (N).
    pub weight: f64,
    /// Buoyancy B (N).
    pub buoyancy: f64,
    pub x_du: f64,
    pub y_dv: f64,
    pub z_dw: f64,
    pub k_dp: f64,
    pub m_dq: f64,
    pub n_dr: f64,
    pub x_uu: f64,
    pub y_vv: f64,
    pub z_ww: f64,
    pub k_pp: f64,
    pub m_qq: f64,
    pub n_rr: f64,
    pub i_x: f64,
    pub i_y: f64,
    pub i_z: f64,
    /// Vertical offset of the center of gravity below the center of buoyancy (m).
    pub z_g: f64,
    /// Longitudinal distance from midship to each vertical thruster (m).
    pub l1: f64,
    /// Lateral distance from the center line to each horizontal thruster (m).
    pub l2: f64,
    /// Vertical distance from the horizontal thrusters to the center of gravity (m).
    pub l3: f64,
    /// Per-thruster saturation (N).
    pub t_max: f64,
    pub power: PowerModel,
}

impl Default for VehicleParams {
    /// Ellipsoidal 1 m x 0.5 m hovering vehicle, 20.42 kg dry mass and
    /// 20.57 kg displacement. Hydrodynamic terms are prolate-spheroid
    /// estimates; see `config/PARAMETERS.md` in the `eompc` crate.
    fn default() -> Self {
        VehicleParams {
            mass: 20.42,
            weight: 20.42 * GRAVITY,
            buoyancy: 20.57 * GRAVITY,
            x_du: -4.32,
            y_dv: -14.48,
            z_dw: -14.48,
            k_dp: 0.0,
            m_dq: -0.31,
            n_dr: -0.31,
            x_uu: 55.0,
            y_vv: 200.0,
            z_ww: 200.0,
            k_pp: 0.5,
            m_qq: 5.0,
            n_rr: 5.0,
            i_x: 0.51,
            i_y: 1.276,
            i_z: 1.276,
            z_g: 0.02,
            l1: 0.35,
            l2: 0.20,
            l3: 0.03,
            t_max: 7.86,
            power: PowerModel::Propeller { kappa: 0.45 },
        }
    }
}

impl VehicleParams {
    /// Checks the physical invariants of the parameter set.
    pub fn validate(&self) -> Result<(), ParamError> {
        let positive: [(&'static str, f64); 13] = [
            ("mass", self.mass),
            ("weight", self.weight),
            ("x_uu", self.x_uu),
            ("y_vv", self.y_vv),
            ("z_ww", self.z_ww),
            ("k_pp", self.k_pp),
            ("m_qq", self.m_qq),
            ("n_rr", self.n_rr),
            ("i_x", self.i_x),
            ("i_y", self.i_y),
            ("i_z", self.i_z),
            ("t_max", self.t_max),
            ("buoyancy", self.buoyancy),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ParamError::OutOfRange { name, requirement: "finite and > 0", value });
            }
        }
        let non_negative = [("l1", self.l1), ("l2", self.l2), ("l3", self.l3)];
        for (name, value) in non_negative {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(ParamError::OutOfRange { name, requirement: "finite and >= 0", value });
            }
        }
        let added = [
            ("x_du", self.x_du),
            ("y_dv", self.y_dv),
            ("z_dw", self.z_dw),
            ("k_dp", self.k_dp),
            ("m_dq", self.m_dq),
            ("n_dr", self.n_dr),
        ];
        for (name, value) in added {
            if !(value <= 0.0) || !value.is_finite() {
                return Err(ParamError::OutOfRange { name, requirement: "finite and <= 0", value });
            }
        }
        if !self.z_g.is_finite() {
            return Err(ParamError::OutOfRange { name: "z_g", requirement: "finite", value: self.z_g });
        }
        if self.buoyancy < self.weight {
            return Err(ParamError::NegativeBuoyancy { weight: self.weight, buoyancy: self.buoyancy });
        }
        self.power.validate()
    }

    /// Net upward force B - W (N).
    pub fn net_buoyancy(&self) -> f64 {
        self.buoyancy - self.weight
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_positively_buoyant() {
        let p = VehicleParams::default();
        p.validate().unwrap();
        assert!(p.buoyancy > p.weight);
        assert!((p.net_buoyancy() - 0.15 * GRAVITY).abs() < 1e-9);
    }

    #[test]
    fn rejects_negative_damping() {
        let p = VehicleParams { n_rr: -1.0, ..Default::default() };
        assert!(matches!(p.validate(), Err(ParamError::OutOfRange { name: "n_rr", .. })));
    }

    #[test]
    fn rejects_sinking_vehicle() {
        let p = VehicleParams { buoyancy: 100.0, ..Default::default() };
        assert!(matches!(p.validate(), Err(ParamError::NegativeBuoyancy { .. })));
    }
}

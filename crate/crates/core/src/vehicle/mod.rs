//! Vehicle parameters, kinematics/dynamics and energy accounting.

mod dynamics;
mod energy;
mod params;
mod state;

pub use dynamics::{
    allocate, coriolis, damping_force, dynamics_6dof, dynamics_horizontal, horizontal_jacobian, kinematic_rates, mass_diagonal,
    restoring_force, state_derivative, step, step_horizontal, step_horizontal_with_jacobian, transformation_matrix,
    HorizontalJacobian,
};
pub use energy::{
    axis_power, buoyancy_holding_power, stage_power_all, stage_power_horizontal, thruster_power, AxisPower, PowerModel,
};
pub use params::{ParamError, VehicleParams, GRAVITY};
pub use state::{GeneralizedForce, HorizontalState, ThrustCommand, VehicleState};

use thiserror::Error;

/// Failures of the vehicle model.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ModelError {
    #[error("Euler transformation is singular at pitch {theta} rad")]
    SingularOrientation { theta: f64 },
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
}

/// Pitch margin from +-pi/2 inside which the Euler-rate map is treated as singular.
pub const GIMBAL_TOLERANCE: f64 = 1e-6;

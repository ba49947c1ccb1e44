//! Energy-optimal horizontal maneuvering for a small hovering AUV.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every numerical
//! piece of the stack:
//!
//! * [`vehicle`]: parameters, 6-DOF and reduced horizontal dynamics, thruster
//!   allocation, RK4 stepping and thrust-to-power accounting.
//! * [`nlp`]: a primal-dual interior-point solver for sparse, banded NLPs.
//! * [`collocation`]: trapezoidal direct collocation of the energy
//!   management problem (the global-optimality oracle and DC baselines).
//! * [`empc`]: the economic MPC with the two-stage energy-to-go terminal cost.
//! * [`baselines`]: line-of-sight tracking MPC and the heave/pitch PID loops.
//! * [`closed_loop`]: the fixed-step closed-loop simulation engine.
//!
//! Enable the `std` feature to record wall-clock solve times.

#![no_std]
#![warn(missing_debug_implementations)]
// Negated comparisons reject NaN; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod baselines;
pub mod closed_loop;
pub mod collocation;
pub mod cruise;
pub mod empc;
pub mod horizon;
pub mod math;
pub mod nlp;
pub mod qn;
pub mod vehicle;

pub use vehicle::{GeneralizedForce, HorizontalState, PowerModel, ThrustCommand, VehicleParams, VehicleState};

//! Rigid-body kinematics, diagonal-mass dynamics and fixed-step RK4.

#[allow(unused_imports)]
use num_traits::Float;

use super::params::VehicleParams;
use super::state::{GeneralizedForce, HorizontalState, ThrustCommand, VehicleState};
use super::{ModelError, GIMBAL_TOLERANCE};
use core::f64::consts::FRAC_PI_2;

/// Diagonal of the total (rigid body + added) mass matrix.
pub fn mass_diagonal(p: &VehicleParams) -> [f64; 6] {
    [p.mass - p.x_du, p.mass - p.y_dv, p.mass - p.z_dw, p.i_x - p.k_dp, p.i_y - p.m_dq, p.i_z - p.n_dr]
}

fn check_pitch(theta: f64) -> Result<(), ModelError> {
    if theta.abs() >= FRAC_PI_2 - GIMBAL_TOLERANCE || !theta.is_finite() {
        Err(ModelError::SingularOrientation { theta })
    } else {
        Ok(())
    }
}

/// Body-to-earth transformation `J(eta)`: the `ZYX` rotation for linear
/// velocities and the Euler-rate map for angular velocities.
pub fn transformation_matrix(eta: &[f64; 6]) -> Result<[[f64; 6]; 6], ModelError> {
    let (phi, theta, psi) = (eta[3], eta[4], eta[5]);
    check_pitch(theta)?;
    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    let tt = st / ct;
    let mut j = [[0.0; 6]; 6];
    j[0][0] = cp * ct;
    j[0][1] = -sp * cf + cp * st * sf;
    j[0][2] = sp * sf + cp * cf * st;
    j[1][0] = sp * ct;
    j[1][1] = cp * cf + sf * st * sp;
    j[1][2] = -cp * sf + st * sp * cf;
    j[2][0] = -st;
    j[2][1] = ct * sf;
    j[2][2] = ct * cf;
    j[3][3] = 1.0;
    j[3][4] = sf * tt;
    j[3][5] = cf * tt;
    j[4][4] = cf;
    j[4][5] = -sf;
    j[5][4] = sf / ct;
    j[5][5] = cf / ct;
    Ok(j)
}

/// Pose rates `J(eta) nu`.
pub fn kinematic_rates(state: &VehicleState) -> Result<[f64; 6], ModelError> {
    let j = transformation_matrix(&state.eta)?;
    let mut out = [0.0; 6];
    for (i, row) in j.iter().enumerate() {
        out[i] = row.iter().zip(&state.nu).map(|(a, b)| a * b).sum();
    }
    Ok(out)
}

/// Thruster allocation: maps the four thrusts to body forces and moments.
pub fn allocate(p: &VehicleParams, c: &ThrustCommand) -> GeneralizedForce {
    let th = c.left + c.right;
    GeneralizedForce([th, 0.0, c.aft + c.fore, 0.0, th * p.l3 + p.l1 * (c.aft - c.fore), p.l2 * (c.right - c.left)])
}

/// Rigid-body Coriolis/centripetal vector `C_RB(nu) nu` with the centre of
/// gravity at the body origin: `m (omega x v)` for the forces and
/// `omega x (I omega)` for the moments. Added-mass (Munk) terms are left out.
///
/// The matrix is skew-symmetric, so `nu . C(nu) nu == 0`.
pub fn coriolis(p: &VehicleParams, nu: &[f64; 6]) -> [f64; 6] {
    let (u, v, w, pp, q, r) = (nu[0], nu[1], nu[2], nu[3], nu[4], nu[5]);
    let (a1, a2, a3) = (p.mass * u, p.mass * v, p.mass * w);
    let (b1, b2, b3) = (p.i_x * pp, p.i_y * q, p.i_z * r);
    [q * a3 - r * a2, r * a1 - pp * a3, pp * a2 - q * a1, q * b3 - r * b2, r * b1 - pp * b3, pp * b2 - q * b1]
}

/// Diagonal quadratic damping `F_h(nu) nu`.
pub fn damping_force(p: &VehicleParams, nu: &[f64; 6]) -> [f64; 6] {
    let d = [p.x_uu, p.y_vv, p.z_ww, p.k_pp, p.m_qq, p.n_rr];
    let mut out = [0.0; 6];
    for i in 0..6 {
        out[i] = d[i] * nu[i].abs() * nu[i];
    }
    out
}

/// Hydrostatic restoring vector with the center of buoyancy at the origin
/// and the center of gravity at `(0, 0, z_g)`.
pub fn restoring_force(p: &VehicleParams, eta: &[f64; 6]) -> [f64; 6] {
    let (sf, cf) = eta[3].sin_cos();
    let (st, ct) = eta[4].sin_cos();
    let wb = p.weight - p.buoyancy;
    let zw = p.z_g * p.weight;
    [wb * st, -wb * ct * sf, -wb * ct * cf, zw * ct * sf, zw * st, 0.0]
}

/// Body accelerations `M^-1 (tau - C(nu) nu - D(nu) nu - g(eta))`.
pub fn dynamics_6dof(p: &VehicleParams, s: &VehicleState, c: &ThrustCommand) -> [f64; 6] {
    let m = mass_diagonal(p);
    let tau = allocate(p, c).0;
    let fc = coriolis(p, &s.nu);
    let fd = damping_force(p, &s.nu);
    let fg = restoring_force(p, &s.eta);
    let mut out = [0.0; 6];
    for i in 0..6 {
        out[i] = (tau[i] - fc[i] - fd[i] - fg[i]) / m[i];
    }
    out
}

/// Time derivative of the packed state `[nu, eta]`.
pub fn state_derivative(p: &VehicleParams, s: &VehicleState, c: &ThrustCommand) -> Result<[f64; 12], ModelError> {
    let nu_dot = dynamics_6dof(p, s, c);
    let eta_dot = kinematic_rates(s)?;
    let mut out = [0.0; 12];
    out[..6].copy_from_slice(&nu_dot);
    out[6..].copy_from_slice(&eta_dot);
    Ok(out)
}

/// One RK4 step of the 6-DOF model with the command held constant.
pub fn step(p: &VehicleParams, s: &VehicleState, c: &ThrustCommand, dt: f64) -> Result<VehicleState, ModelError> {
    if !(dt > 0.0) {
        return Err(ModelError::NonPositiveStep(dt));
    }
    let x0 = s.to_array();
    let eval = |x: &[f64; 12]| state_derivative(p, &VehicleState::from_array(x), c);
    let axpy = |a: f64, k: &[f64; 12]| {
        let mut out = x0;
        for i in 0..12 {
            out[i] += a * k[i];
        }
        out
    };
    let k1 = eval(&x0)?;
    let k2 = eval(&axpy(0.5 * dt, &k1))?;
    let k3 = eval(&axpy(0.5 * dt, &k2))?;
    let k4 = eval(&axpy(dt, &k3))?;
    let mut x1 = x0;
    for i in 0..12 {
        x1[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    let mut next = VehicleState::from_array(&x1);
    next.wrap_angles();
    Ok(next)
}

/// Horizontal-plane rates `[u', v', r', x', y', psi']` with heave, roll and
/// pitch frozen at zero.
pub fn dynamics_horizontal(p: &VehicleParams, s: &HorizontalState, tl: f64, tr: f64) -> [f64; 6] {
    horizontal_rates(p, &s.to_array(), tl, tr)
}

fn horizontal_rates(p: &VehicleParams, x: &[f64; 6], tl: f64, tr: f64) -> [f64; 6] {
    let m = mass_diagonal(p);
    let (u, v, r, psi) = (x[0], x[1], x[2], x[5]);
    let (s, c) = psi.sin_cos();
    [
        (p.mass * v * r - p.x_uu * u.abs() * u + tl + tr) / m[0],
        (-p.mass * u * r - p.y_vv * v.abs() * v) / m[1],
        (-p.n_rr * r.abs() * r + p.l2 * (tr - tl)) / m[5],
        u * c - v * s,
        u * s + v * c,
        r,
    ]
}

/// Jacobian of the horizontal rates with respect to `[state (6), tl, tr]`.
pub type HorizontalJacobian = [[f64; 8]; 6];

/// Analytic Jacobian of [`dynamics_horizontal`].
pub fn horizontal_jacobian(p: &VehicleParams, s: &HorizontalState, _tl: f64, _tr: f64) -> HorizontalJacobian {
    jacobian_at(p, &s.to_array())
}

fn jacobian_at(p: &VehicleParams, x: &[f64; 6]) -> HorizontalJacobian {
    let m = mass_diagonal(p);
    let (u, v, r, psi) = (x[0], x[1], x[2], x[5]);
    let (s, c) = psi.sin_cos();
    let mut j = [[0.0; 8]; 6];
    j[0][0] = -2.0 * p.x_uu * u.abs() / m[0];
    j[0][1] = p.mass * r / m[0];
    j[0][2] = p.mass * v / m[0];
    j[0][6] = 1.0 / m[0];
    j[0][7] = 1.0 / m[0];
    j[1][0] = -p.mass * r / m[1];
    j[1][1] = -2.0 * p.y_vv * v.abs() / m[1];
    j[1][2] = -p.mass * u / m[1];
    j[2][2] = -2.0 * p.n_rr * r.abs() / m[5];
    j[2][6] = -p.l2 / m[5];
    j[2][7] = p.l2 / m[5];
    j[3][0] = c;
    j[3][1] = -s;
    j[3][5] = -u * s - v * c;
    j[4][0] = s;
    j[4][1] = c;
    j[4][5] = u * c - v * s;
    j[5][2] = 1.0;
    j
}

/// One RK4 step of the horizontal model. The heading is not wrapped so that
/// predictions stay continuous.
pub fn step_horizontal(p: &VehicleParams, s: &HorizontalState, tl: f64, tr: f64, dt: f64) -> HorizontalState {
    let x0 = s.to_array();
    let k1 = horizontal_rates(p, &x0, tl, tr);
    let x1 = add_scaled(&x0, 0.5 * dt, &k1);
    let k2 = horizontal_rates(p, &x1, tl, tr);
    let x2 = add_scaled(&x0, 0.5 * dt, &k2);
    let k3 = horizontal_rates(p, &x2, tl, tr);
    let x3 = add_scaled(&x0, dt, &k3);
    let k4 = horizontal_rates(p, &x3, tl, tr);
    let mut out = x0;
    for i in 0..6 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    HorizontalState::from_array(&out)
}

/// RK4 step plus its exact Jacobian with respect to `[state, tl, tr]`.
pub fn step_horizontal_with_jacobian(
    p: &VehicleParams,
    s: &HorizontalState,
    tl: f64,
    tr: f64,
    dt: f64,
) -> (HorizontalState, HorizontalJacobian) {
    let x0 = s.to_array();
    let k1 = horizontal_rates(p, &x0, tl, tr);
    let a1 = jacobian_at(p, &x0);
    let x1 = add_scaled(&x0, 0.5 * dt, &k1);
    let k2 = horizontal_rates(p, &x1, tl, tr);
    let a2 = jacobian_at(p, &x1);
    let x2 = add_scaled(&x0, 0.5 * dt, &k2);
    let k3 = horizontal_rates(p, &x2, tl, tr);
    let a3 = jacobian_at(p, &x2);
    let x3 = add_scaled(&x0, dt, &k3);
    let k4 = horizontal_rates(p, &x3, tl, tr);
    let a4 = jacobian_at(p, &x3);

    // Sensitivities of each stage slope with respect to [x0, tl, tr].
    let identity = {
        let mut e = [[0.0; 8]; 6];
        for (i, row) in e.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        e
    };
    let stage = |a: &HorizontalJacobian, dx: &[[f64; 8]; 6]| {
        let mut dk = [[0.0; 8]; 6];
        for i in 0..6 {
            for j in 0..8 {
                let mut acc = if j >= 6 { a[i][j] } else { 0.0 };
                for l in 0..6 {
                    acc += a[i][l] * dx[l][j];
                }
                dk[i][j] = acc;
            }
        }
        dk
    };
    let shift = |h: f64, dk: &[[f64; 8]; 6]| {
        let mut dx = identity;
        for i in 0..6 {
            for j in 0..8 {
                dx[i][j] += h * dk[i][j];
            }
        }
        dx
    };
    let dk1 = stage(&a1, &identity);
    let dk2 = stage(&a2, &shift(0.5 * dt, &dk1));
    let dk3 = stage(&a3, &shift(0.5 * dt, &dk2));
    let dk4 = stage(&a4, &shift(dt, &dk3));

    let mut out = x0;
    let mut jac = identity;
    for i in 0..6 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        for j in 0..8 {
            jac[i][j] += dt / 6.0 * (dk1[i][j] + 2.0 * dk2[i][j] + 2.0 * dk3[i][j] + dk4[i][j]);
        }
    }
    (HorizontalState::from_array(&out), jac)
}

fn add_scaled(x: &[f64; 6], a: f64, k: &[f64; 6]) -> [f64; 6] {
    let mut out = *x;
    for i in 0..6 {
        out[i] += a * k[i];
    }
    out
}

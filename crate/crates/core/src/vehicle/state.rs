use crate::math::wrap_angle;

/// Full 6-DOF state: body velocities `nu = [u, v, w, p, q, r]` and earth-fixed
/// pose `eta = [x, y, z, phi, theta, psi]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    pub nu: [f64; 6],
    pub eta: [f64; 6],
}

impl VehicleState {
    pub fn new(nu: [f64; 6], eta: [f64; 6]) -> Self {
        let mut s = VehicleState { nu, eta };
        s.wrap_angles();
        s
    }

    /// Packs `[nu, eta]` into one vector.
    pub fn to_array(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        out[..6].copy_from_slice(&self.nu);
        out[6..].copy_from_slice(&self.eta);
        out
    }

    /// Inverse of [`VehicleState::to_array`]; angles are left untouched.
    pub fn from_array(a: &[f64; 12]) -> Self {
        let mut nu = [0.0; 6];
        let mut eta = [0.0; 6];
        nu.copy_from_slice(&a[..6]);
        eta.copy_from_slice(&a[6..]);
        VehicleState { nu, eta }
    }

    pub fn wrap_angles(&mut self) {
        for i in 3..6 {
            self.eta[i] = wrap_angle(self.eta[i]);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.nu.iter().chain(self.eta.iter()).all(|x| x.is_finite())
    }

    /// Projection onto the horizontal plane.
    pub fn horizontal(&self) -> HorizontalState {
        HorizontalState { u: self.nu[0], v: self.nu[1], r: self.nu[5], x: self.eta[0], y: self.eta[1], psi: self.eta[5] }
    }

    /// Level state at zero depth built from a horizontal state.
    pub fn from_horizontal(h: &HorizontalState) -> Self {
        VehicleState::new([h.u, h.v, 0.0, 0.0, 0.0, h.r], [h.x, h.y, 0.0, 0.0, 0.0, h.psi])
    }

    pub fn depth(&self) -> f64 {
        self.eta[2]
    }
    pub fn roll(&self) -> f64 {
        self.eta[3]
    }
    pub fn pitch(&self) -> f64 {
        self.eta[4]
    }
}

/// Reduced horizontal state `[u, v, r, x, y, psi]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HorizontalState {
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl HorizontalState {
    pub fn to_array(&self) -> [f64; 6] {
        [self.u, self.v, self.r, self.x, self.y, self.psi]
    }

    pub fn from_array(a: &[f64]) -> Self {
        HorizontalState { u: a[0], v: a[1], r: a[2], x: a[3], y: a[4], psi: a[5] }
    }

    pub fn wrapped(mut self) -> Self {
        self.psi = wrap_angle(self.psi);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

/// Thruster forces in newtons; positive values push the vehicle forward
/// (horizontal pair) or downward (vertical pair).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThrustCommand {
    pub left: f64,
    pub right: f64,
    pub fore: f64,
    pub aft: f64,
}

impl ThrustCommand {
    pub fn new(left: f64, right: f64, fore: f64, aft: f64) -> Self {
        ThrustCommand { left, right, fore, aft }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.left, self.right, self.fore, self.aft]
    }

    pub fn from_array(a: &[f64]) -> Self {
        ThrustCommand { left: a[0], right: a[1], fore: a[2], aft: a[3] }
    }

    /// Clamps every thruster to `[-t_max, t_max]`. NaN demands become zero.
    pub fn saturate(&self, t_max: f64) -> Self {
        let c = |t: f64| if t.is_nan() { 0.0 } else { t.clamp(-t_max, t_max) };
        ThrustCommand { left: c(self.left), right: c(self.right), fore: c(self.fore), aft: c(self.aft) }
    }

    pub fn within(&self, t_max: f64) -> bool {
        self.to_array().iter().all(|t| t.abs() <= t_max)
    }
}

impl core::ops::Add for ThrustCommand {
    type Output = ThrustCommand;
    fn add(self, o: ThrustCommand) -> ThrustCommand {
        ThrustCommand::new(self.left + o.left, self.right + o.right, self.fore + o.fore, self.aft + o.aft)
    }
}

impl core::ops::Mul<ThrustCommand> for f64 {
    type Output = ThrustCommand;
    fn mul(self, c: ThrustCommand) -> ThrustCommand {
        ThrustCommand::new(self * c.left, self * c.right, self * c.fore, self * c.aft)
    }
}

/// Generalized body force `[X, Y, Z, K, M, N]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeneralizedForce(pub [f64; 6]);

impl GeneralizedForce {
    pub fn surge(&self) -> f64 {
        self.0[0]
    }
    pub fn heave(&self) -> f64 {
        self.0[2]
    }
    pub fn pitch(&self) -> f64 {
        self.0[4]
    }
    pub fn yaw(&self) -> f64 {
        self.0[5]
    }
}

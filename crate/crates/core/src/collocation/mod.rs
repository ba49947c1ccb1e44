//! Trapezoidal direct collocation of minimum-energy transfer problems.
//!
//! A [`CollocationModel`] supplies continuous dynamics and a separable stage
//! power; [`OcpSpec`] fixes the boundary conditions and the mesh. The
//! transcription keeps every node state and control plus, for free-time
//! problems, the total duration as decision variables, and hands the result
//! to the interior-point solver in [`crate::nlp`].

mod horizontal;
mod models;
mod transcription;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::nlp::NlpError;

pub use horizontal::{
    axis_energy, initial_guess, lift_to_six_dof, solve_horizontal, solve_six_dof, DcSolution, HorizontalOcp, DEFAULT_INTERVALS,
};
pub use models::{HorizontalModel, SixDofModel, SurgeModel, POWER_SMOOTHING};
pub use transcription::{solve_ocp, OcpSolution, Transcription};

/// Continuous-time dynamics `x' = f(x, u)` with a separable stage power.
pub trait CollocationModel {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;

    /// Writes `f(x, u)` into `out`.
    fn rates(&self, x: &[f64], u: &[f64], out: &mut [f64]);

    /// Row-major `nx x (nx + nu)` Jacobian of [`rates`](Self::rates).
    fn rates_jacobian(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        fd_jacobian(self, x, u, out);
    }

    /// Dense, row-major `nz x nz` Hessian of `sum_i mu_i f_i(x, u)` where
    /// `nz = nx + nu`.
    fn rates_hessian(&self, x: &[f64], u: &[f64], mu: &[f64], out: &mut [f64]) {
        fd_hessian(self, x, u, mu, out);
    }

    /// Instantaneous power drawn by the controls.
    fn stage_power(&self, u: &[f64]) -> f64;
    fn stage_power_gradient(&self, u: &[f64], out: &mut [f64]);
    /// Diagonal of the stage-power Hessian.
    fn stage_power_curvature(&self, u: &[f64], out: &mut [f64]);

    /// Constant power drawn regardless of the controls.
    fn hotel_power(&self) -> f64 {
        0.0
    }

    fn control_bounds(&self, lo: &mut [f64], hi: &mut [f64]);

    /// Box on the states; entries default to unbounded.
    fn state_bounds(&self, _lo: &mut [f64], _hi: &mut [f64]) {}

    fn state_scale(&self, out: &mut [f64]) {
        out.fill(1.0);
    }

    fn control_scale(&self, out: &mut [f64]) {
        out.fill(1.0);
    }
}

fn fd_jacobian<M: CollocationModel + ?Sized>(m: &M, x: &[f64], u: &[f64], out: &mut [f64]) {
    let nx = m.state_dim();
    let nz = nx + m.control_dim();
    let mut z: Vec<f64> = x.iter().chain(u.iter()).copied().collect();
    let mut fp = vec![0.0; nx];
    let mut fm = vec![0.0; nx];
    for j in 0..nz {
        let orig = z[j];
        let h = 1e-6 * orig.abs().max(1.0);
        z[j] = orig + h;
        m.rates(&z[..nx], &z[nx..], &mut fp);
        z[j] = orig - h;
        m.rates(&z[..nx], &z[nx..], &mut fm);
        z[j] = orig;
        for i in 0..nx {
            out[i * nz + j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
}

fn fd_hessian<M: CollocationModel + ?Sized>(m: &M, x: &[f64], u: &[f64], mu: &[f64], out: &mut [f64]) {
    let nx = m.state_dim();
    let nz = nx + m.control_dim();
    let mut z: Vec<f64> = x.iter().chain(u.iter()).copied().collect();
    let mut f = vec![0.0; nx];
    let mut phi = |z: &[f64]| {
        m.rates(&z[..nx], &z[nx..], &mut f);
        f.iter().zip(mu).map(|(a, b)| a * b).sum::<f64>()
    };
    let step: Vec<f64> = z.iter().map(|v| 1e-4 * v.abs().max(1.0)).collect();
    let base = phi(&z);
    for i in 0..nz {
        for j in 0..=i {
            let (hi, hj) = (step[i], step[j]);
            let v = if i == j {
                let orig = z[i];
                z[i] = orig + hi;
                let p = phi(&z);
                z[i] = orig - hi;
                let q = phi(&z);
                z[i] = orig;
                (p - 2.0 * base + q) / (hi * hi)
            } else {
                let (oi, oj) = (z[i], z[j]);
                let mut eval = |si: f64, sj: f64| {
                    z[i] = oi + si * hi;
                    z[j] = oj + sj * hj;
                    let r = phi(&z);
                    z[i] = oi;
                    z[j] = oj;
                    r
                };
                (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * hi * hj)
            };
            out[i * nz + j] = v;
            out[j * nz + i] = v;
        }
    }
}

/// Terminal condition on the last mesh node.
#[derive(Debug, Clone, PartialEq)]
pub enum Terminal {
    /// Planar disc `(x_ix - cx)^2 + (x_iy - cy)^2 <= radius^2`.
    Disc { ix: usize, iy: usize, center: (f64, f64), radius: f64 },
    /// Selected state components pinned to given values.
    Fix(Vec<(usize, f64)>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FinalTime {
    Fixed(f64),
    /// Free duration with bounds `[lo, hi]` (s).
    Free {
        lo: f64,
        hi: f64,
    },
}

/// Boundary conditions and mesh of an optimal-control problem.
#[derive(Debug, Clone, PartialEq)]
pub struct OcpSpec {
    pub initial: Vec<f64>,
    pub terminal: Terminal,
    /// Number of mesh intervals.
    pub intervals: usize,
    pub final_time: FinalTime,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OcpError {
    #[error("invalid problem: {0}")]
    Spec(String),
    #[error(transparent)]
    Solver(#[from] NlpError),
}

/// States and controls on a uniform mesh over `[0, final_time]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeshTrajectory {
    pub final_time: f64,
    pub states: Vec<Vec<f64>>,
    pub controls: Vec<Vec<f64>>,
}

impl MeshTrajectory {
    pub fn intervals(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn step(&self) -> f64 {
        self.final_time / self.intervals().max(1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.states.len()).map(|k| k as f64 * h).collect()
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.intervals();
        if n == 0 {
            return (0, 0.0);
        }
        let s = (t / self.step()).clamp(0.0, n as f64);
        let k = (s.floor() as usize).min(n - 1);
        (k, s - k as f64)
    }

    /// Piecewise-linear control at time `t` (clamped to the mesh).
    pub fn control_at(&self, t: f64) -> Vec<f64> {
        lerp_rows(&self.controls, self.locate(t))
    }

    pub fn state_at(&self, t: f64) -> Vec<f64> {
        lerp_rows(&self.states, self.locate(t))
    }

    /// Linear resampling onto `intervals` uniform intervals.
    pub fn resample(&self, intervals: usize) -> MeshTrajectory {
        let h = self.final_time / intervals as f64;
        let mut out = MeshTrajectory { final_time: self.final_time, ..Default::default() };
        for k in 0..=intervals {
            let t = k as f64 * h;
            out.states.push(self.state_at(t));
            out.controls.push(self.control_at(t));
        }
        out
    }

    /// Trapezoidal quadrature of `f(control)` over the mesh.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let h = self.step();
        let n = self.controls.len();
        let mut acc = 0.0;
        for (k, u) in self.controls.iter().enumerate() {
            let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
            acc += w * f(u);
        }
        acc * h
    }
}

fn lerp_rows(rows: &[Vec<f64>], (k, a): (usize, f64)) -> Vec<f64> {
    if rows.len() < 2 {
        return rows.first().cloned().unwrap_or_default();
    }
    rows[k].iter().zip(&rows[k + 1]).map(|(p, q)| p + a * (q - p)).collect()
}

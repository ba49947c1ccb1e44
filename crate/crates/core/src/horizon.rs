//! Shared receding-horizon machinery: RK4 rollout of the horizontal model
//! under piecewise-constant thrusts and reverse-mode gradients.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::vehicle::{step_horizontal_with_jacobian, HorizontalJacobian, HorizontalState, VehicleParams};

/// Discretization of a horizon: `steps` control intervals of `dt` seconds,
/// each integrated with RK4 substeps of (at most) `sim_dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonGrid {
    pub steps: usize,
    pub dt: f64,
    pub sim_dt: f64,
}

impl HorizonGrid {
    pub fn substeps(&self) -> usize {
        ((self.dt / self.sim_dt).round() as usize).max(1)
    }

    pub fn duration(&self) -> f64 {
        self.steps as f64 * self.dt
    }
}

/// States at the horizon nodes plus the per-substep Jacobians needed for
/// the adjoint pass. `controls` is `[tl_0, tr_0, tl_1, tr_1, ...]`.
#[derive(Debug, Clone)]
pub struct Rollout {
    pub nodes: Vec<HorizontalState>,
    jacobians: Vec<HorizontalJacobian>,
    substeps: usize,
}

impl Rollout {
    pub fn new(p: &VehicleParams, grid: &HorizonGrid, x0: &HorizontalState, controls: &[f64]) -> Self {
        debug_assert_eq!(controls.len(), 2 * grid.steps);
        let m = grid.substeps();
        let h = grid.dt / m as f64;
        let mut nodes = Vec::with_capacity(grid.steps + 1);
        let mut jacobians = Vec::with_capacity(grid.steps * m);
        let mut x = *x0;
        nodes.push(x);
        for k in 0..grid.steps {
            let (tl, tr) = (controls[2 * k], controls[2 * k + 1]);
            for _ in 0..m {
                let (next, j) = step_horizontal_with_jacobian(p, &x, tl, tr, h);
                jacobians.push(j);
                x = next;
            }
            nodes.push(x);
        }
        Rollout { nodes, jacobians, substeps: m }
    }

    pub fn terminal(&self) -> &HorizontalState {
        self.nodes.last().expect("rollout has at least one node")
    }

    /// Back-propagates state sensitivities into control gradients.
    ///
    /// `node_grad[k]` is the derivative of the cost with respect to node
    /// `k` (length `steps + 1`; entry 0 is ignored). The result is added to
    /// `grad`, which is laid out like the controls.
    pub fn backpropagate(&self, node_grad: &[[f64; 6]], grad: &mut [f64]) {
        let steps = self.nodes.len() - 1;
        let mut lam = node_grad[steps];
        for k in (0..steps).rev() {
            for s in (0..self.substeps).rev() {
                let j = &self.jacobians[k * self.substeps + s];
                let mut next = [0.0; 6];
                let (mut gl, mut gr) = (0.0, 0.0);
                for i in 0..6 {
                    if lam[i] == 0.0 {
                        continue;
                    }
                    for (c, slot) in next.iter_mut().enumerate() {
                        *slot += lam[i] * j[i][c];
                    }
                    gl += lam[i] * j[i][6];
                    gr += lam[i] * j[i][7];
                }
                grad[2 * k] += gl;
                grad[2 * k + 1] += gr;
                lam = next;
            }
            if k > 0 {
                for i in 0..6 {
                    lam[i] += node_grad[k][i];
                }
            }
        }
    }
}

/// Warm start for the next sample: drop the first interval and repeat the
/// last one.
pub fn shift_controls(prev: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(prev.len());
    if prev.len() >= 2 {
        out.extend_from_slice(&prev[2..]);
        out.extend_from_slice(&prev[prev.len() - 2..]);
    } else {
        out.extend_from_slice(prev);
    }
    out
}

/// Equal thrust pair balancing quadratic surge drag at speed `u`.
pub fn drag_balanced_thrust(p: &VehicleParams, u: f64) -> f64 {
    (0.5 * p.x_uu * u.abs() * u).clamp(-p.t_max, p.t_max)
}

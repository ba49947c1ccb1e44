//! Projected BFGS for small box-constrained problems.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QnOptions {
    pub max_iter: usize,
    /// Stop when the projected gradient, divided by `max(1, |f|)`, falls
    /// below this in the infinity norm.
    pub grad_tol: f64,
}

impl Default for QnOptions {
    fn default() -> Self {
        Self { max_iter: 200, grad_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QnResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lo[i], hi[i]);
    }
}

/// Infinity norm of `P(x - g) - x`.
pub fn projected_gradient_norm(x: &[f64], g: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let mut m = 0.0f64;
    for i in 0..x.len() {
        m = m.max(((x[i] - g[i]).clamp(lo[i], hi[i]) - x[i]).abs());
    }
    m
}

/// Minimizes `f` over the box `[lo, hi]` starting from `x0`.
///
/// `f(x, grad)` returns the objective and writes its gradient; a non-finite
/// value marks `x` as unusable and makes the line search back off. The
/// search direction is the BFGS step restricted to the variables that are
/// not pinned at a bound with the gradient pushing outward.
pub fn minimize_box<F>(mut f: F, x0: &[f64], lo: &[f64], hi: &[f64], opts: &QnOptions) -> QnResult
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lo, hi);
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut evaluations = 1;
    let mut h = identity(n);
    let mut fresh = true;
    let mut xt = vec![0.0; n];
    let mut gt = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if !fx.is_finite() {
            break;
        }
        if projected_gradient_norm(&x, &g, lo, hi) <= opts.grad_tol * fx.abs().max(1.0) {
            converged = true;
            break;
        }
        iterations += 1;
        let free: Vec<bool> = (0..n).map(|i| !((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0))).collect();
        for i in 0..n {
            d[i] = 0.0;
            if free[i] {
                for j in 0..n {
                    if free[j] {
                        d[i] -= h[i * n + j] * g[j];
                    }
                }
            }
        }
        let mut slope: f64 = (0..n).map(|i| d[i] * g[i]).sum();
        if !(slope < 0.0) {
            h = identity(n);
            fresh = true;
            for i in 0..n {
                d[i] = if free[i] { -g[i] } else { 0.0 };
            }
            slope = (0..n).map(|i| d[i] * g[i]).sum();
            if !(slope < 0.0) {
                break;
            }
        }
        if fresh {
            // First step or after a reset: size it so the largest move is modest.
            let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if dmax > 1.0 {
                for v in d.iter_mut() {
                    *v /= dmax;
                }
            }
        }

        let mut alpha = 1.0;
        let mut accepted = false;
        let mut ft = fx;
        for _ in 0..40 {
            for i in 0..n {
                xt[i] = x[i] + alpha * d[i];
            }
            project(&mut xt, lo, hi);
            ft = f(&xt, &mut gt);
            evaluations += 1;
            let decrease: f64 = (0..n).map(|i| g[i] * (xt[i] - x[i])).sum();
            if ft.is_finite() && ft <= fx + 1e-4 * decrease.min(0.0) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            if fresh {
                break;
            }
            h = identity(n);
            fresh = true;
            continue;
        }

        let s: Vec<f64> = (0..n).map(|i| xt[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| gt[i] - g[i]).collect();
        let sy: f64 = (0..n).map(|i| s[i] * y[i]).sum();
        let ss: f64 = s.iter().map(|v| v * v).sum();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        if sy > 1e-12 * (ss * yy).sqrt() && sy > 0.0 {
            if fresh {
                let scale = sy / yy;
                for v in h.iter_mut() {
                    *v *= scale;
                }
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }
        let step = ss.sqrt();
        core::mem::swap(&mut x, &mut xt);
        core::mem::swap(&mut g, &mut gt);
        fx = ft;
        if step <= 1e-14 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
            break;
        }
    }
    QnResult { x, value: fx, gradient: g, iterations, evaluations, converged }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

/// Inverse-Hessian BFGS update `H <- (I - r s y^T) H (I - r y s^T) + r s s^T`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let r = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
    let yhy: f64 = (0..n).map(|i| y[i] * hy[i]).sum();
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -r * (hy[i] * s[j] + s[i] * hy[j]) + (r * r * yhy + r) * s[i] * s[j];
        }
    }
}

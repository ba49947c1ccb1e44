//! Sparse nonlinear programming.
//!
//! Problems are stated as
//!
//! ```text
//! min f(x)  s.t.  c(x) = 0,  lo <= x <= hi
//! ```
//!
//! and solved by [`solve`], a primal-dual interior-point method whose Newton
//! systems are factored with a banded LU. Each problem describes a KKT
//! ordering that keeps the system banded; a handful of "border" indices
//! that couple globally (such as a free final time) are eliminated through
//! a small Schur complement.

mod banded;
mod ipm;

pub use banded::{BandedLu, BandedMatrix, BorderedLu, BorderedSystem, DenseLu, Singular};
pub use ipm::solve;

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

/// One entry of a sparse matrix, duplicates are summed.
pub type Triplet = (usize, usize, f64);

/// A row or column of the KKT matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KktIndex {
    Var(usize),
    Con(usize),
}

/// Ordering of the KKT system. Every variable and constraint must appear
/// exactly once, either in `band_order` or in `border`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KktLayout {
    pub band_order: Vec<KktIndex>,
    pub border: Vec<KktIndex>,
}

impl KktLayout {
    /// Variables first, then constraints; dense but always valid.
    pub fn natural(n: usize, m: usize) -> Self {
        let mut band_order: Vec<KktIndex> = (0..n).map(KktIndex::Var).collect();
        band_order.extend((0..m).map(KktIndex::Con));
        KktLayout { band_order, border: Vec::new() }
    }
}

/// A smooth NLP with equality constraints and simple bounds.
pub trait Nlp {
    fn num_vars(&self) -> usize;
    fn num_cons(&self) -> usize;
    /// Variable bounds; use infinities for free directions.
    fn bounds(&self, lo: &mut [f64], hi: &mut [f64]);
    fn objective(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
    fn constraints(&self, x: &[f64], c: &mut [f64]);
    /// Constraint Jacobian as `(row, col, value)` triplets.
    fn jacobian(&self, x: &[f64], out: &mut Vec<Triplet>);
    /// Lower triangle (`row >= col`) of `obj_factor * H_f + sum lambda_i H_ci`.
    fn hessian(&self, x: &[f64], obj_factor: f64, lambda: &[f64], out: &mut Vec<Triplet>);

    fn kkt_layout(&self) -> KktLayout {
        KktLayout::natural(self.num_vars(), self.num_cons())
    }
    /// Typical magnitude of each variable; the solver works on `x / scale`.
    fn var_scaling(&self) -> Vec<f64> {
        vec![1.0; self.num_vars()]
    }
    /// Typical magnitude of each constraint residual.
    fn con_scaling(&self) -> Vec<f64> {
        vec![1.0; self.num_cons()]
    }
}

/// Scaled primal-dual point used to warm start a related solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DualPoint {
    pub lambda: Vec<f64>,
    pub z_lower: Vec<f64>,
    pub z_upper: Vec<f64>,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Tolerance on the scaled dual infeasibility and complementarity.
    pub tol: f64,
    /// Tolerance on the scaled constraint violation (inf-norm).
    pub constr_viol_tol: f64,
    pub max_iter: usize,
    pub mu_init: f64,
    pub bound_push: f64,
    /// Duals from a previous solve of a neighbouring problem.
    pub warm_start: Option<DualPoint>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, constr_viol_tol: 1e-8, max_iter: 500, mu_init: 0.1, bound_push: 1e-2, warm_start: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NlpSolution {
    /// Decision vector in problem units.
    pub x: Vec<f64>,
    /// Constraint multipliers in problem units (`L = f + lambda . c`).
    pub lambda: Vec<f64>,
    pub objective: f64,
    /// Inf-norm of the scaled constraint residual.
    pub constraint_violation: f64,
    /// Scaled dual infeasibility at the returned point.
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Wall-clock solve time (s); zero without the `std` feature.
    pub solve_time: f64,
    pub duals: DualPoint,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NlpError {
    #[error("iteration limit reached after {} iterations (violation {:.3e})", .0.iterations, .0.constraint_violation)]
    MaxIterations(alloc::boxed::Box<NlpSolution>),
    #[error("line search failed at iteration {} (violation {:.3e})", .0.iterations, .0.constraint_violation)]
    LineSearchFailure(alloc::boxed::Box<NlpSolution>),
    #[error("solver stalled at an infeasible point (violation {:.3e})", .0.constraint_violation)]
    InfeasibleResult(alloc::boxed::Box<NlpSolution>),
    #[error("KKT system could not be regularized")]
    SingularKkt,
    #[error("initial point has the wrong dimension: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("inconsistent bounds on variable {index}: {lo} > {hi}")]
    InconsistentBounds { index: usize, lo: f64, hi: f64 },
    #[error("invalid KKT layout: {0}")]
    Layout(&'static str),
    #[error("problem functions returned a non-finite value at the initial point")]
    NonFinite,
}

impl NlpError {
    /// The last iterate, when the failure produced one.
    pub fn best_iterate(&self) -> Option<&NlpSolution> {
        match self {
            NlpError::MaxIterations(s) | NlpError::LineSearchFailure(s) | NlpError::InfeasibleResult(s) => Some(s),
            _ => None,
        }
    }
}

//! The collocation NLP.
//!
//! Decision vector: `[x_0, u_0, x_1, u_1, ..., x_N, u_N, T?, s?]` where `T`
//! is the free duration and `s` the slack of a disc terminal constraint.
//! Constraint rows: initial-state equalities `x_0 - x_init`, the trapezoid
//! defects, then the terminal rows.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{CollocationModel, FinalTime, MeshTrajectory, OcpError, OcpSpec, Terminal};
use crate::nlp::{self, DualPoint, KktIndex, KktLayout, Nlp, NlpError, SolverOptions, Triplet};

/// Trapezoidal transcription of `spec` for `model`.
#[derive(Debug)]
pub struct Transcription<'a, M: ?Sized> {
    model: &'a M,
    spec: &'a OcpSpec,
    nx: usize,
    nu: usize,
    nodes: usize,
    t_index: Option<usize>,
    slack_index: Option<usize>,
    n_vars: usize,
    terminal_rows: usize,
}

impl<'a, M: CollocationModel + ?Sized> Transcription<'a, M> {
    pub fn new(model: &'a M, spec: &'a OcpSpec) -> Result<Self, OcpError> {
        let nx = model.state_dim();
        let nu = model.control_dim();
        if spec.intervals < 2 {
            return Err(OcpError::Spec(format!("need at least 2 intervals, got {}", spec.intervals)));
        }
        if spec.initial.len() != nx {
            return Err(OcpError::Spec(format!("initial state has {} entries, model has {nx}", spec.initial.len())));
        }
        match spec.final_time {
            FinalTime::Fixed(t) if !(t > 0.0) => return Err(OcpError::Spec(format!("final time {t} must be positive"))),
            FinalTime::Free { lo, hi } if !(lo > 0.0 && lo <= hi) => {
                return Err(OcpError::Spec(format!("final-time bounds [{lo}, {hi}] are inconsistent")))
            }
            _ => {}
        }
        let terminal_rows = match &spec.terminal {
            Terminal::Disc { ix, iy, radius, .. } => {
                if *ix >= nx || *iy >= nx || !(*radius > 0.0) {
                    return Err(OcpError::Spec(format!("bad terminal disc (indices {ix},{iy}, radius {radius})")));
                }
                1
            }
            Terminal::Fix(pins) => {
                if let Some((i, _)) = pins.iter().find(|(i, _)| *i >= nx) {
                    return Err(OcpError::Spec(format!("terminal pin index {i} out of range")));
                }
                pins.len()
            }
        };
        let nodes = spec.intervals + 1;
        let mut n_vars = nodes * (nx + nu);
        let t_index = match spec.final_time {
            FinalTime::Free { .. } => {
                n_vars += 1;
                Some(n_vars - 1)
            }
            FinalTime::Fixed(_) => None,
        };
        let slack_index = match spec.terminal {
            Terminal::Disc { .. } => {
                n_vars += 1;
                Some(n_vars - 1)
            }
            Terminal::Fix(_) => None,
        };
        Ok(Self { model, spec, nx, nu, nodes, t_index, slack_index, n_vars, terminal_rows })
    }

    fn nz(&self) -> usize {
        self.nx + self.nu
    }

    fn node(&self, k: usize) -> usize {
        k * self.nz()
    }

    fn duration(&self, x: &[f64]) -> f64 {
        match (self.spec.final_time, self.t_index) {
            (FinalTime::Fixed(t), _) => t,
            (_, Some(i)) => x[i],
            _ => unreachable!(),
        }
    }

    fn defect_row(&self, k: usize) -> usize {
        self.nx + k * self.nx
    }

    fn terminal_row(&self) -> usize {
        self.nx + (self.nodes - 1) * self.nx
    }

    fn weight(&self, k: usize) -> f64 {
        if k == 0 || k + 1 == self.nodes {
            0.5
        } else {
            1.0
        }
    }

    /// Packs a mesh guess into a decision vector, resampling if needed.
    pub fn pack(&self, guess: &MeshTrajectory) -> Vec<f64> {
        let g = if guess.intervals() == self.spec.intervals { guess.clone() } else { guess.resample(self.spec.intervals) };
        let mut x = vec![0.0; self.n_vars];
        for k in 0..self.nodes {
            let o = self.node(k);
            x[o..o + self.nx].copy_from_slice(&g.states[k]);
            x[o + self.nx..o + self.nz()].copy_from_slice(&g.controls[k]);
        }
        if let Some(i) = self.t_index {
            x[i] = g.final_time;
        }
        if let (Some(i), Terminal::Disc { ix, iy, center, radius }) = (self.slack_index, &self.spec.terminal) {
            let o = self.node(self.nodes - 1);
            let (dx, dy) = (x[o + ix] - center.0, x[o + iy] - center.1);
            x[i] = (1.0 - (dx * dx + dy * dy) / (radius * radius)).max(0.0);
        }
        x
    }

    pub fn unpack(&self, x: &[f64]) -> MeshTrajectory {
        let mut out = MeshTrajectory { final_time: self.duration(x), ..Default::default() };
        for k in 0..self.nodes {
            let o = self.node(k);
            out.states.push(x[o..o + self.nx].to_vec());
            out.controls.push(x[o + self.nx..o + self.nz()].to_vec());
        }
        out
    }

    fn node_rates(&self, x: &[f64]) -> Vec<f64> {
        let nx = self.nx;
        let mut f = vec![0.0; self.nodes * nx];
        for k in 0..self.nodes {
            let o = self.node(k);
            self.model.rates(&x[o..o + nx], &x[o + nx..o + self.nz()], &mut f[k * nx..(k + 1) * nx]);
        }
        f
    }

    /// Largest defect residual divided by the state scale.
    pub fn scaled_defect(&self, x: &[f64]) -> f64 {
        let mut c = vec![0.0; self.num_cons()];
        self.constraints(x, &mut c);
        let mut scale = vec![0.0; self.nx];
        self.model.state_scale(&mut scale);
        let mut worst = 0.0f64;
        for k in 0..self.nodes - 1 {
            for i in 0..self.nx {
                worst = worst.max((c[self.defect_row(k) + i] / scale[i]).abs());
            }
        }
        worst
    }
}

impl<M: CollocationModel + ?Sized> Nlp for Transcription<'_, M> {
    fn num_vars(&self) -> usize {
        self.n_vars
    }

    fn num_cons(&self) -> usize {
        self.nx * self.nodes + self.terminal_rows
    }

    fn bounds(&self, lo: &mut [f64], hi: &mut [f64]) {
        let (nx, nu) = (self.nx, self.nu);
        let mut xl = vec![f64::NEG_INFINITY; nx];
        let mut xh = vec![f64::INFINITY; nx];
        self.model.state_bounds(&mut xl, &mut xh);
        let mut ul = vec![f64::NEG_INFINITY; nu];
        let mut uh = vec![f64::INFINITY; nu];
        self.model.control_bounds(&mut ul, &mut uh);
        for k in 0..self.nodes {
            let o = self.node(k);
            lo[o..o + nx].copy_from_slice(&xl);
            hi[o..o + nx].copy_from_slice(&xh);
            lo[o + nx..o + nx + nu].copy_from_slice(&ul);
            hi[o + nx..o + nx + nu].copy_from_slice(&uh);
        }
        if let (Some(i), FinalTime::Free { lo: a, hi: b }) = (self.t_index, self.spec.final_time) {
            lo[i] = a;
            hi[i] = b;
        }
        if let Some(i) = self.slack_index {
            lo[i] = 0.0;
            hi[i] = f64::INFINITY;
        }
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let t = self.duration(x);
        let h = t / (self.nodes - 1) as f64;
        let mut acc = 0.0;
        for k in 0..self.nodes {
            let o = self.node(k) + self.nx;
            acc += self.weight(k) * self.model.stage_power(&x[o..o + self.nu]);
        }
        h * acc + self.model.hotel_power() * t
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        g.fill(0.0);
        let n = (self.nodes - 1) as f64;
        let h = self.duration(x) / n;
        let mut gu = vec![0.0; self.nu];
        let mut sum = 0.0;
        for k in 0..self.nodes {
            let o = self.node(k) + self.nx;
            let u = &x[o..o + self.nu];
            let w = self.weight(k);
            self.model.stage_power_gradient(u, &mut gu);
            for j in 0..self.nu {
                g[o + j] = h * w * gu[j];
            }
            sum += w * self.model.stage_power(u);
        }
        if let Some(i) = self.t_index {
            g[i] = sum / n + self.model.hotel_power();
        }
    }

    fn constraints(&self, x: &[f64], c: &mut [f64]) {
        let nx = self.nx;
        let h = self.duration(x) / (self.nodes - 1) as f64;
        let f = self.node_rates(x);
        for i in 0..nx {
            c[i] = x[i] - self.spec.initial[i];
        }
        for k in 0..self.nodes - 1 {
            let (a, b) = (self.node(k), self.node(k + 1));
            let r = self.defect_row(k);
            for i in 0..nx {
                c[r + i] = x[b + i] - x[a + i] - 0.5 * h * (f[k * nx + i] + f[(k + 1) * nx + i]);
            }
        }
        let r = self.terminal_row();
        let o = self.node(self.nodes - 1);
        match &self.spec.terminal {
            Terminal::Disc { ix, iy, center, radius } => {
                let (dx, dy) = (x[o + ix] - center.0, x[o + iy] - center.1);
                c[r] = (dx * dx + dy * dy) / (radius * radius) - 1.0 + x[self.slack_index.unwrap()];
            }
            Terminal::Fix(pins) => {
                for (j, (i, v)) in pins.iter().enumerate() {
                    c[r + j] = x[o + i] - v;
                }
            }
        }
    }

    fn jacobian(&self, x: &[f64], out: &mut Vec<Triplet>) {
        let (nx, nz) = (self.nx, self.nz());
        let n = (self.nodes - 1) as f64;
        let h = self.duration(x) / n;
        let f = self.node_rates(x);
        let mut jac = vec![0.0; self.nodes * nx * nz];
        for k in 0..self.nodes {
            let o = self.node(k);
            self.model.rates_jacobian(&x[o..o + nx], &x[o + nx..o + nz], &mut jac[k * nx * nz..(k + 1) * nx * nz]);
        }
        for i in 0..nx {
            out.push((i, i, 1.0));
        }
        for k in 0..self.nodes - 1 {
            let r = self.defect_row(k);
            for (node, sign) in [(k, -1.0), (k + 1, 1.0)] {
                let o = self.node(node);
                let a = &jac[node * nx * nz..(node + 1) * nx * nz];
                for i in 0..nx {
                    for j in 0..nz {
                        let mut v = -0.5 * h * a[i * nz + j];
                        if j == i {
                            v += sign;
                        }
                        if v != 0.0 || j == i {
                            out.push((r + i, o + j, v));
                        }
                    }
                }
            }
            if let Some(ti) = self.t_index {
                for i in 0..nx {
                    out.push((r + i, ti, -0.5 / n * (f[k * nx + i] + f[(k + 1) * nx + i])));
                }
            }
        }
        let r = self.terminal_row();
        let o = self.node(self.nodes - 1);
        match &self.spec.terminal {
            Terminal::Disc { ix, iy, center, radius } => {
                let r2 = radius * radius;
                out.push((r, o + ix, 2.0 * (x[o + ix] - center.0) / r2));
                out.push((r, o + iy, 2.0 * (x[o + iy] - center.1) / r2));
                out.push((r, self.slack_index.unwrap(), 1.0));
            }
            Terminal::Fix(pins) => {
                for (j, (i, _)) in pins.iter().enumerate() {
                    out.push((r + j, o + i, 1.0));
                }
            }
        }
    }

    fn hessian(&self, x: &[f64], obj_factor: f64, lambda: &[f64], out: &mut Vec<Triplet>) {
        let (nx, nu, nz) = (self.nx, self.nu, self.nz());
        let n = (self.nodes - 1) as f64;
        let h = self.duration(x) / n;
        let mut mu = vec![0.0; nx];
        let mut hess = vec![0.0; nz * nz];
        let mut jac = vec![0.0; nx * nz];
        let mut gu = vec![0.0; nu];
        let mut cu = vec![0.0; nu];
        for k in 0..self.nodes {
            mu.fill(0.0);
            if k > 0 {
                let r = self.defect_row(k - 1);
                for i in 0..nx {
                    mu[i] += lambda[r + i];
                }
            }
            if k + 1 < self.nodes {
                let r = self.defect_row(k);
                for i in 0..nx {
                    mu[i] += lambda[r + i];
                }
            }
            let o = self.node(k);
            let (xs, us) = (&x[o..o + nx], &x[o + nx..o + nz]);
            self.model.rates_hessian(xs, us, &mu, &mut hess);
            let w = self.weight(k);
            self.model.stage_power_curvature(us, &mut cu);
            for i in 0..nz {
                for j in 0..=i {
                    let mut v = -0.5 * h * hess[i * nz + j];
                    if i == j && i >= nx {
                        v += obj_factor * h * w * cu[i - nx];
                    }
                    if v != 0.0 || i == j {
                        out.push((o + i, o + j, v));
                    }
                }
            }
            if let Some(ti) = self.t_index {
                self.model.rates_jacobian(xs, us, &mut jac);
                self.model.stage_power_gradient(us, &mut gu);
                for j in 0..nz {
                    let mut v = 0.0;
                    for i in 0..nx {
                        v -= 0.5 / n * mu[i] * jac[i * nz + j];
                    }
                    if j >= nx {
                        v += obj_factor * w * gu[j - nx] / n;
                    }
                    if v != 0.0 {
                        out.push((ti, o + j, v));
                    }
                }
            }
        }
        if let Terminal::Disc { ix, iy, radius, .. } = &self.spec.terminal {
            let o = self.node(self.nodes - 1);
            let l = lambda[self.terminal_row()] * 2.0 / (radius * radius);
            out.push((o + ix, o + ix, l));
            out.push((o + iy, o + iy, l));
        }
    }

    fn kkt_layout(&self) -> KktLayout {
        let mut band = Vec::with_capacity(self.n_vars + self.num_cons());
        for i in 0..self.nx {
            band.push(KktIndex::Con(i));
        }
        for k in 0..self.nodes {
            let o = self.node(k);
            for j in 0..self.nz() {
                band.push(KktIndex::Var(o + j));
            }
            if k + 1 < self.nodes {
                let r = self.defect_row(k);
                for i in 0..self.nx {
                    band.push(KktIndex::Con(r + i));
                }
            }
        }
        let r = self.terminal_row();
        for j in 0..self.terminal_rows {
            band.push(KktIndex::Con(r + j));
        }
        if let Some(i) = self.slack_index {
            band.push(KktIndex::Var(i));
        }
        let border = self.t_index.map(KktIndex::Var).into_iter().collect();
        KktLayout { band_order: band, border }
    }

    fn var_scaling(&self) -> Vec<f64> {
        let mut s = vec![1.0; self.n_vars];
        let mut xs = vec![1.0; self.nx];
        let mut us = vec![1.0; self.nu];
        self.model.state_scale(&mut xs);
        self.model.control_scale(&mut us);
        for k in 0..self.nodes {
            let o = self.node(k);
            s[o..o + self.nx].copy_from_slice(&xs);
            s[o + self.nx..o + self.nz()].copy_from_slice(&us);
        }
        if let (Some(i), FinalTime::Free { lo, hi }) = (self.t_index, self.spec.final_time) {
            s[i] = (lo * hi).sqrt();
        }
        s
    }

    fn con_scaling(&self) -> Vec<f64> {
        let mut s = vec![1.0; self.num_cons()];
        let mut xs = vec![1.0; self.nx];
        self.model.state_scale(&mut xs);
        for k in 0..self.nodes {
            for i in 0..self.nx {
                s[k * self.nx + i] = xs[i];
            }
        }
        if let Terminal::Fix(pins) = &self.spec.terminal {
            let r = self.terminal_row();
            for (j, (i, _)) in pins.iter().enumerate() {
                s[r + j] = xs[*i];
            }
        }
        s
    }
}

/// A solved collocation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct OcpSolution {
    pub mesh: MeshTrajectory,
    /// Optimal energy (J).
    pub objective: f64,
    /// Sensitivity of the optimal energy to the initial state.
    pub initial_state_gradient: Vec<f64>,
    /// Largest defect residual in scaled units.
    pub scaled_defect: f64,
    pub iterations: usize,
    pub solve_time: f64,
    pub duals: DualPoint,
}

/// Transcribes and solves one problem from `guess`.
pub fn solve_ocp<M: CollocationModel + ?Sized>(
    model: &M,
    spec: &OcpSpec,
    guess: &MeshTrajectory,
    opts: &SolverOptions,
) -> Result<OcpSolution, OcpError> {
    let tr = Transcription::new(model, spec)?;
    if guess.states.is_empty() || guess.states.iter().any(|s| s.len() != tr.nx) || guess.controls.iter().any(|u| u.len() != tr.nu)
    {
        return Err(OcpError::Spec(format!("guess does not match model dimensions ({} states, {} controls)", tr.nx, tr.nu)));
    }
    let x0 = tr.pack(guess);
    let sol = nlp::solve(&tr, &x0, opts)?;
    if !sol.converged {
        return Err(OcpError::Solver(NlpError::MaxIterations(alloc::boxed::Box::new(sol))));
    }
    Ok(OcpSolution {
        mesh: tr.unpack(&sol.x),
        objective: sol.objective,
        initial_state_gradient: sol.lambda[..tr.nx].iter().map(|l| -l).collect(),
        scaled_defect: tr.scaled_defect(&sol.x),
        iterations: sol.iterations,
        solve_time: sol.solve_time,
        duals: sol.duals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collocation::{HorizontalModel, SurgeModel};
    use crate::VehicleParams;

    /// Dense derivative check of a transcription against central differences.
    fn check_derivatives<N: Nlp>(nlp: &N, x: &[f64], lambda: &[f64], tol: f64) {
        let n = nlp.num_vars();
        let m = nlp.num_cons();
        let mut g = vec![0.0; n];
        nlp.gradient(x, &mut g);
        let mut jt = Vec::new();
        nlp.jacobian(x, &mut jt);
        let mut jac = vec![0.0; m * n];
        for (r, c, v) in jt {
            jac[r * n + c] += v;
        }
        let mut ht = Vec::new();
        nlp.hessian(x, 0.7, lambda, &mut ht);
        let mut hess = vec![0.0; n * n];
        for (r, c, v) in ht {
            assert!(r >= c, "upper-triangle entry ({r},{c})");
            hess[r * n + c] += v;
            if r != c {
                hess[c * n + r] += v;
            }
        }
        let lag_grad = |x: &[f64]| {
            let mut g = vec![0.0; n];
            nlp.gradient(x, &mut g);
            for v in g.iter_mut() {
                *v *= 0.7;
            }
            let mut jt = Vec::new();
            nlp.jacobian(x, &mut jt);
            for (r, c, v) in jt {
                g[c] += lambda[r] * v;
            }
            g
        };
        let mut xp = x.to_vec();
        let mut cp = vec![0.0; m];
        let mut cm = vec![0.0; m];
        for j in 0..n {
            let h = 1e-6 * x[j].abs().max(1.0);
            xp[j] = x[j] + h;
            let fp = nlp.objective(&xp);
            nlp.constraints(&xp, &mut cp);
            let gp = lag_grad(&xp);
            xp[j] = x[j] - h;
            let fm = nlp.objective(&xp);
            nlp.constraints(&xp, &mut cm);
            let gm = lag_grad(&xp);
            xp[j] = x[j];
            let close = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
            let fd = (fp - fm) / (2.0 * h);
            assert!(close(fd, g[j]), "gradient {j}: fd {fd} vs {}", g[j]);
            for r in 0..m {
                let fd = (cp[r] - cm[r]) / (2.0 * h);
                assert!(close(fd, jac[r * n + j]), "jacobian ({r},{j}): fd {fd} vs {}", jac[r * n + j]);
            }
            for i in 0..n {
                let fd = (gp[i] - gm[i]) / (2.0 * h);
                assert!(close(fd, hess[i * n + j]), "hessian ({i},{j}): fd {fd} vs {}", hess[i * n + j]);
            }
        }
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn horizontal_derivatives_match_finite_differences() {
        let model = HorizontalModel { params: VehicleParams::default() };
        let spec = OcpSpec {
            initial: vec![0.1, 0.0, 0.0, 0.0, 0.0, 0.0],
            terminal: Terminal::Disc { ix: 3, iy: 4, center: (2.0, 2.0), radius: 0.05 },
            intervals: 4,
            final_time: FinalTime::Free { lo: 1.0, hi: 80.0 },
        };
        let tr = Transcription::new(&model, &spec).unwrap();
        let mut x = pseudo_random(tr.num_vars(), 7);
        for k in 0..5 {
            // keep thrusts away from the kink of |T|^1.5 at zero
            let o = tr.node(k) + 6;
            x[o] = 1.0 + x[o].abs();
            x[o + 1] = -1.0 - x[o + 1].abs();
        }
        let ti = tr.t_index.unwrap();
        x[ti] = 20.0;
        let lambda = pseudo_random(tr.num_cons(), 11);
        check_derivatives(&tr, &x, &lambda, 1e-5);
    }

    #[test]
    fn fixed_pin_derivatives_match_finite_differences() {
        let model = SurgeModel { params: VehicleParams::default() };
        let spec = OcpSpec {
            initial: vec![0.05, 0.0],
            terminal: Terminal::Fix(vec![(1, 1.0)]),
            intervals: 3,
            final_time: FinalTime::Fixed(10.0),
        };
        let tr = Transcription::new(&model, &spec).unwrap();
        let mut x = pseudo_random(tr.num_vars(), 3);
        for k in 0..4 {
            x[tr.node(k) + 2] = 0.5 + x[tr.node(k) + 2].abs();
        }
        let lambda = pseudo_random(tr.num_cons(), 5);
        check_derivatives(&tr, &x, &lambda, 1e-5);
    }

    /// `x' = u` with a constant stage power.
    struct Integrator {
        power: f64,
    }

    impl CollocationModel for Integrator {
        fn state_dim(&self) -> usize {
            1
        }
        fn control_dim(&self) -> usize {
            1
        }
        fn rates(&self, _x: &[f64], u: &[f64], out: &mut [f64]) {
            out[0] = u[0];
        }
        fn stage_power(&self, _u: &[f64]) -> f64 {
            self.power
        }
        fn stage_power_gradient(&self, _u: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
        fn stage_power_curvature(&self, _u: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
        fn control_bounds(&self, _lo: &mut [f64], _hi: &mut [f64]) {}
    }

    #[test]
    fn two_interval_defects_are_the_trapezoid_rule() {
        let model = Integrator { power: 0.0 };
        let spec = OcpSpec {
            initial: vec![0.5],
            terminal: Terminal::Fix(vec![(0, 3.0)]),
            intervals: 2,
            final_time: FinalTime::Free { lo: 0.1, hi: 10.0 },
        };
        let tr = Transcription::new(&model, &spec).unwrap();
        // [x0, u0, x1, u1, x2, u2, T]
        let x = [0.7, 1.5, 1.9, -0.4, 2.2, 0.8, 4.0];
        let mut c = vec![0.0; tr.num_cons()];
        tr.constraints(&x, &mut c);
        let h = 2.0;
        assert_eq!(c[0], 0.7 - 0.5);
        assert_eq!(c[1], 1.9 - 0.7 - 0.5 * h * (1.5 + -0.4));
        assert_eq!(c[2], 2.2 - 1.9 - 0.5 * h * (-0.4 + 0.8));
        assert_eq!(c[3], 2.2 - 3.0);
    }

    #[test]
    fn constant_power_integrates_exactly() {
        let model = Integrator { power: 1.75 };
        for intervals in [2, 7, 100] {
            let spec = OcpSpec {
                initial: vec![0.0],
                terminal: Terminal::Fix(vec![(0, 1.0)]),
                intervals,
                final_time: FinalTime::Fixed(3.2),
            };
            let tr = Transcription::new(&model, &spec).unwrap();
            let x = vec![0.3; tr.num_vars()];
            assert!((tr.objective(&x) - 1.75 * 3.2).abs() < 1e-12);
        }
    }

    /// Double integrator with effort `a^2`.
    struct DoubleIntegrator;

    impl CollocationModel for DoubleIntegrator {
        fn state_dim(&self) -> usize {
            2
        }
        fn control_dim(&self) -> usize {
            1
        }
        fn rates(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
            out[0] = x[1];
            out[1] = u[0];
        }
        fn stage_power(&self, u: &[f64]) -> f64 {
            u[0] * u[0]
        }
        fn stage_power_gradient(&self, u: &[f64], out: &mut [f64]) {
            out[0] = 2.0 * u[0];
        }
        fn stage_power_curvature(&self, _u: &[f64], out: &mut [f64]) {
            out[0] = 2.0;
        }
        fn control_bounds(&self, _lo: &mut [f64], _hi: &mut [f64]) {}
    }

    #[test]
    fn minimum_effort_double_integrator() {
        // rest-to-rest over unit distance in unit time: a = 6 - 12 t, cost 12
        let spec = OcpSpec {
            initial: vec![0.0, 0.0],
            terminal: Terminal::Fix(vec![(0, 1.0), (1, 0.0)]),
            intervals: 40,
            final_time: FinalTime::Fixed(1.0),
        };
        let guess = MeshTrajectory { final_time: 1.0, states: vec![vec![0.0, 0.0]; 41], controls: vec![vec![0.0]; 41] };
        let sol = solve_ocp(&DoubleIntegrator, &spec, &guess, &SolverOptions::default()).unwrap();
        assert!((sol.objective - 12.0).abs() < 0.12, "{}", sol.objective);
        assert!(sol.scaled_defect < 1e-6);
        // dJ/dx0 of the closed form J = 12 (1 - x0)^2 at x0 = 0 is -24
        assert!((sol.initial_state_gradient[0] + 24.0).abs() < 0.5, "{:?}", sol.initial_state_gradient);
    }

    #[test]
    fn rejects_bad_specs() {
        let model = Integrator { power: 1.0 };
        let mut spec = OcpSpec {
            initial: vec![0.0],
            terminal: Terminal::Fix(vec![(0, 1.0)]),
            intervals: 1,
            final_time: FinalTime::Fixed(1.0),
        };
        assert!(Transcription::new(&model, &spec).is_err());
        spec.intervals = 4;
        spec.final_time = FinalTime::Free { lo: 2.0, hi: 1.0 };
        assert!(Transcription::new(&model, &spec).is_err());
        spec.final_time = FinalTime::Fixed(1.0);
        spec.terminal = Terminal::Disc { ix: 3, iy: 0, center: (0.0, 0.0), radius: 1.0 };
        assert!(Transcription::new(&model, &spec).is_err());
    }
}

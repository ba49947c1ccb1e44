//! Banded LU with partial pivoting and a bordered (Schur complement) solve.
//!
//! Storage follows the LAPACK `gbtrf` layout in row form: row `i` keeps
//! columns `i - kl ..= i + ku + kl`, which leaves room for the fill created
//! by row interchanges.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

/// Raised when a pivot vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singular {
    pub column: usize,
}

#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandedMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// In-place LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandedLu, Singular> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut piv = vec![0usize; n];
        let mut mult = vec![0.0; n * kl.max(1)];
        let mut swaps = 0usize;
        let mut scale = 0.0f64;
        for v in &self.data {
            scale = scale.max(v.abs());
        }
        let tiny = f64::MIN_POSITIVE.max(scale * 1e-300);
        for j in 0..n {
            let last_row = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.data[self.idx(j, j)].abs();
            for i in j + 1..=last_row {
                let a = self.data[self.idx(i, j)].abs();
                if a > best {
                    best = a;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(Singular { column: j });
            }
            piv[j] = p;
            let last_col = (j + ku + kl).min(n - 1);
            if p != j {
                swaps += 1;
                for c in j..=last_col {
                    let a = self.idx(j, c);
                    let b = self.idx(p, c);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(j, j)];
            for i in j + 1..=last_row {
                let k = self.idx(i, j);
                let f = self.data[k] / pivot;
                self.data[k] = 0.0;
                mult[j * kl + (i - j - 1)] = f;
                if f != 0.0 {
                    for c in j + 1..=last_col {
                        let src = self.data[self.idx(j, c)];
                        let dst = self.idx(i, c);
                        self.data[dst] -= f * src;
                    }
                }
            }
        }
        let mut negative = swaps % 2 == 1;
        for j in 0..n {
            if self.data[self.idx(j, j)] < 0.0 {
                negative = !negative;
            }
        }
        Ok(BandedLu { m: self, piv, mult, det_negative: negative })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandedMatrix,
    piv: Vec<usize>,
    mult: Vec<f64>,
    det_negative: bool,
}

impl BandedLu {
    /// Whether the determinant of the factored matrix is negative.
    pub fn det_negative(&self) -> bool {
        self.det_negative
    }

    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.m.n, self.m.kl, self.m.ku);
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj != 0.0 {
                let last_row = (j + kl).min(n - 1);
                for i in j + 1..=last_row {
                    b[i] -= self.mult[j * kl + (i - j - 1)] * bj;
                }
            }
        }
        for i in (0..n).rev() {
            let last_col = (i + ku + kl).min(n - 1);
            let mut acc = b[i];
            for c in i + 1..=last_col {
                acc -= self.m.data[self.m.idx(i, c)] * b[c];
            }
            b[i] = acc / self.m.data[self.m.idx(i, i)];
        }
    }
}

/// Symmetric bordered system `[[B, C], [C^T, E]]` with banded `B` and a
/// few dense border rows/columns.
#[derive(Debug, Clone)]
pub struct BorderedSystem {
    pub band: BandedMatrix,
    /// Border columns, `k` columns of length `band.dim()`, column-major.
    pub border: Vec<f64>,
    /// Dense `k x k` corner, row-major.
    pub corner: Vec<f64>,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct BorderedLu {
    lu: BandedLu,
    c: Vec<f64>,
    w: Vec<f64>,
    schur: DenseLu,
    nb: usize,
    k: usize,
}

impl BorderedSystem {
    pub fn new(nb: usize, kl: usize, ku: usize, k: usize) -> Self {
        BorderedSystem { band: BandedMatrix::zeros(nb, kl, ku), border: vec![0.0; nb * k], corner: vec![0.0; k * k], k }
    }

    pub fn factor(self) -> Result<BorderedLu, Singular> {
        let nb = self.band.dim();
        let k = self.k;
        let lu = self.band.factor()?;
        let mut w = self.border.clone();
        for col in 0..k {
            lu.solve(&mut w[col * nb..(col + 1) * nb]);
        }
        let mut s = self.corner;
        for a in 0..k {
            for b in 0..k {
                let ca = &self.border[a * nb..(a + 1) * nb];
                let wb = &w[b * nb..(b + 1) * nb];
                s[a * k + b] -= ca.iter().zip(wb).map(|(x, y)| x * y).sum::<f64>();
            }
        }
        let schur = DenseLu::factor(s, k).map_err(|e| Singular { column: nb + e.column })?;
        Ok(BorderedLu { lu, c: self.border, w, schur, nb, k })
    }
}

impl BorderedLu {
    pub fn det_negative(&self) -> bool {
        self.lu.det_negative() ^ self.schur.det_negative
    }

    /// Solves in place; `rhs` holds the band part followed by the border part.
    pub fn solve(&self, rhs: &mut [f64]) {
        let (nb, k) = (self.nb, self.k);
        let (r1, r2) = rhs.split_at_mut(nb);
        self.lu.solve(r1);
        for a in 0..k {
            let ca = &self.c[a * nb..(a + 1) * nb];
            r2[a] -= ca.iter().zip(r1.iter()).map(|(x, y)| x * y).sum::<f64>();
        }
        self.schur.solve(r2);
        for b in 0..k {
            let wb = &self.w[b * nb..(b + 1) * nb];
            let zb = r2[b];
            for (x, wv) in r1.iter_mut().zip(wb) {
                *x -= wv * zb;
            }
        }
    }
}

/// Small dense LU with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu {
    a: Vec<f64>,
    n: usize,
    piv: Vec<usize>,
    pub det_negative: bool,
}

impl DenseLu {
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self, Singular> {
        let mut piv = vec![0; n];
        let mut negative = false;
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for j in 0..n {
            let mut p = j;
            for i in j + 1..n {
                if a[i * n + j].abs() > a[p * n + j].abs() {
                    p = i;
                }
            }
            if !(a[p * n + j].abs() > f64::MIN_POSITIVE.max(scale * 1e-300)) {
                return Err(Singular { column: j });
            }
            piv[j] = p;
            if p != j {
                negative = !negative;
                for c in 0..n {
                    a.swap(j * n + c, p * n + c);
                }
            }
            let d = a[j * n + j];
            if d < 0.0 {
                negative = !negative;
            }
            for i in j + 1..n {
                let f = a[i * n + j] / d;
                a[i * n + j] = f;
                for c in j + 1..n {
                    a[i * n + c] -= f * a[j * n + c];
                }
            }
        }
        Ok(DenseLu { a, n, piv, det_negative: negative })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for j in 0..n {
            b.swap(j, self.piv[j]);
        }
        for i in 0..n {
            for c in 0..i {
                b[i] -= self.a[i * n + c] * b[c];
            }
        }
        for i in (0..n).rev() {
            for c in i + 1..n {
                b[i] -= self.a[i * n + c] * b[c];
            }
            b[i] /= self.a[i * n + i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for j in 0..n {
            let p = (j..n).max_by(|&x, &y| a[x][j].abs().partial_cmp(&a[y][j].abs()).unwrap()).unwrap();
            a.swap(j, p);
            b.swap(j, p);
            for i in j + 1..n {
                let f = a[i][j] / a[j][j];
                for c in j..n {
                    a[i][c] -= f * a[j][c];
                }
                b[i] -= f * b[j];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = b[i];
            for c in i + 1..n {
                acc -= a[i][c] * x[c];
            }
            x[i] = acc / a[i][i];
        }
        x
    }

    proptest! {
        #[test]
        fn banded_lu_matches_dense_elimination(
            n in 3usize..25,
            kl in 0usize..4,
            ku in 0usize..4,
            seed in proptest::collection::vec(-1.0f64..1.0, 25 * 25 + 25),
        ) {
            let mut m = BandedMatrix::zeros(n, kl, ku);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if j + kl >= i && j <= i + ku {
                        // Small diagonal so that pivoting actually happens.
                        let v = seed[i * 25 + j] + if i == j { 0.05 } else { 0.0 };
                        m.add(i, j, v);
                        dense[i][j] = v;
                    }
                }
            }
            let b: Vec<f64> = seed[625..625 + n].to_vec();
            if let Ok(lu) = m.factor() {
                let mut x = b.clone();
                lu.solve(&mut x);
                // Residual check against the dense matrix.
                for i in 0..n {
                    let r: f64 = (0..n).map(|j| dense[i][j] * x[j]).sum::<f64>() - b[i];
                    prop_assert!(r.abs() < 1e-6 * (1.0 + x.iter().fold(0.0f64, |a, v| a.max(v.abs()))));
                }
                let y = dense_solve(dense.clone(), b.clone());
                let scale = y.iter().fold(1.0f64, |a, v| a.max(v.abs()));
                if scale < 1e6 {
                    for i in 0..n {
                        prop_assert!((x[i] - y[i]).abs() < 1e-6 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn determinant_sign_of_saddle_point_matrix() {
        // [[2, 1], [1, -3]] has det -7.
        let mut m = BandedMatrix::zeros(2, 1, 1);
        m.add(0, 0, 2.0);
        m.add(0, 1, 1.0);
        m.add(1, 0, 1.0);
        m.add(1, 1, -3.0);
        assert!(m.factor().unwrap().det_negative());
    }

    #[test]
    fn bordered_solve_matches_dense() {
        // Tridiagonal band plus one border variable coupled to every row.
        let nb = 6;
        let mut sys = BorderedSystem::new(nb, 1, 1, 1);
        let mut dense = vec![vec![0.0; nb + 1]; nb + 1];
        for i in 0..nb {
            let d = 3.0 + i as f64;
            sys.band.add(i, i, d);
            dense[i][i] = d;
            if i + 1 < nb {
                sys.band.add(i, i + 1, -1.0);
                sys.band.add(i + 1, i, -1.0);
                dense[i][i + 1] = -1.0;
                dense[i + 1][i] = -1.0;
            }
            let c = 0.5 * (i as f64 - 2.0);
            sys.border[i] = c;
            dense[i][nb] = c;
            dense[nb][i] = c;
        }
        sys.corner[0] = -2.0;
        dense[nb][nb] = -2.0;
        let b: Vec<f64> = (0..=nb).map(|i| 1.0 + i as f64 * 0.3).collect();
        let lu = sys.factor().unwrap();
        let mut x = b.clone();
        lu.solve(&mut x);
        let y = dense_solve(dense, b);
        for i in 0..=nb {
            assert!((x[i] - y[i]).abs() < 1e-12);
        }
    }
}

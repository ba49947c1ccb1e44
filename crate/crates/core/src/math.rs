//! Small numeric helpers shared across the crate.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let tau = 2.0 * PI;
    let mut w = a - tau * (a / tau).floor();
    if w >= tau {
        w -= tau;
    }
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Derivative of [`sinc`].
pub fn sinc_prime(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        -x / 3.0
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}

/// Infinity norm of a slice.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Result of a bounded one-dimensional minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMin {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `tol` and returns the best probe.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> ScalarMin {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc <= fd { ScalarMin { x: c, value: fc } } else { ScalarMin { x: d, value: fd } };
    let mut guard = 0;
    while (b - a) > tol && guard < 200 {
        guard += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc < best.value {
                best = ScalarMin { x: c, value: fc };
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd < best.value {
                best = ScalarMin { x: d, value: fd };
            }
        }
    }
    best
}

/// Evaluates `f` on `n` evenly spaced points (`n >= 2`) and then refines the
/// best cell with golden-section search. The result is never worse than the
/// best grid point.
pub fn grid_then_golden<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize, tol: f64) -> ScalarMin {
    debug_assert!(n >= 2 && hi >= lo);
    if hi - lo <= 0.0 {
        return ScalarMin { x: lo, value: f(lo) };
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut best_i = 0;
    let mut best = ScalarMin { x: lo, value: f64::INFINITY };
    for i in 0..n {
        let x = if i == n - 1 { hi } else { lo + step * i as f64 };
        let v = f(x);
        if v < best.value {
            best = ScalarMin { x, value: v };
            best_i = i;
        }
    }
    let a = if best_i == 0 { lo } else { lo + step * (best_i - 1) as f64 };
    let b = if best_i + 1 >= n { hi } else { lo + step * (best_i + 1) as f64 };
    let refined = golden_section(&mut f, a, b, tol);
    if refined.value < best.value {
        refined
    } else {
        best
    }
}

/// Wall-clock stopwatch. Reads zero when the `std` feature is off.
#[derive(Debug, Clone, Copy)]
pub struct Stopwatch {
    #[cfg(feature = "std")]
    start: std::time::Instant,
}

impl Stopwatch {
    pub fn start() -> Self {
        Stopwatch {
            #[cfg(feature = "std")]
            start: std::time::Instant::now(),
        }
    }

    /// Seconds since [`Stopwatch::start`].
    pub fn elapsed(&self) -> f64 {
        #[cfg(feature = "std")]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(not(feature = "std"))]
        {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_keeps_half_open_interval() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(0.3) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let m = golden_section(|x| (x - 1.3) * (x - 1.3), 0.0, 4.0, 1e-9);
        assert!((m.x - 1.3).abs() < 1e-6);
    }

    #[test]
    fn grid_then_golden_is_never_worse_than_grid() {
        // Two-well function: the grid must pick the global well.
        let f = |x: f64| (x * x - 1.0).powi(2) + 0.1 * x;
        let m = grid_then_golden(f, -2.0, 2.0, 32, 1e-10);
        for i in 0..32 {
            let x = -2.0 + 4.0 * i as f64 / 31.0;
            assert!(m.value <= f(x));
        }
        assert!(m.x < 0.0);
    }

    #[test]
    fn sinc_matches_closed_form() {
        for &x in &[1e-6, 1e-3, 0.5, 2.0] {
            assert!((sinc(x) - x.sin() / x).abs() < 1e-12);
            let h = 1e-6;
            let fd = (sinc(x + h) - sinc(x - h)) / (2.0 * h);
            assert!((sinc_prime(x) - fd).abs() < 1e-7);
        }
    }
}

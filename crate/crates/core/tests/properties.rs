//! Randomized invariants of the vehicle model and power law.

use eompc_core::vehicle::{allocate, dynamics_6dof, mass_diagonal, step, transformation_matrix};
use eompc_core::{PowerModel, ThrustCommand, VehicleParams, VehicleState};
use proptest::prelude::*;
use std::f64::consts::PI;

fn thrust() -> impl Strategy<Value = f64> {
    -7.86..7.86f64
}

fn command() -> impl Strategy<Value = ThrustCommand> {
    (thrust(), thrust(), thrust(), thrust()).prop_map(|(l, r, f, a)| ThrustCommand::new(l, r, f, a))
}

fn velocity() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(-0.5..0.5f64)
}

fn pose() -> impl Strategy<Value = [f64; 6]> {
    (prop::array::uniform3(-5.0..5.0f64), -1.5..1.5f64, -1.5..1.5f64, -PI..PI)
        .prop_map(|(p, phi, theta, psi)| [p[0], p[1], p[2], phi, theta, psi])
}

proptest! {
    #[test]
    fn allocation_is_linear(a in command(), b in command(), k in -3.0..3.0f64) {
        let p = VehicleParams::default();
        let sum = ThrustCommand::new(a.left + k * b.left, a.right + k * b.right, a.fore + k * b.fore, a.aft + k * b.aft);
        let (fa, fb, fs) = (allocate(&p, &a).0, allocate(&p, &b).0, allocate(&p, &sum).0);
        for i in 0..6 {
            prop_assert!((fs[i] - (fa[i] + k * fb[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn allocation_reproduces_the_thruster_geometry(c in command()) {
        let p = VehicleParams::default();
        let f = allocate(&p, &c).0;
        let th = c.left + c.right;
        let expected = [th, 0.0, c.fore + c.aft, 0.0, p.l3 * th + p.l1 * (c.aft - c.fore), p.l2 * (c.right - c.left)];
        for i in 0..6 {
            prop_assert!((f[i] - expected[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_block_is_orthonormal(eta in pose()) {
        let j = transformation_matrix(&eta).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let dot: f64 = (0..3).map(|k| j[k][a] * j[k][b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-9);
            }
        }
    }

    // With buoyancy equal to weight and the centre of gravity on the centre of
    // buoyancy there is no restoring force, so the kinetic energy of the
    // unforced vehicle can only be dissipated.
    #[test]
    fn unforced_dynamics_are_passive(nu in velocity(), eta in pose()) {
        let mut p = VehicleParams::default();
        p.buoyancy = p.weight;
        p.z_g = 0.0;
        let m = mass_diagonal(&p);
        let s = VehicleState::new(nu, eta);
        let acc = dynamics_6dof(&p, &s, &ThrustCommand::default());
        let power: f64 = (0..6).map(|i| m[i] * nu[i] * acc[i]).sum();
        prop_assert!(power <= 1e-12, "kinetic energy rate {power}");

        let kinetic = |s: &VehicleState| 0.5 * (0..6).map(|i| m[i] * s.nu[i] * s.nu[i]).sum::<f64>();
        let mut x = s;
        for _ in 0..50 {
            let next = step(&p, &x, &ThrustCommand::default(), 0.01).unwrap();
            prop_assert!(kinetic(&next) <= kinetic(&x) + 1e-12);
            x = next;
        }
    }

    #[test]
    fn power_law_is_even_and_increasing(t in 0.0..10.0f64, dt in 1e-6..1.0f64, kappa in 0.01..2.0f64,
                                        c in prop::array::uniform3(0.0..1.0f64)) {
        for law in [PowerModel::Propeller { kappa }, PowerModel::Polynomial { c1: c[0], c2: c[1], c3: c[2] + 1e-3 }] {
            prop_assert_eq!(law.power(t), law.power(-t));
            prop_assert!(law.power(t + dt) > law.power(t));
            prop_assert!(law.power(t) >= 0.0);
        }
    }
}

// RK4 is fourth order on a smooth stretch: a turning cruise in which no
// velocity changes sign (|x|x damping is only once differentiable at zero).
#[test]
fn rk4_is_fourth_order_on_a_turning_cruise() {
    let p = VehicleParams::default();
    let hold = 0.5 * p.net_buoyancy();
    let c = ThrustCommand::new(0.3, 0.9, hold, hold);
    let s = VehicleState::new([0.13, 0.01, 0.0, 0.0, 0.0, 0.05], [0.0, 0.0, 0.0, 0.0, 0.0, 0.3]);
    let run = |dt: f64, n: usize| {
        let mut x = s;
        for _ in 0..n {
            x = step(&p, &x, &c, dt).unwrap();
        }
        x.to_array()
    };
    let reference = run(0.0125, 160);
    let err = |a: [f64; 12]| a.iter().zip(&reference).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let (coarse, fine) = (err(run(0.4, 5)), err(run(0.2, 10)));
    assert!(fine > 0.0 && coarse / fine > 12.0, "coarse {coarse:e} fine {fine:e}");
}

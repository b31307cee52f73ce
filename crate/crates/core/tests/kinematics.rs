mod common;

use common::integrate_unicycle;
use cooploc::kinematics::{generate_fleet, step_ctrv, FleetConfig, VehiclePose, YAW_RATE_EPS};
use cooploc::numerics::numerical_rank;
use nalgebra::DMatrix;
use proptest::prelude::*;
use std::f64::consts::TAU;

#[test]
fn closed_form_matches_ode_integration() {
    let p = VehiclePose::new(0.0, 0.0, 0.0, 5.0, 0.1);
    let q = step_ctrv(&p, 1.0).unwrap();
    let (x, y, _) = integrate_unicycle(0.0, 0.0, 0.0, 5.0, 0.1, 1.0, 10_000);
    assert!((q.x - x).hypot(q.y - y) <= 1e-3);
}

#[test]
fn paper_sized_fleet() {
    let cfg = FleetConfig {
        vehicles: 20,
        ticks: 500,
        ..FleetConfig::default()
    };
    let f = generate_fleet(&cfg, 42).unwrap();
    assert_eq!(f.poses().len(), 10_000);
    assert!(f.poses().iter().all(|p| p.speed >= 0.0 && (0.0..std::f64::consts::TAU).contains(&p.heading)));
}

#[test]
fn default_fleet_windows_are_low_rank() {
    let f = generate_fleet(&FleetConfig::default(), 5).unwrap();
    let tau = 10;
    for start in (0..f.ticks() - tau).step_by(37) {
        for coord in 0..2 {
            let w = DMatrix::from_fn(f.vehicles(), tau, |i, t| {
                let p = f.pose(start + t, i);
                if coord == 0 { p.x } else { p.y }
            });
            assert!(numerical_rank(&w, 1e-6).unwrap() <= 3, "window at {start}");
        }
    }
}

proptest! {
    #[test]
    fn straight_line_is_exact(x in -1e3f64..1e3, y in -1e3f64..1e3, h in 0.0..TAU, s in 0.0f64..40.0, dt in 0.01f64..2.0) {
        let q = step_ctrv(&VehiclePose::new(x, y, h, s, 0.0), dt).unwrap();
        prop_assert_eq!(q.x, x + s * dt * h.cos());
        prop_assert_eq!(q.y, y + s * dt * h.sin());
    }

    #[test]
    fn chord_never_exceeds_arc(h in 0.0..TAU, s in 0.0f64..40.0, w in -2.0f64..2.0, dt in 0.01f64..2.0) {
        let q = step_ctrv(&VehiclePose::new(0.0, 0.0, h, s, w), dt).unwrap();
        prop_assert!(q.x.hypot(q.y) <= s * dt + 1e-9);
    }

    #[test]
    fn continuous_at_threshold(h in 0.0..TAU, s in 0.0f64..30.0, dt in 0.01f64..1.0) {
        let a = step_ctrv(&VehiclePose::new(0.0, 0.0, h, s, 0.0), dt).unwrap();
        let b = step_ctrv(&VehiclePose::new(0.0, 0.0, h, s, YAW_RATE_EPS), dt).unwrap();
        prop_assert!((a.x - b.x).hypot(a.y - b.y) <= 1e-6);
    }

    #[test]
    fn matches_unicycle_ode(h in 0.0..TAU, s in 0.0f64..30.0, w in -1.0f64..1.0, dt in 0.05f64..1.0) {
        let q = step_ctrv(&VehiclePose::new(1.0, 2.0, h, s, w), dt).unwrap();
        let (x, y, _) = integrate_unicycle(1.0, 2.0, h, s, w, dt, 2_000);
        prop_assert!((q.x - x).hypot(q.y - y) <= 1e-3);
    }
}

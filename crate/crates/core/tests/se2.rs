mod common;

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use toponav::se2::{compose, dubins_length, dubins_path, relative, se2_exp, se2_log, waypoint_distance, Pose2D, Waypoint};

use common::{oracle_distance, oracle_twist};

fn waypoint() -> impl Strategy<Value = Waypoint> {
    (-5.0..5.0f64, -5.0..5.0f64, -3.1..3.1f64).prop_map(|(x, y, t)| Waypoint::new(x, y, t))
}

fn pose() -> impl Strategy<Value = Pose2D> {
    (-5.0..5.0f64, -5.0..5.0f64, -PI..PI).prop_map(|(x, y, t)| Pose2D::new(x, y, t))
}

#[test]
fn unit_examples_match_matrix_log() {
    let a = Waypoint::new(1.0, 0.0, 0.0);
    let b = Waypoint::new(0.0, 0.0, PI / 2.0);
    assert_abs_diff_eq!(waypoint_distance(&a), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(waypoint_distance(&b), PI / 2f64.sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(waypoint_distance(&a), oracle_distance(&a), epsilon = 1e-9);
    assert_abs_diff_eq!(waypoint_distance(&b), oracle_distance(&b), epsilon = 1e-9);
}

#[test]
fn near_half_turn_matches_oracle() {
    for t in [PI - 1e-3, -(PI - 1e-3), 3.0, 1e-9, -1e-7] {
        let w = Waypoint::new(0.7, -1.3, t);
        let (vx, vy, om) = oracle_twist(&w);
        let tw = se2_log(&w);
        assert_abs_diff_eq!(tw.vx, vx, epsilon = 1e-8);
        assert_abs_diff_eq!(tw.vy, vy, epsilon = 1e-8);
        assert_abs_diff_eq!(tw.omega, om, epsilon = 1e-8);
    }
}

proptest! {
    #[test]
    fn log_matches_oracle(w in waypoint()) {
        let (vx, vy, om) = oracle_twist(&w);
        let t = se2_log(&w);
        prop_assert!((t.vx - vx).abs() < 1e-8 && (t.vy - vy).abs() < 1e-8 && (t.omega - om).abs() < 1e-8);
    }

    #[test]
    fn exp_inverts_log(w in waypoint()) {
        let back = se2_exp(&se2_log(&w));
        prop_assert!((back.dx - w.dx).abs() < 1e-9);
        prop_assert!((back.dy - w.dy).abs() < 1e-9);
        prop_assert!((back.dtheta - w.dtheta).abs() < 1e-9);
    }

    #[test]
    fn distance_is_symmetric_under_inverse(w in waypoint()) {
        prop_assert!((waypoint_distance(&w) - waypoint_distance(&w.inverse())).abs() < 1e-9);
    }

    #[test]
    fn distance_bounds_translation(w in waypoint()) {
        // V scales translations by |2 sin(θ/2) / θ| ≤ 1, so the twist is never shorter
        let d = waypoint_distance(&w);
        prop_assert!(d + 1e-12 >= w.dx.hypot(w.dy));
        prop_assert!(d + 1e-12 >= 2f64.sqrt() * w.dtheta.abs());
    }

    #[test]
    fn relative_then_compose_round_trips(a in pose(), b in pose()) {
        let back = compose(&a, &relative(&a, &b));
        prop_assert!((back.x - b.x).abs() < 1e-9 && (back.y - b.y).abs() < 1e-9);
        prop_assert!(toponav::se2::wrap_angle(back.theta - b.theta).abs() < 1e-9);
    }

    #[test]
    fn composition_is_associative(a in waypoint(), b in waypoint(), c in waypoint()) {
        let l = a.then(&b).then(&c);
        let r = a.then(&b.then(&c));
        prop_assert!((l.dx - r.dx).abs() < 1e-9 && (l.dy - r.dy).abs() < 1e-9);
        prop_assert!(toponav::se2::wrap_angle(l.dtheta - r.dtheta).abs() < 1e-9);
    }

    #[test]
    fn dubins_at_least_euclidean(a in pose(), b in pose(), r in 0.1..2.0f64) {
        let len = dubins_length(&a, &b, r);
        prop_assert!(len + 1e-9 >= a.distance_to(&b));
    }

    #[test]
    fn dubins_path_ends_at_target(a in pose(), b in pose(), r in 0.2..1.5f64) {
        let p = dubins_path(&a, &b, r);
        let end = p.sample(p.length());
        prop_assert!((end.x - b.x).abs() < 1e-6 && (end.y - b.y).abs() < 1e-6, "{end:?} vs {b:?}");
        prop_assert!(toponav::se2::wrap_angle(end.theta - b.theta).abs() < 1e-6);
    }
}

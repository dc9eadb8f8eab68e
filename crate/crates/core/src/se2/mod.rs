//! Planar rigid-body geometry.
//!
//! Poses and waypoints are plain value types. Every constructor and every
//! operation keeps angles in the half-open interval `(-π, π]`.

mod dubins;

pub use dubins::{dubins_length, dubins_path, DubinsPath, DubinsWord, SegmentKind};

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this rotation magnitude the V-matrix terms use their Taylor series.
const SMALL_ANGLE: f64 = 1e-6;

/// Maps `theta` into `(-π, π]`.
///
/// Non-finite input propagates as NaN; use [`checked_wrap_angle`] where the
/// caller needs an error instead.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

pub fn checked_wrap_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::InvalidInput(format!("angle {theta} is not finite")));
    }
    Ok(wrap_angle(theta))
}

/// Absolute pose of the agent (or of an observation) in the world frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn origin() -> Self {
        Self::default()
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn distance_to(&self, other: &Pose2D) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// Pose reached by following `w` from `self`.
    pub fn compose(&self, w: &Waypoint) -> Pose2D {
        compose(self, w)
    }

    /// Waypoint that takes `self` to `other`.
    pub fn relative(&self, other: &Pose2D) -> Waypoint {
        relative(self, other)
    }
}

/// Relative transform `[dx, dy, dθ]` expressed in the source frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

impl Waypoint {
    pub fn new(dx: f64, dy: f64, dtheta: f64) -> Self {
        Self {
            dx,
            dy,
            dtheta: wrap_angle(dtheta),
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.dx == 0.0 && self.dy == 0.0 && self.dtheta == 0.0
    }

    /// The waypoint that undoes `self`.
    pub fn inverse(&self) -> Waypoint {
        let (s, c) = self.dtheta.sin_cos();
        Waypoint::new(
            -c * self.dx - s * self.dy,
            s * self.dx - c * self.dy,
            -self.dtheta,
        )
    }

    /// Chains `self` then `next`.
    pub fn then(&self, next: &Waypoint) -> Waypoint {
        let p = compose(&Pose2D::new(self.dx, self.dy, self.dtheta), next);
        Waypoint::new(p.x, p.y, p.theta)
    }

    /// Homogeneous 3×3 matrix `[[R, t], [0, 1]]`, row-major.
    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let (s, c) = self.dtheta.sin_cos();
        [[c, -s, self.dx], [s, c, self.dy], [0.0, 0.0, 1.0]]
    }

    /// Distance used for edge weights: Frobenius norm of the matrix log.
    pub fn distance(&self) -> f64 {
        waypoint_distance(self)
    }
}

/// Lie-algebra coordinates `(vx, vy, ω)` of an SE(2) element.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Twist {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl Twist {
    pub fn new(vx: f64, vy: f64, omega: f64) -> Self {
        Self { vx, vy, omega }
    }

    /// Frobenius norm of the 3×3 hat matrix `[[0, -ω, vx], [ω, 0, vy], [0, 0, 0]]`.
    pub fn frobenius_norm(&self) -> f64 {
        (self.vx * self.vx + self.vy * self.vy + 2.0 * self.omega * self.omega).sqrt()
    }
}

pub fn compose(base: &Pose2D, w: &Waypoint) -> Pose2D {
    let (s, c) = base.theta.sin_cos();
    Pose2D::new(
        base.x + c * w.dx - s * w.dy,
        base.y + s * w.dx + c * w.dy,
        base.theta + w.dtheta,
    )
}

pub fn relative(a: &Pose2D, b: &Pose2D) -> Waypoint {
    let (s, c) = a.theta.sin_cos();
    let ex = b.x - a.x;
    let ey = b.y - a.y;
    Waypoint::new(c * ex + s * ey, -s * ex + c * ey, b.theta - a.theta)
}

/// `sin θ / θ` and `(1 − cos θ) / θ`, the entries of the SE(2) V-matrix.
fn v_terms(theta: f64) -> (f64, f64) {
    if theta.abs() < SMALL_ANGLE {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, theta / 2.0 - theta * t2 / 24.0)
    } else {
        let h = (0.5 * theta).sin();
        (theta.sin() / theta, 2.0 * h * h / theta)
    }
}

/// Matrix logarithm of `T(w)` in closed form.
///
/// `V⁻¹ = [[a, θ/2], [−θ/2, a]]` with `a = (θ/2)·cot(θ/2)`. At `θ = π` the
/// half-angle form evaluates to `a = 0`, which is the limit from the positive
/// branch; waypoints always carry `θ ∈ (-π, π]` so `-π` never reaches here.
pub fn se2_log(w: &Waypoint) -> Twist {
    let theta = w.dtheta;
    let half = 0.5 * theta;
    let a = if theta.abs() < SMALL_ANGLE {
        1.0 - theta * theta / 12.0
    } else if (PI - theta.abs()).abs() < f64::EPSILON * 4.0 {
        0.0
    } else {
        half / half.tan()
    };
    Twist {
        vx: a * w.dx + half * w.dy,
        vy: -half * w.dx + a * w.dy,
        omega: theta,
    }
}

pub fn se2_exp(t: &Twist) -> Waypoint {
    let (a, b) = v_terms(t.omega);
    Waypoint::new(a * t.vx - b * t.vy, b * t.vx + a * t.vy, t.omega)
}

/// `‖log T(w)‖_F`.
pub fn waypoint_distance(w: &Waypoint) -> f64 {
    se2_log(w).frobenius_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wrap_angle_examples() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_abs_diff_eq!(wrap_angle(1.5 * PI), -0.5 * PI, epsilon = 1e-12);
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(PI), PI);
        assert!(checked_wrap_angle(f64::NAN).is_err());
        assert!(checked_wrap_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn compose_examples() {
        let p = compose(&Pose2D::origin(), &Waypoint::new(1.0, 2.0, 0.0));
        assert_eq!(p, Pose2D::new(1.0, 2.0, 0.0));

        let base = Pose2D::new(0.3, -1.2, 2.0);
        assert_eq!(compose(&base, &Waypoint::zero()), base);

        let q = compose(&Pose2D::new(0.0, 0.0, PI / 2.0), &Waypoint::new(1.0, 0.0, 0.0));
        assert_abs_diff_eq!(q.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.y, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.theta, PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn relative_examples() {
        let p = Pose2D::new(2.0, -3.0, 0.7);
        let w = relative(&p, &p);
        assert_abs_diff_eq!(w.dx, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.dy, 0.0, epsilon = 1e-12);
        assert_eq!(w.dtheta, 0.0);

        assert_eq!(
            relative(&Pose2D::origin(), &Pose2D::new(3.0, 4.0, 0.0)),
            Waypoint::new(3.0, 4.0, 0.0)
        );

        let a = Pose2D::new(1.0, 1.0, PI / 2.0);
        let b = Pose2D::new(1.0, 2.0, PI / 2.0);
        let w = relative(&a, &b);
        assert_abs_diff_eq!(w.dx, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.dy, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.dtheta, 0.0, epsilon = 1e-12);
        let back = compose(&a, &w);
        assert_abs_diff_eq!(back.x, b.x, epsilon = 1e-9);
        assert_abs_diff_eq!(back.y, b.y, epsilon = 1e-9);
    }

    #[test]
    fn log_exp_examples() {
        assert_eq!(se2_log(&Waypoint::zero()), Twist::default());
        let t = se2_log(&Waypoint::new(1.0, 0.0, 0.0));
        assert_eq!(t, Twist::new(1.0, 0.0, 0.0));
        let w = se2_exp(&Twist::new(0.0, 0.0, PI / 4.0));
        assert_eq!(w, Waypoint::new(0.0, 0.0, PI / 4.0));
    }

    #[test]
    fn log_at_half_turn_uses_positive_branch() {
        let w = Waypoint::new(0.4, -0.2, PI);
        let t = se2_log(&w);
        assert_eq!(t.omega, PI);
        let back = se2_exp(&t);
        assert_abs_diff_eq!(back.dx, w.dx, epsilon = 1e-9);
        assert_abs_diff_eq!(back.dy, w.dy, epsilon = 1e-9);
        assert_abs_diff_eq!(back.dtheta, w.dtheta, epsilon = 1e-9);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(waypoint_distance(&Waypoint::zero()), 0.0);
        assert_abs_diff_eq!(waypoint_distance(&Waypoint::new(1.0, 0.0, 0.0)), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            waypoint_distance(&Waypoint::new(0.0, 0.0, PI / 2.0)),
            PI / 2f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn small_angle_branch_is_continuous() {
        for &th in &[1e-5, 2e-6, 9.9e-7, 1e-8, -3e-7] {
            let w = Waypoint::new(0.8, -0.3, th);
            let back = se2_exp(&se2_log(&w));
            assert_abs_diff_eq!(back.dx, w.dx, epsilon = 1e-12);
            assert_abs_diff_eq!(back.dy, w.dy, epsilon = 1e-12);
        }
    }

    #[test]
    fn inverse_undoes_waypoint() {
        let w = Waypoint::new(0.7, -1.1, 2.4);
        let id = w.then(&w.inverse());
        assert_abs_diff_eq!(id.dx, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(id.dy, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(id.dtheta, 0.0, epsilon = 1e-12);
    }
}

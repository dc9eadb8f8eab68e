use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::FreeSpace;
use crate::se2::{wrap_angle, Pose2D};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgentState {
    pub pose: Pose2D,
    pub collision_count: u32,
    pub step_count: u32,
}

impl AgentState {
    pub fn new(pose: Pose2D) -> Self {
        Self {
            pose,
            collision_count: 0,
            step_count: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VelocityCmd {
    pub v: f64,
    pub omega: f64,
}

impl VelocityCmd {
    pub const STOP: VelocityCmd = VelocityCmd { v: 0.0, omega: 0.0 };

    pub fn is_stop(&self) -> bool {
        self.v == 0.0 && self.omega == 0.0
    }
}

/// Polar go-to-pose controller settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerGains {
    pub k_rho: f64,
    pub k_alpha: f64,
    pub k_beta: f64,
    pub v_max: f64,
    pub omega_max: f64,
    pub dt: f64,
    /// Position error below which the controller only aligns heading.
    pub pos_tol: f64,
    pub yaw_tol: f64,
    /// Bearing error beyond which the controller turns in place.
    pub turn_in_place: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self {
            k_rho: 1.0,
            k_alpha: 1.5,
            k_beta: -0.6,
            v_max: 0.5,
            omega_max: 1.5,
            dt: 0.1,
            pos_tol: 0.05,
            yaw_tol: 0.05,
            turn_in_place: PI / 4.0,
        }
    }
}

fn integrate(p: &Pose2D, v: f64, omega: f64, t: f64) -> Pose2D {
    if omega.abs() < 1e-9 {
        let (s, c) = p.theta.sin_cos();
        Pose2D::new(p.x + v * t * c, p.y + v * t * s, p.theta + omega * t)
    } else {
        let th = p.theta + omega * t;
        let k = v / omega;
        Pose2D::new(
            p.x + k * (th.sin() - p.theta.sin()),
            p.y - k * (th.cos() - p.theta.cos()),
            th,
        )
    }
}

/// Advances the unicycle along its exact arc for `dt` seconds.
///
/// The arc is checked in sub-steps of a quarter cell; at the first sub-step
/// whose footprint touches an occupied cell the agent stops at the previous
/// sub-step and one collision is counted.
pub fn step_agent(space: &FreeSpace, state: &AgentState, cmd: &VelocityCmd, dt: f64) -> AgentState {
    let mut next = *state;
    next.step_count += 1;
    if cmd.v == 0.0 {
        next.pose = integrate(&state.pose, 0.0, cmd.omega, dt);
        return next;
    }
    let travel = cmd.v.abs() * dt;
    let n = ((travel / (0.25 * space.map().resolution())).ceil() as usize).max(1);
    let mut last = state.pose;
    for k in 1..=n {
        let p = integrate(&state.pose, cmd.v, cmd.omega, dt * k as f64 / n as f64);
        if !space.pose_clear(p.x, p.y) {
            next.pose = last;
            next.collision_count += 1;
            return next;
        }
        last = p;
    }
    next.pose = last;
    next
}

/// Go-to-pose law on polar coordinates `(ρ, α, β)`.
///
/// Large bearing errors are first removed by turning in place; once within
/// `pos_tol` only the heading is corrected; inside both tolerances the
/// command is zero. Speed saturates at `v_max`; a turn rate beyond
/// `omega_max` scales both down together so the curvature is preserved.
pub fn feedback_control(current: &Pose2D, target: &Pose2D, gains: &ControllerGains) -> VelocityCmd {
    let (dx, dy) = (target.x - current.x, target.y - current.y);
    let rho = dx.hypot(dy);
    let clamp_w = |w: f64| w.clamp(-gains.omega_max, gains.omega_max);

    if rho < gains.pos_tol {
        let e = wrap_angle(target.theta - current.theta);
        if e.abs() < gains.yaw_tol {
            return VelocityCmd::STOP;
        }
        return VelocityCmd {
            v: 0.0,
            omega: clamp_w(gains.k_alpha * e),
        };
    }

    let bearing = dy.atan2(dx);
    let alpha = wrap_angle(bearing - current.theta);
    if alpha.abs() > gains.turn_in_place {
        return VelocityCmd {
            v: 0.0,
            omega: clamp_w(gains.k_alpha * alpha),
        };
    }
    let beta = wrap_angle(target.theta - bearing);
    let v = (gains.k_rho * rho).min(gains.v_max);
    let omega = gains.k_alpha * alpha + gains.k_beta * beta;
    let scale = (omega.abs() / gains.omega_max).max(1.0);
    VelocityCmd {
        v: v / scale,
        omega: omega / scale,
    }
}

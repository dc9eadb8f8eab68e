use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::World;
use crate::error::{Error, Result};
use crate::gridworld::{feedback_control, shortest_feasible_path, step_agent, AgentState};
use crate::perception::Observation;
use crate::se2::{relative, Pose2D, Waypoint};

/// Odometry drift: per-step Gaussian noise with standard deviation
/// proportional to the motion of that step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OdomNoise {
    /// Translation noise per meter driven.
    pub trans_sigma: f64,
    /// Heading noise per meter driven plus per radian turned.
    pub rot_sigma: f64,
    pub seed: u64,
}

impl OdomNoise {
    fn is_zero(&self) -> bool {
        self.trans_sigma == 0.0 && self.rot_sigma == 0.0
    }
}

/// Drives the controller around `route` for `loops` loops and records an
/// observation every `spacing` meters of travel, starting at `route[0]`.
///
/// Observation ids run from 0. Odometry integrates the noisy per-step motion;
/// without noise it equals the true pose.
pub fn collect_trajectory(
    world: &World,
    route: &[Pose2D],
    loops: usize,
    spacing: f64,
    noise: &OdomNoise,
) -> Result<Vec<Observation>> {
    if loops == 0 {
        return Err(Error::InvalidInput("loops must be at least 1".into()));
    }
    if route.len() < 2 {
        return Err(Error::Route("route needs at least two poses".into()));
    }
    if !(spacing > 0.0) {
        return Err(Error::InvalidInput(format!("spacing must be positive, got {spacing}")));
    }
    let space = &world.space;
    for (k, p) in route.iter().enumerate() {
        if !space.pose_clear(p.x, p.y) {
            return Err(Error::Route(format!("route pose {k} ({:.2}, {:.2}) is not free", p.x, p.y)));
        }
    }
    for k in 0..route.len() {
        let (a, b) = (&route[k], &route[(k + 1) % route.len()]);
        if shortest_feasible_path(space, a, b).is_none() {
            return Err(Error::Route(format!("no feasible path from route pose {k} to the next")));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut gauss = move |sigma: f64| {
        if sigma > 0.0 {
            Normal::new(0.0, sigma).expect("finite sigma").sample(&mut rng)
        } else {
            0.0
        }
    };
    let gains = &world.gains;
    let mut state = AgentState::new(route[0]);
    let mut odom = route[0];
    let mut traj = vec![world.observe(0, &route[0])?];
    let mut since_last = 0.0;

    for _ in 0..loops {
        for k in 1..=route.len() {
            let target = route[k % route.len()];
            let leg = state.pose.distance_to(&target);
            let budget = 500 + (20.0 * leg / (gains.v_max * gains.dt)) as u32;
            let mut steps = 0;
            loop {
                let cmd = feedback_control(&state.pose, &target, gains);
                if cmd.is_stop() {
                    break;
                }
                if steps == budget {
                    return Err(Error::Route(format!("controller did not converge on leg to pose {}", k % route.len())));
                }
                let next = step_agent(space, &state, &cmd, gains.dt);
                if next.collision_count > state.collision_count {
                    return Err(Error::Route(format!(
                        "collision near ({:.2}, {:.2}) on leg to pose {}",
                        state.pose.x,
                        state.pose.y,
                        k % route.len()
                    )));
                }
                let moved = state.pose.distance_to(&next.pose);
                odom = if noise.is_zero() {
                    next.pose
                } else {
                    let w = relative(&state.pose, &next.pose);
                    let turn = w.dtheta.abs();
                    let noisy = Waypoint::new(
                        w.dx + gauss(noise.trans_sigma * moved),
                        w.dy + gauss(noise.trans_sigma * moved),
                        w.dtheta + gauss(noise.rot_sigma * (moved + turn)),
                    );
                    odom.compose(&noisy)
                };
                state = next;
                steps += 1;
                since_last += moved;
                if since_last >= spacing {
                    since_last = 0.0;
                    let id = traj.len() as u64;
                    traj.push(Observation::capture(world.map(), id, state.pose, odom, &world.sensor)?);
                }
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::gridworld::{ControllerGains, FreeSpace, GridMap, SensorConfig};

    fn world() -> World {
        let space = FreeSpace::new(GridMap::new_room(120, 120, 0.05).unwrap(), 0.18);
        World::new(Arc::new(space), SensorConfig::default(), ControllerGains::default())
    }

    fn square() -> Vec<Pose2D> {
        vec![
            Pose2D::new(1.5, 1.5, 0.0),
            Pose2D::new(4.5, 1.5, PI / 2.0),
            Pose2D::new(4.5, 4.5, PI),
            Pose2D::new(1.5, 4.5, -PI / 2.0),
        ]
    }

    #[test]
    fn square_loop_count() {
        let traj = collect_trajectory(&world(), &square(), 1, 0.3, &OdomNoise::default()).unwrap();
        let expect = 12.0 / 0.3;
        assert!((traj.len() as f64 - expect).abs() <= 0.1 * expect, "{}", traj.len());
        assert!(traj.iter().all(|o| o.odom_pose == o.true_pose));
        assert!(traj.iter().enumerate().all(|(k, o)| o.id == k as u64));
    }

    #[test]
    fn zero_loops_rejected() {
        assert!(matches!(
            collect_trajectory(&world(), &square(), 0, 0.3, &OdomNoise::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn blocked_route_rejected() {
        let mut r = square();
        r[1] = Pose2D::new(0.05, 1.5, 0.0);
        assert!(matches!(
            collect_trajectory(&world(), &r, 1, 0.3, &OdomNoise::default()),
            Err(Error::Route(_))
        ));
    }

    #[test]
    fn odometry_drifts_with_noise() {
        let noise = OdomNoise {
            trans_sigma: 0.02,
            rot_sigma: 0.01,
            seed: 1,
        };
        let traj = collect_trajectory(&world(), &square(), 1, 0.3, &noise).unwrap();
        let last = traj.last().unwrap();
        assert_ne!(last.odom_pose, last.true_pose);
        assert!(last.odom_pose.distance_to(&last.true_pose) < 1.0);
    }
}

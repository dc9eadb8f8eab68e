use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Observation;
use crate::gridworld::{
    is_visible, raycast_scan, shortest_feasible_path_bounded, visual_overlap_scans, DepthScan,
    FreeSpace, SensorConfig,
};
use crate::se2::{dubins_path, wrap_angle, Pose2D};

/// Thresholds for ground-truth reachability between two views.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReachabilityCriteria {
    /// Minimum co-visibility ratio.
    pub l_min: f64,
    /// Maximum feasible-path length over Euclidean distance.
    pub r_max: f64,
    /// Maximum Euclidean distance, meters.
    pub e_max: f64,
    /// Maximum relative yaw, radians.
    pub theta_max: f64,
    pub turn_radius: f64,
    pub fov: f64,
    pub max_range: f64,
    pub n_rays: usize,
    /// Targets closer than this count as co-located: the in-front, visibility
    /// and Dubins sweep checks are skipped, since the robot only has to turn.
    pub colocated_radius: f64,
}

impl Default for ReachabilityCriteria {
    fn default() -> Self {
        Self {
            l_min: 0.3,
            r_max: 1.6,
            e_max: 2.5,
            theta_max: PI / 2.0,
            turn_radius: 0.3,
            fov: PI / 2.0,
            max_range: 5.0,
            n_rays: 64,
            colocated_radius: 0.2,
        }
    }
}

impl ReachabilityCriteria {
    pub fn sensor(&self) -> SensorConfig {
        SensorConfig {
            fov: self.fov,
            n_rays: self.n_rays,
            max_range: self.max_range,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let positive = [
            self.r_max,
            self.e_max,
            self.theta_max,
            self.turn_radius,
            self.fov,
            self.max_range,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) || !(0.0..=1.0).contains(&self.l_min) {
            return Err(crate::Error::Config(format!("invalid reachability criteria {self:?}")));
        }
        Ok(())
    }
}

/// Ground-truth reachability from pose `a` to pose `b`.
///
/// Every criterion must hold: the relative yaw and distance limits, `b`
/// in front of and visible from `a`, a collision-free Dubins sweep, enough
/// co-visibility, and a feasible path not much longer than the straight line.
/// Cheap checks run first.
pub fn label_reachability(space: &FreeSpace, a: &Pose2D, b: &Pose2D, c: &ReachabilityCriteria) -> bool {
    let sensor = c.sensor();
    let (Ok(sa), Ok(sb)) = (
        raycast_scan(space.map(), a, &sensor),
        raycast_scan(space.map(), b, &sensor),
    ) else {
        return false;
    };
    label_scans(space, &sa, &sb, c)
}

/// Same as [`label_reachability`], using the scans carried by the observations.
pub fn label_observations(
    space: &FreeSpace,
    a: &Observation,
    b: &Observation,
    c: &ReachabilityCriteria,
) -> bool {
    label_scans(space, &a.scan, &b.scan, c)
}

fn label_scans(space: &FreeSpace, sa: &DepthScan, sb: &DepthScan, c: &ReachabilityCriteria) -> bool {
    let map = space.map();
    let (a, b) = (&sa.pose, &sb.pose);
    if !map.is_free_point(a.x, a.y) || !map.is_free_point(b.x, b.y) {
        return false;
    }
    let euclid = a.distance_to(b);
    if euclid > c.e_max || wrap_angle(b.theta - a.theta).abs() > c.theta_max {
        return false;
    }
    let colocated = euclid <= c.colocated_radius;
    if !colocated {
        // in front of a, and visible from a
        if !is_visible(map, a, b.position(), c.fov, c.max_range) {
            return false;
        }
    }
    if visual_overlap_scans(map, sa, sb, &c.sensor()) < c.l_min {
        return false;
    }
    if !colocated {
        let path = dubins_path(a, b, c.turn_radius);
        let step = 0.5 * map.resolution();
        if !path
            .sample_many(step)
            .iter()
            .all(|p| space.pose_clear(p.x, p.y))
        {
            return false;
        }
    }
    if euclid < map.resolution() {
        return true;
    }
    shortest_feasible_path_bounded(space, a, b, c.r_max * euclid)
        .is_some_and(|len| len / euclid <= c.r_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::GridMap;

    fn two_rooms() -> FreeSpace {
        let mut m = GridMap::new_room(120, 60, 0.05).unwrap();
        m.fill_rect(2.9, 0.0, 3.1, 3.0, true);
        FreeSpace::new(m, 0.18)
    }

    #[test]
    fn identical_poses_are_reachable() {
        let s = two_rooms();
        let p = Pose2D::new(1.0, 1.5, 0.0);
        assert!(label_reachability(&s, &p, &p, &ReachabilityCriteria::default()));
    }

    #[test]
    fn sealed_wall_blocks() {
        let s = two_rooms();
        let a = Pose2D::new(2.2, 1.5, 0.0);
        let b = Pose2D::new(3.8, 1.5, 0.0);
        assert!(!label_reachability(&s, &a, &b, &ReachabilityCriteria::default()));
    }

    #[test]
    fn target_behind_is_unreachable() {
        let s = two_rooms();
        let a = Pose2D::new(2.0, 1.5, 0.0);
        let b = Pose2D::new(1.0, 1.5, 0.0);
        assert!(!label_reachability(&s, &a, &b, &ReachabilityCriteria::default()));
        // and the reverse direction is fine
        assert!(label_reachability(&s, &b, &a, &ReachabilityCriteria::default()));
    }

    #[test]
    fn too_far_or_too_rotated() {
        let s = FreeSpace::new(GridMap::new_room(200, 200, 0.05).unwrap(), 0.18);
        let c = ReachabilityCriteria::default();
        let a = Pose2D::new(6.0, 5.0, 0.0);
        assert!(label_reachability(&s, &a, &Pose2D::new(8.0, 5.0, 0.0), &c));
        assert!(!label_reachability(&s, &a, &Pose2D::new(9.0, 5.0, 0.0), &c));
        assert!(!label_reachability(&s, &a, &Pose2D::new(7.0, 5.0, 2.0), &c));
    }
}

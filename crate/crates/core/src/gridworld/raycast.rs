use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::GridMap;
use crate::error::Result;
use crate::se2::{wrap_angle, Pose2D};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorConfig {
    pub fov: f64,
    pub n_rays: usize,
    pub max_range: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            fov: PI / 2.0,
            n_rays: 64,
            max_range: 5.0,
        }
    }
}

impl SensorConfig {
    /// Ray bearings relative to the sensor heading, evenly spread over the fov.
    pub fn bearings(&self) -> Vec<f64> {
        match self.n_rays {
            0 => Vec::new(),
            1 => vec![0.0],
            n => (0..n)
                .map(|k| -0.5 * self.fov + self.fov * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    /// Whether a world-frame bearing falls inside the frustum of `pose`.
    pub fn in_fov(&self, pose: &Pose2D, bearing: f64) -> bool {
        wrap_angle(bearing - pose.theta).abs() <= 0.5 * self.fov + 1e-9
    }
}

/// Synthetic depth observation.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthScan {
    pub pose: Pose2D,
    pub fov: f64,
    pub max_range: f64,
    /// Bearings relative to `pose.theta`.
    pub angles: Vec<f64>,
    /// `max_range` where the ray saw nothing.
    pub ranges: Vec<f64>,
    /// World-frame endpoints of the finite returns.
    pub hit_points: Vec<[f64; 2]>,
}

impl DepthScan {
    /// Rebuilds a scan from its ranges; `hit_points` are always derived this way.
    pub fn from_ranges(pose: Pose2D, fov: f64, max_range: f64, ranges: Vec<f64>) -> Self {
        let sensor = SensorConfig {
            fov,
            n_rays: ranges.len(),
            max_range,
        };
        let angles = sensor.bearings();
        let hit_points = angles
            .iter()
            .zip(&ranges)
            .filter(|(_, &r)| r < max_range)
            .map(|(&a, &r)| {
                let (s, c) = (pose.theta + a).sin_cos();
                [pose.x + r * c, pose.y + r * s]
            })
            .collect();
        Self {
            pose,
            fov,
            max_range,
            angles,
            ranges,
            hit_points,
        }
    }

    pub fn finite_returns(&self) -> usize {
        self.hit_points.len()
    }

    pub fn sensor(&self) -> SensorConfig {
        SensorConfig {
            fov: self.fov,
            n_rays: self.ranges.len(),
            max_range: self.max_range,
        }
    }
}

/// Distance along `angle` from `(x, y)` to the first occupied cell, by DDA
/// grid traversal. `None` when nothing is hit within `max_range`.
pub fn raycast(map: &GridMap, x: f64, y: f64, angle: f64, max_range: f64) -> Option<f64> {
    let res = map.resolution();
    let (dy, dx) = angle.sin_cos();
    let mut i = (x / res).floor() as i64;
    let mut j = (y / res).floor() as i64;
    if map.cell_occupied_signed(i, j) {
        return Some(0.0);
    }
    let (step_i, mut t_max_x, t_delta_x) = axis_setup(x, dx, i, res);
    let (step_j, mut t_max_y, t_delta_y) = axis_setup(y, dy, j, res);
    loop {
        let t;
        if t_max_x < t_max_y {
            t = t_max_x;
            t_max_x += t_delta_x;
            i += step_i;
        } else {
            t = t_max_y;
            t_max_y += t_delta_y;
            j += step_j;
        }
        if t > max_range {
            return None;
        }
        if map.cell_occupied_signed(i, j) {
            return Some(t);
        }
    }
}

fn axis_setup(origin: f64, dir: f64, cell: i64, res: f64) -> (i64, f64, f64) {
    if dir > 0.0 {
        (1, ((cell + 1) as f64 * res - origin) / dir, res / dir)
    } else if dir < 0.0 {
        (-1, (cell as f64 * res - origin) / dir, -res / dir)
    } else {
        (0, f64::INFINITY, f64::INFINITY)
    }
}

/// True when no occupied cell lies on the straight segment `p → q`.
pub fn segment_clear(map: &GridMap, p: [f64; 2], q: [f64; 2]) -> bool {
    let (ex, ey) = (q[0] - p[0], q[1] - p[1]);
    let len = ex.hypot(ey);
    if len == 0.0 {
        return map.is_free_point(p[0], p[1]);
    }
    raycast(map, p[0], p[1], ey.atan2(ex), len).is_none()
}

pub fn raycast_scan(map: &GridMap, pose: &Pose2D, sensor: &SensorConfig) -> Result<DepthScan> {
    map.check_free(pose)?;
    let ranges = sensor
        .bearings()
        .iter()
        .map(|&a| {
            raycast(map, pose.x, pose.y, pose.theta + a, sensor.max_range)
                .filter(|&r| r < sensor.max_range)
                .unwrap_or(sensor.max_range)
        })
        .collect();
    Ok(DepthScan::from_ranges(
        *pose,
        sensor.fov,
        sensor.max_range,
        ranges,
    ))
}

pub fn is_visible(
    map: &GridMap,
    from: &Pose2D,
    target: [f64; 2],
    fov: f64,
    max_range: f64,
) -> bool {
    let (ex, ey) = (target[0] - from.x, target[1] - from.y);
    let dist = ex.hypot(ey);
    if dist == 0.0 {
        return true;
    }
    if dist > max_range || wrap_angle(ey.atan2(ex) - from.theta).abs() > 0.5 * fov + 1e-9 {
        return false;
    }
    segment_clear(map, from.position(), target)
}

/// Fraction of `scan`'s returns that `viewer` also observes.
fn directed_overlap(map: &GridMap, scan: &DepthScan, viewer: &Pose2D, sensor: &SensorConfig) -> f64 {
    if scan.hit_points.is_empty() {
        return 0.0;
    }
    let tol = 0.75 * map.resolution();
    let seen = scan
        .hit_points
        .iter()
        .filter(|hp| {
            let (ex, ey) = (hp[0] - viewer.x, hp[1] - viewer.y);
            let dist = ex.hypot(ey);
            if dist > sensor.max_range {
                return false;
            }
            let bearing = ey.atan2(ex);
            if !sensor.in_fov(viewer, bearing) {
                return false;
            }
            match raycast(map, viewer.x, viewer.y, bearing, sensor.max_range) {
                Some(hit) => hit >= dist - tol,
                None => true,
            }
        })
        .count();
    seen as f64 / scan.hit_points.len() as f64
}

/// Co-visibility of two views: the smaller of the two directed ratios.
pub fn visual_overlap_scans(
    map: &GridMap,
    a: &DepthScan,
    b: &DepthScan,
    sensor: &SensorConfig,
) -> f64 {
    directed_overlap(map, a, &b.pose, sensor).min(directed_overlap(map, b, &a.pose, sensor))
}

pub fn visual_overlap(map: &GridMap, a: &Pose2D, b: &Pose2D, sensor: &SensorConfig) -> Result<f64> {
    let sa = raycast_scan(map, a, sensor)?;
    let sb = raycast_scan(map, b, sensor)?;
    Ok(visual_overlap_scans(map, &sa, &sb, sensor))
}

//! Bundled maps, routes and small scenarios.

use std::sync::Arc;

use super::World;
use crate::error::Result;
use crate::gridworld::{FreeSpace, GridMap, DEFAULT_ROBOT_RADIUS};
use crate::perception::{Estimator, Observation};
use crate::se2::Pose2D;
use crate::topograph::{connect_to_all, BuildParams, TopoGraph, TrajectoryPool};

const RES: f64 = 0.05;

fn cells(meters: f64) -> usize {
    (meters / RES).round() as usize
}

/// Closed loop through `corners` with every corner cut by `cut` meters on
/// both sides. Each pose keeps the heading it was approached with, so the
/// controller drives the legs straight.
pub fn chamfered_loop(corners: &[(f64, f64)], cut: f64) -> Vec<Pose2D> {
    let n = corners.len();
    let mut pts = Vec::with_capacity(2 * n);
    for k in 0..n {
        let (px, py) = corners[(k + n - 1) % n];
        let (cx, cy) = corners[k];
        let (nx, ny) = corners[(k + 1) % n];
        let toward = |(ax, ay): (f64, f64)| {
            let (dx, dy) = (ax - cx, ay - cy);
            let len = dx.hypot(dy);
            let c = cut.min(0.45 * len);
            (cx + dx / len * c, cy + dy / len * c)
        };
        pts.push(toward((px, py)));
        pts.push(toward((nx, ny)));
    }
    (0..pts.len())
        .map(|k| {
            let (px, py) = pts[(k + pts.len() - 1) % pts.len()];
            let (x, y) = pts[k];
            Pose2D::new(x, y, (y - py).atan2(x - px))
        })
        .collect()
}

/// Two rooms, 7 m × 6 m overall, joined by two 1.2 m doors, with a table in
/// each room. Every wall is within sensor range of the doors.
pub fn apartment_map() -> GridMap {
    let mut m = GridMap::new_room(cells(7.0), cells(6.0), RES).expect("valid size");
    m.fill_rect(3.4, 0.0, 3.6, 6.0, true);
    m.fill_rect(3.4, 0.7, 3.6, 1.9, false);
    m.fill_rect(3.4, 4.1, 3.6, 5.3, false);
    m.fill_rect(1.6, 2.6, 2.2, 3.4, true);
    m.fill_rect(4.8, 2.6, 5.4, 3.4, true);
    m
}

/// Loop through both apartment rooms and both doors, about 16 m long.
pub fn apartment_route() -> Vec<Pose2D> {
    chamfered_loop(&[(1.2, 1.3), (5.8, 1.3), (5.8, 4.7), (1.2, 4.7)], 0.6)
}

pub const APARTMENT_LOOPS: usize = 3;
pub const APARTMENT_SPACING: f64 = 0.09;

/// Two 8 m wide rooms stacked along y, separated by a wall at y ∈ [2.9, 3.1]
/// with one 1 m door centered on x = 4.
pub fn two_room_map() -> GridMap {
    let mut m = GridMap::new_room(cells(8.0), cells(6.0), RES).expect("valid size");
    m.fill_rect(0.0, 2.9, 8.0, 3.1, true);
    m.fill_rect(3.5, 2.9, 4.5, 3.1, false);
    m
}

/// Figure-eight through the door. Each room has an eastbound leg 0.45 m from
/// the shared wall, so views on opposite sides of the wall look alike in
/// distance and heading.
pub fn two_room_route() -> Vec<Pose2D> {
    chamfered_loop(
        &[
            (0.8, 2.45),
            (4.0, 2.45),
            (4.0, 3.55),
            (7.2, 3.55),
            (7.2, 5.2),
            (0.8, 5.2),
            (0.8, 3.55),
            (4.0, 3.55),
            (4.0, 2.45),
            (7.2, 2.45),
            (7.2, 0.8),
            (0.8, 0.8),
        ],
        0.4,
    )
}

pub const TWO_ROOM_LOOPS: usize = 2;
pub const TWO_ROOM_SPACING: f64 = 0.2;

/// A 6 m × 2 m corridor.
pub fn corridor_map() -> GridMap {
    GridMap::new_room(cells(6.0), cells(2.0), RES).expect("valid size")
}

/// Down the corridor and back, turning in place at both ends.
pub fn corridor_route() -> Vec<Pose2D> {
    use std::f64::consts::PI;
    vec![
        Pose2D::new(0.8, 1.0, 0.0),
        Pose2D::new(5.2, 1.0, 0.0),
        Pose2D::new(5.2, 1.0, PI),
        Pose2D::new(0.8, 1.0, PI),
    ]
}

/// Corridor scenario where the graph is two disconnected clusters and a
/// single pool observation can bridge them.
#[derive(Clone, Debug)]
pub struct ExpansionFixture {
    pub world: World,
    pub graph: TopoGraph,
    pub pool: TrajectoryPool,
    pub start: Pose2D,
    pub goal: u64,
    /// The only pool observation that joins the clusters.
    pub bridge: u64,
}

/// Vertices face +x at x = 1, 1.8 and x = 4.6, 5.3; the pool holds the bridge
/// at x = 3.2 plus two westward-facing decoys that never join a path.
pub fn expansion_fixture<E: Estimator>(
    world_template: &World,
    estimator_for: impl FnOnce(Arc<FreeSpace>) -> E,
    params: &BuildParams,
) -> Result<(ExpansionFixture, E)> {
    let space = Arc::new(FreeSpace::new(corridor_map(), DEFAULT_ROBOT_RADIUS));
    let world = World::new(space.clone(), world_template.sensor, world_template.gains);
    let estimator = estimator_for(space);
    let obs = |id: u64, x: f64, th: f64| -> Result<Observation> {
        world.observe(id, &Pose2D::new(x, 1.0, th))
    };
    let vertices = [obs(0, 1.0, 0.0)?, obs(1, 1.8, 0.0)?, obs(3, 4.6, 0.0)?, obs(4, 5.3, 0.0)?];
    let mut graph = TopoGraph::new();
    for v in &vertices {
        graph.add_vertex(v.clone());
        connect_to_all(&mut graph, v, &estimator, params);
    }
    let pool: TrajectoryPool = [
        obs(2, 3.2, 0.0)?,
        obs(5, 2.5, std::f64::consts::PI)?,
        obs(6, 3.9, std::f64::consts::PI)?,
    ]
    .into_iter()
    .collect();
    let fixture = ExpansionFixture {
        start: vertices[0].true_pose,
        goal: 4,
        bridge: 2,
        world,
        graph,
        pool,
    };
    Ok((fixture, estimator))
}

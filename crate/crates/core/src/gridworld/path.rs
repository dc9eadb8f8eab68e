use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::GridMap;
use crate::se2::Pose2D;

/// Configuration space for a disc robot: a cell is traversable when the
/// robot centered on it touches no occupied cell.
#[derive(Clone, Debug)]
pub struct FreeSpace {
    map: GridMap,
    robot_radius: f64,
    blocked: Vec<bool>,
}

impl FreeSpace {
    pub fn new(map: GridMap, robot_radius: f64) -> Self {
        let blocked = (0..map.height())
            .flat_map(|j| (0..map.width()).map(move |i| (i, j)))
            .map(|(i, j)| {
                let (cx, cy) = map.cell_center(i, j);
                map.cell_occupied(i, j) || map.disc_collides(cx, cy, robot_radius)
            })
            .collect();
        Self {
            map,
            robot_radius,
            blocked,
        }
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn robot_radius(&self) -> f64 {
        self.robot_radius
    }

    #[inline]
    pub fn is_blocked(&self, i: usize, j: usize) -> bool {
        self.blocked[j * self.map.width() + i]
    }

    /// Whether the robot footprint at `(x, y)` is collision free.
    pub fn pose_clear(&self, x: f64, y: f64) -> bool {
        self.map.is_free_point(x, y) && !self.map.disc_collides(x, y, self.robot_radius)
    }
}

#[derive(Copy, Clone, PartialEq)]
struct Node {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn octile(di: i64, dj: i64) -> f64 {
    let (a, b) = (di.abs().max(dj.abs()) as f64, di.abs().min(dj.abs()) as f64);
    (a - b) + b * std::f64::consts::SQRT_2
}

/// 8-connected A* length in meters between the cells holding `a` and `b`,
/// or `None` when no traversable path exists.
pub fn shortest_feasible_path(space: &FreeSpace, a: &Pose2D, b: &Pose2D) -> Option<f64> {
    shortest_feasible_path_bounded(space, a, b, f64::INFINITY)
}

/// Like [`shortest_feasible_path`], but gives up once every remaining path
/// would exceed `max_length` meters.
///
/// The start and goal cells only need to be free in the raw map; the robot
/// may sit closer to a wall than its radius at an endpoint. Diagonal moves
/// may not cut blocked corners.
pub fn shortest_feasible_path_bounded(
    space: &FreeSpace,
    a: &Pose2D,
    b: &Pose2D,
    max_length: f64,
) -> Option<f64> {
    let map = &space.map;
    let (si, sj) = map.cell_of(a.x, a.y)?;
    let (gi, gj) = map.cell_of(b.x, b.y)?;
    if map.cell_occupied(si, sj) || map.cell_occupied(gi, gj) {
        return None;
    }
    let res = map.resolution();
    let w = map.width();
    let start = sj * w + si;
    let goal = gj * w + gi;
    if start == goal {
        return Some(0.0);
    }
    let passable = |i: i64, j: i64| -> bool {
        if i < 0 || j < 0 || i >= w as i64 || j >= map.height() as i64 {
            return false;
        }
        let idx = j as usize * w + i as usize;
        idx == goal || idx == start || !space.blocked[idx]
    };
    let h = |idx: usize| octile(idx as i64 % w as i64 - gi as i64, idx as i64 / w as i64 - gj as i64);
    let bound = max_length / res + 1e-9;

    let mut g = vec![f64::INFINITY; w * map.height()];
    let mut closed = vec![false; w * map.height()];
    let mut open = BinaryHeap::new();
    g[start] = 0.0;
    open.push(Node {
        f: h(start),
        g: 0.0,
        idx: start,
    });
    while let Some(Node { f, g: gc, idx }) = open.pop() {
        if f > bound {
            return None;
        }
        if idx == goal {
            return Some(gc * res);
        }
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        let (ci, cj) = ((idx % w) as i64, (idx / w) as i64);
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (ni, nj) = (ci + di, cj + dj);
                if !passable(ni, nj) {
                    continue;
                }
                if di != 0 && dj != 0 && !(passable(ci + di, cj) && passable(ci, cj + dj)) {
                    continue;
                }
                let nidx = nj as usize * w + ni as usize;
                if closed[nidx] {
                    continue;
                }
                let step = if di != 0 && dj != 0 {
                    std::f64::consts::SQRT_2
                } else {
                    1.0
                };
                let ng = gc + step;
                if ng < g[nidx] {
                    g[nidx] = ng;
                    open.push(Node {
                        f: ng + h(nidx),
                        g: ng,
                        idx: nidx,
                    });
                }
            }
        }
    }
    None
}

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GridMap;
use crate::error::{Error, Result};

/// Parameters for a grid of rectangular rooms joined by doors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoomLayout {
    pub rooms_x: usize,
    pub rooms_y: usize,
    pub room_width: f64,
    pub room_height: f64,
    pub wall_thickness: f64,
    pub door_width: f64,
    /// Chance of a door on a wall that the spanning tree did not open.
    pub extra_door_prob: f64,
    pub resolution: f64,
}

impl Default for RoomLayout {
    fn default() -> Self {
        Self {
            rooms_x: 3,
            rooms_y: 2,
            room_width: 3.0,
            room_height: 3.0,
            wall_thickness: 0.1,
            door_width: 1.0,
            extra_door_prob: 0.25,
            resolution: 0.05,
        }
    }
}

/// Rooms are connected by a random spanning tree of doors, so every free
/// cell is reachable from every other.
pub fn generate_multi_room(layout: &RoomLayout, seed: u64) -> Result<GridMap> {
    let l = layout;
    if l.rooms_x == 0 || l.rooms_y == 0 {
        return Err(Error::InvalidInput("need at least one room".into()));
    }
    if l.door_width + 2.0 * l.wall_thickness >= l.room_width.min(l.room_height) {
        return Err(Error::InvalidInput("doors do not fit in the room walls".into()));
    }
    let t = l.wall_thickness;
    let total_w = l.rooms_x as f64 * (l.room_width + t) + t;
    let total_h = l.rooms_y as f64 * (l.room_height + t) + t;
    let w = (total_w / l.resolution).round() as usize;
    let h = (total_h / l.resolution).round() as usize;
    let mut map = GridMap::new_room(w, h, l.resolution)?;
    // outer ring already set; fill interior partitions
    for ix in 1..l.rooms_x {
        let x = ix as f64 * (l.room_width + t);
        map.fill_rect(x, 0.0, x + t, total_h, true);
    }
    for iy in 1..l.rooms_y {
        let y = iy as f64 * (l.room_height + t);
        map.fill_rect(0.0, y, total_w, y + t, true);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = l.rooms_x * l.rooms_y;
    let mut visited = vec![false; n];
    let mut doors: Vec<(usize, usize)> = Vec::new();
    let mut stack = vec![rng.gen_range(0..n)];
    visited[stack[0]] = true;
    while let Some(&cur) = stack.last() {
        let mut nbrs = neighbors(cur, l.rooms_x, l.rooms_y);
        nbrs.retain(|&k| !visited[k]);
        if nbrs.is_empty() {
            stack.pop();
            continue;
        }
        let next = *nbrs.choose(&mut rng).expect("non-empty");
        visited[next] = true;
        doors.push((cur.min(next), cur.max(next)));
        stack.push(next);
    }
    for a in 0..n {
        for b in neighbors(a, l.rooms_x, l.rooms_y) {
            if a < b && !doors.contains(&(a, b)) && rng.gen_bool(l.extra_door_prob.clamp(0.0, 1.0)) {
                doors.push((a, b));
            }
        }
    }
    for (a, b) in doors {
        carve_door(&mut map, l, a, b, rng.gen_range(0.25..0.75));
    }
    Ok(map)
}

fn neighbors(k: usize, nx: usize, ny: usize) -> Vec<usize> {
    let (x, y) = (k % nx, k / nx);
    let mut out = Vec::with_capacity(4);
    if x > 0 {
        out.push(k - 1);
    }
    if x + 1 < nx {
        out.push(k + 1);
    }
    if y > 0 {
        out.push(k - nx);
    }
    if y + 1 < ny {
        out.push(k + nx);
    }
    out
}

fn carve_door(map: &mut GridMap, l: &RoomLayout, a: usize, b: usize, frac: f64) {
    let t = l.wall_thickness;
    let (ax, ay) = (a % l.rooms_x, a / l.rooms_x);
    let half = 0.5 * l.door_width;
    let slack = 0.5 * l.door_width + t;
    if b == a + 1 {
        // vertical wall between horizontally adjacent rooms
        let x = (ax + 1) as f64 * (l.room_width + t);
        let y0 = ay as f64 * (l.room_height + t) + t;
        let c = y0 + slack + frac * (l.room_height - 2.0 * slack);
        map.fill_rect(x - 0.01, c - half, x + t + 0.01, c + half, false);
    } else {
        let y = (ay + 1) as f64 * (l.room_height + t);
        let x0 = ax as f64 * (l.room_width + t) + t;
        let c = x0 + slack + frac * (l.room_width - 2.0 * slack);
        map.fill_rect(c - half, y - 0.01, c + half, y + t + 0.01, false);
    }
}

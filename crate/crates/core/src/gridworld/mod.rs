//! Deterministic 2D occupancy-grid world.
//!
//! Cell `(i, j)` covers `[i·res, (i+1)·res) × [j·res, (j+1)·res)` in world
//! meters, with `i` growing along +x and `j` along +y. The text format lists
//! rows top-down (largest `j` first) so files read like a floor plan.

mod agent;
mod generate;
mod path;
mod raycast;

pub use agent::{feedback_control, step_agent, AgentState, ControllerGains, VelocityCmd};
pub use generate::{generate_multi_room, RoomLayout};
pub use path::{shortest_feasible_path, shortest_feasible_path_bounded, FreeSpace};
pub use raycast::{
    is_visible, raycast, raycast_scan, segment_clear, visual_overlap, visual_overlap_scans, DepthScan, SensorConfig,
};

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::se2::Pose2D;

/// Robot footprint radius used for collision and path feasibility.
pub const DEFAULT_ROBOT_RADIUS: f64 = 0.18;

#[derive(Clone, Debug, PartialEq)]
pub struct GridMap {
    resolution: f64,
    width: usize,
    height: usize,
    occupied: Vec<bool>,
}

impl GridMap {
    /// An open room whose outermost ring of cells is wall.
    pub fn new_room(width: usize, height: usize, resolution: f64) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::InvalidMap(format!(
                "{width}x{height} is too small for a closed room"
            )));
        }
        let occupied = (0..width * height)
            .map(|k| {
                let (i, j) = (k % width, k / width);
                i == 0 || j == 0 || i == width - 1 || j == height - 1
            })
            .collect();
        Self::from_cells(width, height, resolution, occupied)
    }

    /// `occupied` is row-major with row `j = 0` at the bottom.
    pub fn from_cells(
        width: usize,
        height: usize,
        resolution: f64,
        occupied: Vec<bool>,
    ) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::InvalidMap(format!("resolution {resolution} must be positive")));
        }
        if width == 0 || height == 0 || occupied.len() != width * height {
            return Err(Error::InvalidMap(format!(
                "expected {}x{} cells, got {}",
                width,
                height,
                occupied.len()
            )));
        }
        let map = Self {
            resolution,
            width,
            height,
            occupied,
        };
        let open_border = (0..width)
            .flat_map(|i| [(i, 0), (i, height - 1)])
            .chain((0..height).flat_map(|j| [(0, j), (width - 1, j)]))
            .find(|&(i, j)| !map.cell_occupied(i, j));
        if let Some((i, j)) = open_border {
            return Err(Error::InvalidMap(format!("border cell ({i}, {j}) is free")));
        }
        Ok(map)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width_m(&self) -> f64 {
        self.width as f64 * self.resolution
    }

    pub fn height_m(&self) -> f64 {
        self.height as f64 * self.resolution
    }

    #[inline]
    pub fn cell_occupied(&self, i: usize, j: usize) -> bool {
        self.occupied[j * self.width + i]
    }

    /// Out-of-bounds cells count as occupied.
    #[inline]
    pub fn cell_occupied_signed(&self, i: i64, j: i64) -> bool {
        if i < 0 || j < 0 || i >= self.width as i64 || j >= self.height as i64 {
            return true;
        }
        self.cell_occupied(i as usize, j as usize)
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let i = (x / self.resolution).floor();
        let j = (y / self.resolution).floor();
        if i < 0.0 || j < 0.0 || i >= self.width as f64 || j >= self.height as f64 {
            return None;
        }
        Some((i as usize, j as usize))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            (i as f64 + 0.5) * self.resolution,
            (j as f64 + 0.5) * self.resolution,
        )
    }

    pub fn is_free_point(&self, x: f64, y: f64) -> bool {
        self.cell_of(x, y).is_some_and(|(i, j)| !self.cell_occupied(i, j))
    }

    pub fn check_free(&self, pose: &Pose2D) -> Result<()> {
        if self.is_free_point(pose.x, pose.y) {
            Ok(())
        } else {
            Err(Error::InvalidPose {
                x: pose.x,
                y: pose.y,
            })
        }
    }

    /// True when a disc of `radius` centered at `(x, y)` overlaps any occupied cell.
    pub fn disc_collides(&self, x: f64, y: f64, radius: f64) -> bool {
        let res = self.resolution;
        let i0 = ((x - radius) / res).floor() as i64;
        let i1 = ((x + radius) / res).floor() as i64;
        let j0 = ((y - radius) / res).floor() as i64;
        let j1 = ((y + radius) / res).floor() as i64;
        let r2 = radius * radius;
        for j in j0..=j1 {
            for i in i0..=i1 {
                if !self.cell_occupied_signed(i, j) {
                    continue;
                }
                let cx = x.clamp(i as f64 * res, (i + 1) as f64 * res);
                let cy = y.clamp(j as f64 * res, (j + 1) as f64 * res);
                let (ex, ey) = (x - cx, y - cy);
                if ex * ex + ey * ey < r2 {
                    return true;
                }
            }
        }
        false
    }

    pub fn free_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height)
            .flat_map(move |j| (0..self.width).map(move |i| (i, j)))
            .filter(move |&(i, j)| !self.cell_occupied(i, j))
    }

    /// Marks every cell whose center lies in the axis-aligned box as `occupied`.
    pub fn fill_rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, occupied: bool) {
        let (x0, x1) = (x0.min(x1), x0.max(x1));
        let (y0, y1) = (y0.min(y1), y0.max(y1));
        for j in 0..self.height {
            for i in 0..self.width {
                let (cx, cy) = self.cell_center(i, j);
                if cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1 {
                    let border =
                        i == 0 || j == 0 || i == self.width - 1 || j == self.height - 1;
                    self.occupied[j * self.width + i] = occupied || border;
                }
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidMap("empty map file".into()))?;
        let resolution = header
            .strip_prefix("resolution ")
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidMap(format!("bad header line {header:?}")))?;
        let rows: Vec<&str> = lines.map(str::trim_end).filter(|l| !l.is_empty()).collect();
        if rows.is_empty() {
            return Err(Error::InvalidMap("map has no rows".into()));
        }
        let width = rows[0].chars().count();
        let height = rows.len();
        let mut occupied = vec![false; width * height];
        for (r, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::InvalidMap(format!(
                    "row {} has {} cells, expected {}",
                    r + 2,
                    row.chars().count(),
                    width
                )));
            }
            let j = height - 1 - r;
            for (i, ch) in row.chars().enumerate() {
                occupied[j * width + i] = match ch {
                    '.' => false,
                    '#' => true,
                    other => {
                        return Err(Error::InvalidMap(format!(
                            "unexpected character {other:?} on row {}",
                            r + 2
                        )))
                    }
                };
            }
        }
        Self::from_cells(width, height, resolution, occupied)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height + 32);
        writeln!(out, "resolution {}", self.resolution).unwrap();
        for j in (0..self.height).rev() {
            for i in 0..self.width {
                out.push(if self.cell_occupied(i, j) { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

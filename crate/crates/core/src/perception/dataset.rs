use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{label_observations, Observation, ReachabilityCriteria};
use crate::error::{Error, Result};
use crate::gridworld::FreeSpace;
use crate::se2::{relative, Pose2D, Waypoint};

const DATASET_HEADER: &str = "toponav-dataset/v1";
const DATASET_COLUMNS: &str =
    "columns src_id src_x src_y src_theta dst_id dst_x dst_y dst_theta r dx dy dtheta";

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPair {
    pub src: Observation,
    pub dst: Observation,
    pub r: bool,
    /// Only meaningful when `r` is true.
    pub w: Waypoint,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DatasetSummary {
    pub positives: usize,
    pub negatives: usize,
}

impl DatasetSummary {
    pub fn of(pairs: &[LabeledPair]) -> Self {
        let positives = pairs.iter().filter(|p| p.r).count();
        Self {
            positives,
            negatives: pairs.len() - positives,
        }
    }

    pub fn positive_fraction(&self) -> f64 {
        let n = self.positives + self.negatives;
        if n == 0 {
            0.0
        } else {
            self.positives as f64 / n as f64
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SimDatasetOptions {
    pub seed: u64,
    /// When set, the target is drawn within this radius of the source instead
    /// of independently over the whole map.
    pub pair_radius: Option<f64>,
    /// When set, the target heading is the source heading plus a uniform
    /// offset of at most this magnitude.
    pub heading_offset: Option<f64>,
}

/// Uniform pose over `cells`, with a uniform heading.
pub(crate) fn sample_free_pose(
    space: &FreeSpace,
    cells: &[(usize, usize)],
    rng: &mut ChaCha8Rng,
) -> Pose2D {
    let res = space.map().resolution();
    loop {
        let (i, j) = cells[rng.gen_range(0..cells.len())];
        let x = (i as f64 + rng.gen::<f64>()) * res;
        let y = (j as f64 + rng.gen::<f64>()) * res;
        if space.pose_clear(x, y) {
            let th = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            return Pose2D::new(x, y, th);
        }
    }
}

/// Footprint-clear cells of `space`.
pub(crate) fn clear_cells(space: &FreeSpace) -> Vec<(usize, usize)> {
    space
        .map()
        .free_cells()
        .filter(|&(i, j)| !space.is_blocked(i, j))
        .collect()
}

/// Samples `n_pairs` labeled pairs, each from a uniformly chosen map.
pub fn generate_sim_dataset(
    spaces: &[&FreeSpace],
    n_pairs: usize,
    criteria: &ReachabilityCriteria,
    options: &SimDatasetOptions,
) -> Result<(Vec<LabeledPair>, DatasetSummary)> {
    if n_pairs == 0 {
        return Err(Error::InvalidInput("n_pairs must be at least 1".into()));
    }
    if spaces.is_empty() {
        return Err(Error::InvalidInput("no maps given".into()));
    }
    let cells: Vec<Vec<(usize, usize)>> = spaces.iter().map(|s| clear_cells(s)).collect();
    if let Some(k) = cells.iter().position(Vec::is_empty) {
        return Err(Error::InvalidMap(format!("map {k} has no free space")));
    }
    let sensor = criteria.sensor();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut pairs = Vec::with_capacity(n_pairs);
    for k in 0..n_pairs {
        let m = rng.gen_range(0..spaces.len());
        let space = spaces[m];
        let a = sample_free_pose(space, &cells[m], &mut rng);
        let b = match options.pair_radius {
            None => sample_free_pose(space, &cells[m], &mut rng),
            Some(radius) => loop {
                let rr = radius * rng.gen::<f64>().sqrt();
                let ang = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                let (x, y) = (a.x + rr * ang.cos(), a.y + rr * ang.sin());
                let th = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                if space.pose_clear(x, y) {
                    break Pose2D::new(x, y, th);
                }
            },
        };
        let b = match options.heading_offset {
            None => b,
            Some(h) => {
                let off = if h > 0.0 { rng.gen_range(-h..=h) } else { 0.0 };
                Pose2D::new(b.x, b.y, a.theta + off)
            }
        };
        let src = Observation::capture(space.map(), 2 * k as u64, a, a, &sensor)?;
        let dst = Observation::capture(space.map(), 2 * k as u64 + 1, b, b, &sensor)?;
        let r = label_observations(space, &src, &dst, criteria);
        pairs.push(LabeledPair {
            w: relative(&a, &b),
            src,
            dst,
            r,
        });
    }
    let summary = DatasetSummary::of(&pairs);
    Ok((pairs, summary))
}

/// Self-supervised labels from a single trajectory: a later observation is
/// reachable iff it was recorded at most `horizon` steps after the earlier
/// one, and its waypoint label comes from odometry alone.
pub fn label_finetune_pairs(traj: &[Observation], horizon: usize) -> Result<Vec<LabeledPair>> {
    if traj.is_empty() {
        return Err(Error::InvalidInput("empty trajectory".into()));
    }
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(traj.len() * (traj.len() - 1) / 2);
    for (i, oi) in traj.iter().enumerate() {
        for (j, oj) in traj.iter().enumerate().skip(i + 1) {
            out.push(LabeledPair {
                src: oi.clone(),
                dst: oj.clone(),
                r: j - i <= horizon,
                w: relative(&oi.odom_pose, &oj.odom_pose),
            });
        }
    }
    Ok(out)
}

/// A dataset line: ids and true poses of the two views, the label, and the
/// waypoint label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatasetRecord {
    pub src_id: u64,
    pub src_pose: Pose2D,
    pub dst_id: u64,
    pub dst_pose: Pose2D,
    pub r: bool,
    pub w: Waypoint,
}

impl From<&LabeledPair> for DatasetRecord {
    fn from(p: &LabeledPair) -> Self {
        Self {
            src_id: p.src.id,
            src_pose: p.src.true_pose,
            dst_id: p.dst.id,
            dst_pose: p.dst.true_pose,
            r: p.r,
            w: p.w,
        }
    }
}

pub fn write_dataset(
    path: impl AsRef<Path>,
    pairs: &[LabeledPair],
    criteria: &ReachabilityCriteria,
) -> Result<()> {
    let c = criteria;
    let mut out = String::new();
    writeln!(out, "{DATASET_HEADER}").unwrap();
    writeln!(
        out,
        "criteria l_min={} r_max={} e_max={} theta_max={} turn_radius={} fov={} max_range={} n_rays={} colocated_radius={}",
        c.l_min, c.r_max, c.e_max, c.theta_max, c.turn_radius, c.fov, c.max_range, c.n_rays, c.colocated_radius
    )
    .unwrap();
    writeln!(out, "{DATASET_COLUMNS}").unwrap();
    for p in pairs {
        let r = DatasetRecord::from(p);
        writeln!(
            out,
            "{} {} {} {} {} {} {} {} {} {} {} {}",
            r.src_id,
            r.src_pose.x,
            r.src_pose.y,
            r.src_pose.theta,
            r.dst_id,
            r.dst_pose.x,
            r.dst_pose.y,
            r.dst_pose.theta,
            u8::from(r.r),
            r.w.dx,
            r.w.dy,
            r.w.dtheta
        )
        .unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<(ReachabilityCriteria, Vec<DatasetRecord>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(DATASET_HEADER) {
        return Err(Error::load("dataset", "missing toponav-dataset/v1 header"));
    }
    let crit_line = lines
        .next()
        .and_then(|l| l.strip_prefix("criteria "))
        .ok_or_else(|| Error::load("dataset", "missing criteria line"))?;
    let mut c = ReachabilityCriteria::default();
    for kv in crit_line.split_ascii_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::load("dataset", format!("bad criteria entry {kv:?}")))?;
        let num = || {
            v.parse::<f64>()
                .map_err(|_| Error::load("dataset", format!("bad value for {k}")))
        };
        match k {
            "l_min" => c.l_min = num()?,
            "r_max" => c.r_max = num()?,
            "e_max" => c.e_max = num()?,
            "theta_max" => c.theta_max = num()?,
            "turn_radius" => c.turn_radius = num()?,
            "fov" => c.fov = num()?,
            "max_range" => c.max_range = num()?,
            "n_rays" => c.n_rays = num()? as usize,
            "colocated_radius" => c.colocated_radius = num()?,
            other => return Err(Error::load("dataset", format!("unknown criteria key {other}"))),
        }
    }
    if lines.next().map(str::trim) != Some(DATASET_COLUMNS) {
        return Err(Error::load("dataset", "missing columns line"));
    }
    let mut records = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_ascii_whitespace().collect();
        let bad = || Error::load("dataset", format!("bad record on data line {}", n + 1));
        if f.len() != 12 {
            return Err(bad());
        }
        let num = |k: usize| f[k].parse::<f64>().map_err(|_| bad());
        let id = |k: usize| f[k].parse::<u64>().map_err(|_| bad());
        records.push(DatasetRecord {
            src_id: id(0)?,
            src_pose: Pose2D::new(num(1)?, num(2)?, num(3)?),
            dst_id: id(4)?,
            dst_pose: Pose2D::new(num(5)?, num(6)?, num(7)?),
            r: match f[8] {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            },
            w: Waypoint::new(num(9)?, num(10)?, num(11)?),
        });
    }
    Ok((c, records))
}

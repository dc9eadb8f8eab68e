use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::gridworld::{raycast_scan, DepthScan, GridMap, SensorConfig};
use crate::se2::Pose2D;

const TRAJECTORY_HEADER: &str = "toponav-trajectory/v1";

/// A pose-stamped depth scan.
///
/// `true_pose` is ground truth and only the oracle, the labeler, and the
/// evaluation harness may look at it. `odom_pose` is what a real robot would
/// know.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub id: u64,
    pub scan: DepthScan,
    pub true_pose: Pose2D,
    pub odom_pose: Pose2D,
}

impl Observation {
    pub fn capture(
        map: &GridMap,
        id: u64,
        true_pose: Pose2D,
        odom_pose: Pose2D,
        sensor: &SensorConfig,
    ) -> Result<Self> {
        Ok(Self {
            id,
            scan: raycast_scan(map, &true_pose, sensor)?,
            true_pose,
            odom_pose,
        })
    }
}

/// One observation per line:
/// `o <id> <x> <y> <θ> <odom x> <odom y> <odom θ> <fov> <max_range> <n> <range>…`
pub fn write_observation(out: &mut String, o: &Observation) {
    let t = &o.true_pose;
    let d = &o.odom_pose;
    write!(
        out,
        "o {} {} {} {} {} {} {} {} {} {}",
        o.id,
        t.x,
        t.y,
        t.theta,
        d.x,
        d.y,
        d.theta,
        o.scan.fov,
        o.scan.max_range,
        o.scan.ranges.len()
    )
    .unwrap();
    for r in &o.scan.ranges {
        write!(out, " {r}").unwrap();
    }
    out.push('\n');
}

pub fn parse_observation(line: &str) -> Result<Observation> {
    let bad = |why: &str| Error::load("observation", format!("{why}: {line:?}"));
    let mut it = line.split_ascii_whitespace();
    if it.next() != Some("o") {
        return Err(bad("expected record tag 'o'"));
    }
    let id: u64 = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad id"))?;
    let mut nums = [0.0f64; 8];
    for slot in nums.iter_mut() {
        *slot = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad number"))?;
    }
    let n: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad ray count"))?;
    let ranges: Vec<f64> = it
        .map(|s| s.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("bad range"))?;
    if ranges.len() != n {
        return Err(bad("ray count does not match ranges"));
    }
    let true_pose = Pose2D::new(nums[0], nums[1], nums[2]);
    let odom_pose = Pose2D::new(nums[3], nums[4], nums[5]);
    Ok(Observation {
        id,
        scan: DepthScan::from_ranges(true_pose, nums[6], nums[7], ranges),
        true_pose,
        odom_pose,
    })
}

pub fn write_trajectory(path: impl AsRef<Path>, traj: &[Observation]) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{TRAJECTORY_HEADER}").unwrap();
    writeln!(out, "count {}", traj.len()).unwrap();
    for o in traj {
        write_observation(&mut out, o);
    }
    std::fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Vec<Observation>> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut lines = file.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != TRAJECTORY_HEADER {
        return Err(Error::load("trajectory", format!("unexpected header {header:?}")));
    }
    let count_line = lines.next().transpose()?.unwrap_or_default();
    let count: usize = count_line
        .strip_prefix("count ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::load("trajectory", format!("bad count line {count_line:?}")))?;
    let mut traj = Vec::with_capacity(count);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        traj.push(parse_observation(&line)?);
    }
    if traj.len() != count {
        return Err(Error::load(
            "trajectory",
            format!("expected {count} observations, found {}", traj.len()),
        ));
    }
    Ok(traj)
}

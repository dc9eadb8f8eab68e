//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::Matrix3;
use rand::Rng;
use toponav::se2::Waypoint;
use toponav::topograph::{EdgeBelief, TopoGraph};

pub fn waypoint_matrix(w: &Waypoint) -> Matrix3<f64> {
    let (s, c) = w.dtheta.sin_cos();
    Matrix3::new(c, -s, w.dx, s, c, w.dy, 0.0, 0.0, 1.0)
}

/// Principal matrix logarithm by inverse scaling and squaring: ten
/// Denman–Beavers square roots, then the Mercator series.
pub fn matrix_log(m: &Matrix3<f64>) -> Matrix3<f64> {
    const ROOTS: i32 = 10;
    let id = Matrix3::identity();
    let mut a = *m;
    for _ in 0..ROOTS {
        let (mut y, mut z) = (a, id);
        for _ in 0..60 {
            let yi = y.try_inverse().expect("invertible");
            let zi = z.try_inverse().expect("invertible");
            y = 0.5 * (y + zi);
            z = 0.5 * (z + yi);
        }
        a = y;
    }
    let x = a - id;
    let mut term = x;
    let mut sum = Matrix3::zeros();
    for k in 1..40 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += term * (sign / k as f64);
        term *= x;
    }
    sum * 2f64.powi(ROOTS)
}

/// `(vx, vy, ω)` read off the oracle matrix log.
pub fn oracle_twist(w: &Waypoint) -> (f64, f64, f64) {
    let l = matrix_log(&waypoint_matrix(w));
    (l[(0, 2)], l[(1, 2)], l[(1, 0)])
}

pub fn oracle_distance(w: &Waypoint) -> f64 {
    matrix_log(&waypoint_matrix(w)).norm()
}

/// Brute-force best simple path: least total `mu`, ties broken by the
/// lexicographically smallest id sequence.
pub fn enumerate_best_path(graph: &TopoGraph, start: u64, goal: u64) -> Option<(f64, Vec<u64>)> {
    fn dfs(g: &TopoGraph, goal: u64, path: &mut Vec<u64>, cost: f64, best: &mut Option<(f64, Vec<u64>)>) {
        let u = *path.last().unwrap();
        if u == goal {
            let better = match best {
                None => true,
                Some((bc, bp)) => cost < *bc || (cost == *bc && path < bp),
            };
            if better {
                *best = Some((cost, path.clone()));
            }
            return;
        }
        let next: Vec<(u64, f64)> = g.out_edges(u).map(|(v, b)| (v, b.mu)).collect();
        for (v, mu) in next {
            if !path.contains(&v) {
                path.push(v);
                dfs(g, goal, path, cost + mu, best);
                path.pop();
            }
        }
    }
    let mut best = None;
    dfs(graph, goal, &mut vec![start], 0.0, &mut best);
    best
}

/// Random directed graph over vertex ids `0..n` (observations are dummies).
/// With `ties`, weights are multiples of 0.125 so equal-cost paths are common.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, density: f64, ties: bool) -> TopoGraph {
    use toponav::gridworld::{GridMap, SensorConfig};
    use toponav::perception::Observation;
    use toponav::se2::Pose2D;
    let map = GridMap::new_room(20, 20, 0.1).unwrap();
    let sensor = SensorConfig {
        n_rays: 4,
        ..SensorConfig::default()
    };
    let mut g = TopoGraph::new();
    for id in 0..n as u64 {
        let p = Pose2D::new(1.0, 1.0, 0.0);
        g.add_vertex(Observation::capture(&map, id, p, p, &sensor).unwrap());
    }
    for s in 0..n as u64 {
        for d in 0..n as u64 {
            if s != d && rng.gen::<f64>() < density {
                let mu = if ties {
                    rng.gen_range(1..=8) as f64 * 0.125
                } else {
                    rng.gen_range(0.05..2.0)
                };
                g.add_edge(s, d, EdgeBelief { p: 0.9, mu, sigma2: 0.25 }).unwrap();
            }
        }
    }
    g
}

/// Discrete Bayes update written out directly.
pub fn hand_bayes(p: f64, success: bool, l1: f64, l0: f64) -> f64 {
    let (a, b) = if success { (l1, l0) } else { (1.0 - l1, 1.0 - l0) };
    a * p / (a * p + b * (1.0 - p))
}

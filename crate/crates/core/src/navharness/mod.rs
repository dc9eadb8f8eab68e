//! Closed-loop navigation on the graph and the experiment protocols.
//!
//! One navigation cycle: observe, localize (locally first), plan to the goal,
//! drive toward the first vertex after the current one using the estimated
//! waypoint, then, if maintenance is on, update the traversed edge.

mod collect;
mod config;
mod experiment;
pub mod fixtures;

pub use collect::{collect_trajectory, OdomNoise};
pub use config::{
    ExperimentConfig, ExperimentSection, TrajectorySection, WorldSection,
};
pub use experiment::{
    build_estimator, build_world, collect_configured, configured_test_set, estimate_sigma2,
    make_test_set, nav_params, prepare_experiment, run_lifelong_experiment, Experiment,
};

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridworld::{
    feedback_control, segment_clear, step_agent, AgentState, ControllerGains, FreeSpace, GridMap,
    SensorConfig, VelocityCmd,
};
use crate::maintenance::{
    add_novel_node, apply_traversal_update, expand_for_plan, MaintenanceEvent, MaintenanceParams,
    TraversalOutcome,
};
use crate::perception::{clear_cells, sample_free_pose, Estimator, Observation};
use crate::se2::{wrap_angle, Pose2D};
use crate::topograph::{is_connectable, localize, plan, BuildParams, TopoGraph, TrajectoryPool};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeLimits {
    /// Simulation step limit K.
    pub max_steps: u32,
    pub max_collisions: u32,
    pub pos_tol: f64,
    pub yaw_tol: f64,
    pub recovery_rotation_step: f64,
    pub max_recovery_rotations: u32,
    /// Controller steps allowed per edge before the traversal is abandoned.
    pub edge_step_budget: u32,
}

impl Default for EpisodeLimits {
    fn default() -> Self {
        Self {
            max_steps: 1000,
            max_collisions: 20,
            pos_tol: 0.72,
            yaw_tol: 0.4,
            recovery_rotation_step: PI / 6.0,
            max_recovery_rotations: 12,
            edge_step_budget: 200,
        }
    }
}

impl EpisodeLimits {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_steps > 0
            && self.max_collisions > 0
            && self.pos_tol > 0.0
            && self.yaw_tol > 0.0
            && self.recovery_rotation_step > 0.0
            && self.max_recovery_rotations > 0
            && self.edge_step_budget > 0;
        if !ok {
            return Err(Error::Config(format!("invalid episode limits {self:?}")));
        }
        Ok(())
    }

    pub fn within(&self, a: &Pose2D, b: &Pose2D) -> bool {
        a.distance_to(b) < self.pos_tol && wrap_angle(a.theta - b.theta).abs() < self.yaw_tol
    }
}

/// Everything the episode loop needs besides the graph and the estimator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NavParams {
    pub build: BuildParams,
    pub maintenance: MaintenanceParams,
    pub limits: EpisodeLimits,
}

/// Ground-truth simulator: free space plus the sensor and controller.
#[derive(Clone, Debug)]
pub struct World {
    pub space: Arc<FreeSpace>,
    pub sensor: SensorConfig,
    pub gains: ControllerGains,
}

impl World {
    pub fn new(space: Arc<FreeSpace>, sensor: SensorConfig, gains: ControllerGains) -> Self {
        Self { space, sensor, gains }
    }

    pub fn map(&self) -> &GridMap {
        self.space.map()
    }

    pub fn observe(&self, id: u64, pose: &Pose2D) -> Result<Observation> {
        Observation::capture(self.space.map(), id, *pose, *pose, &self.sensor)
    }
}

/// Hands out ids for observations taken while navigating.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdSource {
    next: u64,
}

impl IdSource {
    pub fn starting_at(base: u64) -> Self {
        Self { next: base }
    }

    pub fn next_id(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }
}

/// Id base for evaluation episode `k`: the same episode always sees the same
/// ids, so re-evaluations of a frozen graph are comparable.
pub fn eval_id_base(k: usize) -> u64 {
    (1 << 40) + ((k as u64) << 20)
}

/// Id base for lifelong query `q`.
pub fn query_id_base(q: usize) -> u64 {
    (1 << 41) + ((q as u64) << 20)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureReason {
    Timeout,
    CollisionLimit,
    Stuck,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureReason::Timeout => "timeout",
            FailureReason::CollisionLimit => "collision_limit",
            FailureReason::Stuck => "stuck",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeResult {
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
    pub steps: u32,
    pub collisions: u32,
    pub edges_traversed: u32,
    pub maintenance_events: Vec<MaintenanceEvent>,
    pub final_pose: Pose2D,
    pub final_pos_error: f64,
    pub final_yaw_error: f64,
}

impl EpisodeResult {
    pub fn log_line(&self, episode: usize) -> String {
        format!(
            "episode={episode} success={} reason={} steps={} collisions={} edges={} pos_err={:.4} yaw_err={:.4} events={}",
            self.success,
            self.failure_reason.map_or("none".to_string(), |r| r.to_string()),
            self.steps,
            self.collisions,
            self.edges_traversed,
            self.final_pos_error,
            self.final_yaw_error,
            self.maintenance_events.len()
        )
    }
}

enum GraphAccess<'a> {
    Frozen(&'a TopoGraph),
    Live(&'a mut TopoGraph, &'a mut TrajectoryPool),
}

impl GraphAccess<'_> {
    fn graph(&self) -> &TopoGraph {
        match self {
            GraphAccess::Frozen(g) => g,
            GraphAccess::Live(g, _) => g,
        }
    }
}

/// Runs one navigation episode from `start` to vertex `goal`.
///
/// With `maintain`, traversal outcomes update edge beliefs, unlocalizable
/// views become vertices and failed plans trigger expansion from the pool.
/// Without it the graph and pool are left untouched.
#[allow(clippy::too_many_arguments)]
pub fn run_episode<E: Estimator>(
    world: &World,
    graph: &mut TopoGraph,
    pool: &mut TrajectoryPool,
    estimator: &E,
    start: Pose2D,
    goal: u64,
    params: &NavParams,
    maintain: bool,
    ids: &mut IdSource,
) -> Result<EpisodeResult> {
    let access = if maintain {
        GraphAccess::Live(graph, pool)
    } else {
        GraphAccess::Frozen(graph)
    };
    episode_loop(world, access, estimator, start, goal, params, ids)
}

/// Frozen-graph episode; usable from several threads at once.
pub fn run_frozen_episode<E: Estimator>(
    world: &World,
    graph: &TopoGraph,
    estimator: &E,
    start: Pose2D,
    goal: u64,
    params: &NavParams,
    ids: &mut IdSource,
) -> Result<EpisodeResult> {
    episode_loop(world, GraphAccess::Frozen(graph), estimator, start, goal, params, ids)
}

fn rotate_in_place(world: &World, state: &AgentState, angle: f64, max_steps: u32) -> AgentState {
    let dt = world.gains.dt;
    let n = ((angle.abs() / (world.gains.omega_max * dt)).ceil() as u32).max(1);
    let cmd = VelocityCmd {
        v: 0.0,
        omega: angle / (n as f64 * dt),
    };
    let mut s = *state;
    for _ in 0..n {
        if s.step_count >= max_steps {
            break;
        }
        s = step_agent(&world.space, &s, &cmd, dt);
    }
    s
}

fn episode_loop<E: Estimator>(
    world: &World,
    mut access: GraphAccess<'_>,
    estimator: &E,
    start: Pose2D,
    goal: u64,
    params: &NavParams,
    ids: &mut IdSource,
) -> Result<EpisodeResult> {
    let limits = &params.limits;
    let goal_pose = access
        .graph()
        .vertex(goal)
        .ok_or(Error::InvalidGoal(goal))?
        .true_pose;
    if !world.space.pose_clear(start.x, start.y) {
        return Err(Error::InvalidPose {
            x: start.x,
            y: start.y,
        });
    }
    let mut state = AgentState::new(start);
    let mut events = Vec::new();
    let mut edges_traversed = 0;
    let mut rotations = 0;
    let mut last_path: Option<Vec<u64>> = None;

    let outcome = loop {
        if state.collision_count > limits.max_collisions {
            break Some(FailureReason::CollisionLimit);
        }
        if limits.within(&state.pose, &goal_pose) {
            break None;
        }
        if state.step_count >= limits.max_steps {
            break Some(FailureReason::Timeout);
        }

        let o_a = world.observe(ids.next_id(), &state.pose)?;
        let mut here = localize(access.graph(), &o_a, estimator, &params.build, last_path.as_deref());
        if here.is_none() && rotations < limits.max_recovery_rotations {
            rotations += 1;
            state = rotate_in_place(world, &state, limits.recovery_rotation_step, limits.max_steps);
            continue;
        }
        if here.is_none() {
            if let GraphAccess::Live(g, p) = &mut access {
                let (v, n) = add_novel_node(g, p, &o_a, estimator, &params.build);
                events.push(MaintenanceEvent::NovelNode {
                    vertex: v,
                    edges_added: n,
                });
                here = Some(v);
            }
        }
        let path = match here {
            None => None,
            Some(h) => match plan(access.graph(), h, goal)? {
                Some(p) => Some(p),
                None => match &mut access {
                    GraphAccess::Live(g, p) => {
                        let seed = params.build.rng_seed ^ o_a.id.rotate_left(17);
                        expand_for_plan(g, p, h, goal, estimator, &params.build, &params.maintenance, seed)?
                            .map(|x| {
                                events.push(MaintenanceEvent::Expansion {
                                    added: x.added.clone(),
                                    path: x.path.clone(),
                                });
                                x.path
                            })
                    }
                    GraphAccess::Frozen(_) => None,
                },
            },
        };
        let Some(path) = path else {
            if rotations >= limits.max_recovery_rotations {
                break Some(FailureReason::Stuck);
            }
            rotations += 1;
            state = rotate_in_place(world, &state, limits.recovery_rotation_step, limits.max_steps);
            continue;
        };
        rotations = 0;

        let here = path[0];
        let sub = *path.get(1).unwrap_or(&path[0]);
        let sub_obs = access.graph().vertex(sub).expect("planned vertex").clone();
        let pred = estimator.predict(&o_a, &sub_obs);
        let target = state.pose.compose(&pred.w_hat);

        let budget_end = state
            .step_count
            .saturating_add(limits.edge_step_budget)
            .min(limits.max_steps);
        let mut first = true;
        loop {
            if !first && state.step_count >= budget_end {
                break;
            }
            let cmd = feedback_control(&state.pose, &target, &world.gains);
            if !first && cmd.is_stop() {
                break;
            }
            let before = state.collision_count;
            state = step_agent(&world.space, &state, &cmd, world.gains.dt);
            first = false;
            if state.collision_count > before {
                break;
            }
        }
        if sub != here {
            edges_traversed += 1;
        }
        last_path = Some(path);

        if let GraphAccess::Live(g, _) = &mut access {
            if sub != here && g.edge(here, sub).is_some() {
                let o_d = world.observe(ids.next_id(), &state.pose)?;
                let succeeded = is_reached(&o_d, &sub_obs, estimator, &params.build);
                let outcome = TraversalOutcome {
                    edge: (here, sub),
                    succeeded,
                    observed_distance: succeeded.then(|| pred.distance()),
                };
                let u = apply_traversal_update(g, &outcome, &params.maintenance)?;
                events.push(MaintenanceEvent::Edge(u));
            }
        }
    };

    Ok(EpisodeResult {
        success: outcome.is_none(),
        failure_reason: outcome,
        steps: state.step_count,
        collisions: state.collision_count,
        edges_traversed,
        maintenance_events: events,
        final_pose: state.pose,
        final_pos_error: state.pose.distance_to(&goal_pose),
        final_yaw_error: wrap_angle(state.pose.theta - goal_pose.theta).abs(),
    })
}

/// Traversal success: the target is confidently reachable from where the
/// agent ended up and no farther than the connect distance. Unlike edge
/// creation there is no lower bound, since arriving on the target is the
/// best outcome.
fn is_reached<E: Estimator>(o_d: &Observation, target: &Observation, estimator: &E, build: &BuildParams) -> bool {
    let relaxed = BuildParams {
        d_m: 0.0,
        ..*build
    };
    is_connectable(o_d, target, estimator, &relaxed).is_some()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub success_rate: f64,
    pub results: Vec<EpisodeResult>,
}

/// Runs the test set on a frozen graph, in parallel, and reports the fraction
/// of successful episodes. Episode `k` always draws ids from
/// [`eval_id_base`]`(k)`.
pub fn evaluate<E: Estimator + Sync>(
    world: &World,
    graph: &TopoGraph,
    estimator: &E,
    test_set: &[(Pose2D, u64)],
    params: &NavParams,
) -> Result<EvalReport> {
    if test_set.is_empty() {
        return Err(Error::InvalidInput("empty test set".into()));
    }
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(test_set.len());
    let chunk = test_set.len().div_ceil(workers);
    let results: Vec<Result<EpisodeResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = test_set
            .chunks(chunk)
            .enumerate()
            .map(|(c, eps)| {
                scope.spawn(move || {
                    eps.iter()
                        .enumerate()
                        .map(|(i, &(start, goal))| {
                            let mut ids = IdSource::starting_at(eval_id_base(c * chunk + i));
                            run_frozen_episode(world, graph, estimator, start, goal, params, &mut ids)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("evaluation worker panicked"))
            .collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let wins = results.iter().filter(|r| r.success).count();
    Ok(EvalReport {
        success_rate: wins as f64 / results.len() as f64,
        results,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalPoint {
    pub queries: usize,
    pub success_rate: f64,
    pub n_vertices: usize,
    pub n_edges: usize,
    /// Edges whose endpoints cannot see each other through the map.
    pub wall_crossing_edges: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LifelongCurve {
    pub points: Vec<EvalPoint>,
}

pub const CURVE_HEADER: &str = "queries,success_rate,n_vertices,n_edges";

impl LifelongCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CURVE_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{},{:.6},{},{}\n",
                p.queries, p.success_rate, p.n_vertices, p.n_edges
            ));
        }
        out
    }
}

/// Counts edges whose straight segment between the endpoints' true
/// positions crosses an occupied cell.
pub fn count_wall_crossing_edges(map: &GridMap, graph: &TopoGraph) -> usize {
    graph
        .edges()
        .filter(|((s, d), _)| {
            let a = graph.vertex(*s).expect("edge source").true_pose;
            let b = graph.vertex(*d).expect("edge target").true_pose;
            !segment_clear(map, a.position(), b.position())
        })
        .count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LifelongRun {
    pub curve: LifelongCurve,
    /// One structured line per query and per maintenance event.
    pub log: Vec<String>,
}

/// Executes `n_queries` random maintained episodes, evaluating the frozen
/// graph on `test_set` before the first query and after every
/// `eval_every` queries.
///
/// Query starts are uniform over free space with a uniform heading; goals
/// are uniform over vertices outside the success tolerance of the start.
#[allow(clippy::too_many_arguments)]
pub fn run_lifelong<E: Estimator + Sync>(
    world: &World,
    graph: &mut TopoGraph,
    pool: &mut TrajectoryPool,
    estimator: &E,
    n_queries: usize,
    eval_every: usize,
    test_set: &[(Pose2D, u64)],
    params: &NavParams,
    seed: u64,
) -> Result<LifelongRun> {
    if n_queries > 0 && (eval_every == 0 || !n_queries.is_multiple_of(eval_every)) {
        return Err(Error::Config(format!(
            "eval_every ({eval_every}) must divide n_queries ({n_queries})"
        )));
    }
    let cells = clear_cells(&world.space);
    if cells.is_empty() {
        return Err(Error::InvalidMap("no free space for query starts".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curve = LifelongCurve::default();
    let mut log = Vec::new();
    let point = |q: usize, g: &TopoGraph, curve: &mut LifelongCurve| -> Result<()> {
        let report = evaluate(world, g, estimator, test_set, params)?;
        curve.points.push(EvalPoint {
            queries: q,
            success_rate: report.success_rate,
            n_vertices: g.n_vertices(),
            n_edges: g.n_edges(),
            wall_crossing_edges: count_wall_crossing_edges(world.map(), g),
        });
        Ok(())
    };
    point(0, graph, &mut curve)?;
    for q in 1..=n_queries {
        let start = sample_free_pose(&world.space, &cells, &mut rng);
        let goals: Vec<u64> = graph
            .vertices()
            .filter(|v| !params.limits.within(&start, &v.true_pose))
            .map(|v| v.id)
            .collect();
        if goals.is_empty() {
            return Err(Error::InvalidInput("graph has no eligible goal vertex".into()));
        }
        let goal = goals[rng.gen_range(0..goals.len())];
        let mut ids = IdSource::starting_at(query_id_base(q));
        let r = run_episode(world, graph, pool, estimator, start, goal, params, true, &mut ids)?;
        log.push(format!("query={q} goal={goal} {}", r.log_line(q)));
        log.extend(r.maintenance_events.iter().map(|e| e.log_line(q as u64)));
        if q % eval_every == 0 {
            point(q, graph, &mut curve)?;
        }
    }
    Ok(LifelongRun { curve, log })
}

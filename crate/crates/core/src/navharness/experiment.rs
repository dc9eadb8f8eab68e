use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{collect_trajectory, run_lifelong, EpisodeLimits, ExperimentConfig, LifelongRun, NavParams, World};
use crate::error::{Error, Result};
use crate::gridworld::FreeSpace;
use crate::perception::{
    distance_error_variance, generate_sim_dataset, Observation, OracleEstimator, ReachabilityCriteria,
    SimDatasetOptions,
};
use crate::se2::Pose2D;
use crate::topograph::{build_graph, TopoGraph, TrajectoryPool};

/// Below this the measured variance is treated as "no noise" and the
/// configured default is kept, since a zero variance would make every later
/// Gaussian update ignore its observation.
const MIN_SIGMA2: f64 = 1e-6;

pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A prepared experiment: world, oracle, trajectory, built graph and the
/// static test set.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub world: World,
    pub estimator: OracleEstimator,
    pub trajectory: Vec<Observation>,
    pub graph: TopoGraph,
    pub pool: TrajectoryPool,
    pub params: NavParams,
    pub test_set: Vec<(Pose2D, u64)>,
}

pub fn build_world(config: &ExperimentConfig) -> Result<World> {
    let space = FreeSpace::new(config.map()?, config.world.robot_radius);
    Ok(World::new(Arc::new(space), config.criteria.sensor(), config.controller))
}

/// Variance of the oracle's distance errors over reachable pairs of a
/// validation split, or `fallback` when it is (numerically) zero.
pub fn estimate_sigma2(
    estimator: &OracleEstimator,
    criteria: &ReachabilityCriteria,
    n_pairs: usize,
    seed: u64,
    fallback: f64,
) -> Result<f64> {
    let opts = SimDatasetOptions {
        seed,
        pair_radius: Some(criteria.e_max),
        heading_offset: Some(criteria.theta_max),
    };
    let (pairs, _) = generate_sim_dataset(&[estimator.space()], n_pairs.max(2), criteria, &opts)?;
    Ok(match distance_error_variance(estimator, &pairs) {
        Some(v) if v > MIN_SIGMA2 => v,
        _ => fallback,
    })
}

/// Static test episodes: `n_goals` goal vertices with at least one incoming
/// edge, spread out by farthest-point selection, paired round-robin with starts drawn from trajectory poses not
/// already within tolerance of the goal.
pub fn make_test_set(
    graph: &TopoGraph,
    trajectory: &[Observation],
    n_goals: usize,
    n_episodes: usize,
    limits: &EpisodeLimits,
    seed: u64,
) -> Result<Vec<(Pose2D, u64)>> {
    if trajectory.is_empty() {
        return Err(Error::InvalidInput("test set needs a graph and a trajectory".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verts: Vec<&Observation> = graph.vertices().filter(|v| graph.in_degree(v.id) > 0).collect();
    if verts.is_empty() {
        return Err(Error::InvalidInput("no vertex has an incoming edge".into()));
    }
    let mut goals = vec![verts[rng.gen_range(0..verts.len())]];
    while goals.len() < n_goals.min(verts.len()) {
        let far = verts
            .iter()
            .filter(|v| !goals.iter().any(|g| g.id == v.id))
            .map(|v| {
                let d = goals
                    .iter()
                    .map(|g| g.true_pose.distance_to(&v.true_pose))
                    .fold(f64::INFINITY, f64::min);
                (d, *v)
            })
            .fold(None, |best: Option<(f64, &Observation)>, (d, v)| match best {
                Some((bd, _)) if bd >= d => best,
                _ => Some((d, v)),
            });
        goals.push(far.expect("unselected vertex").1);
    }
    let mut set = Vec::with_capacity(n_episodes);
    for k in 0..n_episodes {
        let goal = goals[k % goals.len()];
        for _ in 0..1000 {
            let start = trajectory[rng.gen_range(0..trajectory.len())].true_pose;
            if !limits.within(&start, &goal.true_pose) {
                set.push((start, goal.id));
                break;
            }
        }
    }
    if set.is_empty() {
        return Err(Error::InvalidInput("no test episode could be sampled".into()));
    }
    Ok(set)
}

/// The oracle for `config`, with its noise seed derived from the master seed.
pub fn build_estimator(config: &ExperimentConfig, world: &World) -> OracleEstimator {
    let mut noise = config.noise;
    noise.seed = derive_seed(config.experiment.seed, 2);
    OracleEstimator::new(world.space.clone(), config.criteria, noise)
}

/// Navigation parameters for `config`: the build seed comes from the master
/// seed and, if enabled, both edge variances from a validation split.
pub fn nav_params(config: &ExperimentConfig, estimator: &OracleEstimator) -> Result<NavParams> {
    let seed = config.experiment.seed;
    let mut params = NavParams {
        build: config.build,
        maintenance: config.maintenance,
        limits: config.limits,
    };
    params.build.rng_seed = derive_seed(seed, 1);
    if config.experiment.sigma2_from_validation {
        let s2 = estimate_sigma2(
            estimator,
            &config.criteria,
            config.experiment.validation_pairs,
            derive_seed(seed, 6),
            config.build.sigma2,
        )?;
        params.build.sigma2 = s2;
        params.maintenance.sigma2_obs = s2;
    }
    Ok(params)
}

/// Drives the configured route with the configured odometry noise.
pub fn collect_configured(config: &ExperimentConfig, world: &World) -> Result<Vec<Observation>> {
    let mut odom = config.trajectory.odom_noise;
    odom.seed = derive_seed(config.experiment.seed, 5);
    collect_trajectory(world, &config.route(), config.loops(), config.spacing(), &odom)
}

/// Test set for `graph`, seeded from the master seed.
pub fn configured_test_set(
    config: &ExperimentConfig,
    graph: &TopoGraph,
    starts: &[Observation],
) -> Result<Vec<(Pose2D, u64)>> {
    make_test_set(
        graph,
        starts,
        config.experiment.n_goals,
        config.experiment.n_test_episodes,
        &config.limits,
        derive_seed(config.experiment.seed, 3),
    )
}

/// World, trajectory, graph and test set for `config`, all derived from
/// `config.experiment.seed`.
pub fn prepare_experiment(config: &ExperimentConfig) -> Result<Experiment> {
    config.validate()?;
    let world = build_world(config)?;
    let estimator = build_estimator(config, &world);
    let params = nav_params(config, &estimator)?;
    let trajectory = collect_configured(config, &world)?;
    let (graph, pool) = build_graph(&trajectory, &estimator, &params.build)?;
    let test_set = configured_test_set(config, &graph, &trajectory)?;
    Ok(Experiment {
        config: config.clone(),
        world,
        estimator,
        trajectory,
        graph,
        pool,
        params,
        test_set,
    })
}

/// Runs the lifelong protocol on a prepared experiment, mutating its graph
/// and pool.
pub fn run_lifelong_experiment(exp: &mut Experiment) -> Result<LifelongRun> {
    let e = &exp.config.experiment;
    run_lifelong(
        &exp.world,
        &mut exp.graph,
        &mut exp.pool,
        &exp.estimator,
        e.n_queries,
        e.eval_every,
        &exp.test_set,
        &exp.params,
        derive_seed(e.seed, 4),
    )
}

//! C ABI for the `toponav` engine.
//!
//! Every fallible function returns a `ToponavStatus` code; on failure the
//! message is available from [`toponav_last_error`] on the same thread until
//! the next failing call. Handles are opaque and must be released with the
//! matching `_free` function. Results are written through out-pointers, which
//! are left untouched on failure.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use toponav::maintenance::{bayes_connectivity_update, gaussian_weight_update, MaintenanceParams};
use toponav::navharness::{
    evaluate, prepare_experiment, query_id_base, run_episode, Experiment, ExperimentConfig, FailureReason,
    IdSource,
};
use toponav::se2::{dubins_length, waypoint_distance, Pose2D, Waypoint};
use toponav::topograph::{load_graph, plan, save_graph, BuildParams, TopoGraph, TrajectoryPool};
use toponav::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToponavStatus {
    Ok = 0,
    /// The call succeeded but there is no path between the vertices.
    NoPath = 1,
    NullPointer = -1,
    InvalidArgument = -2,
    Load = -3,
    NotFound = -4,
    Io = -5,
    BufferTooSmall = -6,
    Config = -7,
    Runtime = -8,
    Panic = -99,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: ToponavStatus, msg: impl Into<String>) -> ToponavStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> ToponavStatus {
    match e {
        Error::Load { .. } => ToponavStatus::Load,
        Error::Io(_) => ToponavStatus::Io,
        Error::Config(_) => ToponavStatus::Config,
        Error::InvalidVertex(_) | Error::InvalidGoal(_) | Error::EdgeNotFound { .. } => ToponavStatus::NotFound,
        Error::InvalidInput(_) | Error::InvalidPose { .. } | Error::InvalidMap(_) => ToponavStatus::InvalidArgument,
        Error::Route(_) => ToponavStatus::Runtime,
    }
}

fn guard(f: impl FnOnce() -> Result<ToponavStatus, (ToponavStatus, String)>) -> ToponavStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => fail(s, msg),
        Err(_) => fail(ToponavStatus::Panic, "internal panic"),
    }
}

fn core_err(e: Error) -> (ToponavStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(what: &str) -> (ToponavStatus, String) {
    (ToponavStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, (ToponavStatus, String)> {
    str_arg(p, "path").map(PathBuf::from)
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (ToponavStatus, String)> {
    if p.is_null() {
        return Err(null_err(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (ToponavStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (ToponavStatus, String)> {
    p.as_mut().ok_or_else(|| null_err(what))
}

/// Message of the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn toponav_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn toponav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Twist-norm distance of the waypoint `(dx, dy, dtheta)`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn toponav_waypoint_distance(dx: f64, dy: f64, dtheta: f64, out_distance: *mut f64) -> ToponavStatus {
    guard(|| {
        let o = out(out_distance, "out_distance")?;
        *o = waypoint_distance(&Waypoint::new(dx, dy, dtheta));
        Ok(ToponavStatus::Ok)
    })
}

/// Length of the shortest forward Dubins path between two poses.
///
/// # Safety
/// `out_length` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn toponav_dubins_length(
    ax: f64,
    ay: f64,
    atheta: f64,
    bx: f64,
    by: f64,
    btheta: f64,
    turn_radius: f64,
    out_length: *mut f64,
) -> ToponavStatus {
    guard(|| {
        let o = out(out_length, "out_length")?;
        if !(turn_radius > 0.0) {
            return Err((ToponavStatus::InvalidArgument, "turn_radius must be positive".into()));
        }
        *o = dubins_length(&Pose2D::new(ax, ay, atheta), &Pose2D::new(bx, by, btheta), turn_radius);
        Ok(ToponavStatus::Ok)
    })
}

/// Posterior edge existence probability after one traversal attempt.
///
/// # Safety
/// `out_p` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn toponav_bayes_update(
    p: f64,
    succeeded: bool,
    p_s_given_r1: f64,
    p_s_given_r0: f64,
    out_p: *mut f64,
) -> ToponavStatus {
    guard(|| {
        let o = out(out_p, "out_p")?;
        let params = MaintenanceParams {
            p_s_given_r1,
            p_s_given_r0,
            ..MaintenanceParams::default()
        };
        params.validate().map_err(core_err)?;
        if !(0.0..=1.0).contains(&p) {
            return Err((ToponavStatus::InvalidArgument, format!("p = {p} is not a probability")));
        }
        *o = bayes_connectivity_update(p, succeeded, &params);
        Ok(ToponavStatus::Ok)
    })
}

/// Fuses an observed traversal distance into an edge's Gaussian weight.
///
/// # Safety
/// `out_mu` and `out_sigma2` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn toponav_gaussian_update(
    mu: f64,
    sigma2_edge: f64,
    d_obs: f64,
    sigma2_obs: f64,
    out_mu: *mut f64,
    out_sigma2: *mut f64,
) -> ToponavStatus {
    guard(|| {
        let (om, os) = (out(out_mu, "out_mu")?, out(out_sigma2, "out_sigma2")?);
        if !(sigma2_edge > 0.0 && sigma2_obs > 0.0) {
            return Err((ToponavStatus::InvalidArgument, "variances must be positive".into()));
        }
        (*om, *os) = gaussian_weight_update(mu, sigma2_edge, d_obs, sigma2_obs);
        Ok(ToponavStatus::Ok)
    })
}

/// A topological graph with its trajectory pool and build parameters.
pub struct ToponavGraph {
    graph: TopoGraph,
    pool: TrajectoryPool,
    params: BuildParams,
}

/// Loads a graph file.
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out_graph` must be null
/// or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn toponav_graph_load(path: *const c_char, out_graph: *mut *mut ToponavGraph) -> ToponavStatus {
    guard(|| {
        let p = path_arg(path)?;
        let o = out(out_graph, "out_graph")?;
        let (graph, pool, params) = load_graph(p).map_err(core_err)?;
        *o = Box::into_raw(Box::new(ToponavGraph { graph, pool, params }));
        Ok(ToponavStatus::Ok)
    })
}

/// Writes a graph file.
///
/// # Safety
/// `graph` must be null or a live handle; `path` null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn toponav_graph_save(graph: *const ToponavGraph, path: *const c_char) -> ToponavStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null_err("graph"))?;
        let p = path_arg(path)?;
        save_graph(p, &g.graph, &g.pool, &g.params).map_err(core_err)?;
        Ok(ToponavStatus::Ok)
    })
}

/// Releases a graph handle. Null is ignored.
///
/// # Safety
/// `graph` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toponav_graph_free(graph: *mut ToponavGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn toponav_graph_vertex_count(graph: *const ToponavGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.n_vertices())
}

/// Edge count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn toponav_graph_edge_count(graph: *const ToponavGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.n_edges())
}

/// Least-cost path from `start` to `goal`.
///
/// On `Ok` the vertex ids are written to `out_path` and their number to
/// `out_len`. If `capacity` is too small, returns `BufferTooSmall` with the
/// required length in `out_len`. Returns `NoPath` with `out_len` = 0 when the
/// goal is unreachable.
///
/// # Safety
/// `graph` must be null or a live handle; `out_path` must be null or valid
/// for `capacity` writes; `out_len` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn toponav_graph_plan(
    graph: *const ToponavGraph,
    start: u64,
    goal: u64,
    out_path: *mut u64,
    capacity: usize,
    out_len: *mut usize,
) -> ToponavStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null_err("graph"))?;
        let len = out(out_len, "out_len")?;
        let Some(path) = plan(&g.graph, start, goal).map_err(core_err)? else {
            *len = 0;
            return Ok(ToponavStatus::NoPath);
        };
        *len = path.len();
        if path.len() > capacity {
            return Err((
                ToponavStatus::BufferTooSmall,
                format!("path has {} vertices, buffer holds {capacity}", path.len()),
            ));
        }
        if out_path.is_null() {
            return Err(null_err("out_path"));
        }
        ptr::copy_nonoverlapping(path.as_ptr(), out_path, path.len());
        Ok(ToponavStatus::Ok)
    })
}

/// A prepared experiment: world, oracle, built graph and test set.
pub struct ToponavExperiment {
    exp: Experiment,
    queries: usize,
}

/// Prepares an experiment from TOML configuration text (null means all
/// defaults) and a master seed.
///
/// # Safety
/// `config_toml` must be null or NUL-terminated; `out_experiment` null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn toponav_experiment_new(
    config_toml: *const c_char,
    seed: u64,
    out_experiment: *mut *mut ToponavExperiment,
) -> ToponavStatus {
    guard(|| {
        let o = out(out_experiment, "out_experiment")?;
        let mut cfg = if config_toml.is_null() {
            ExperimentConfig::default()
        } else {
            ExperimentConfig::from_toml(str_arg(config_toml, "config_toml")?).map_err(core_err)?
        };
        cfg.experiment.seed = seed;
        let exp = prepare_experiment(&cfg).map_err(core_err)?;
        *o = Box::into_raw(Box::new(ToponavExperiment { exp, queries: 0 }));
        Ok(ToponavStatus::Ok)
    })
}

/// Releases an experiment handle. Null is ignored.
///
/// # Safety
/// `experiment` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toponav_experiment_free(experiment: *mut ToponavExperiment) {
    if !experiment.is_null() {
        drop(Box::from_raw(experiment));
    }
}

/// Copy of the experiment's current graph as a new graph handle.
///
/// # Safety
/// `experiment` must be null or a live handle; `out_graph` null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn toponav_experiment_graph(
    experiment: *const ToponavExperiment,
    out_graph: *mut *mut ToponavGraph,
) -> ToponavStatus {
    guard(|| {
        let e = experiment.as_ref().ok_or_else(|| null_err("experiment"))?;
        let o = out(out_graph, "out_graph")?;
        *o = Box::into_raw(Box::new(ToponavGraph {
            graph: e.exp.graph.clone(),
            pool: e.exp.pool.clone(),
            params: e.exp.params.build,
        }));
        Ok(ToponavStatus::Ok)
    })
}

/// Success rate of the frozen graph on the static test set.
///
/// # Safety
/// `experiment` must be null or a live handle; `out_success_rate` null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn toponav_experiment_evaluate(
    experiment: *const ToponavExperiment,
    out_success_rate: *mut f64,
) -> ToponavStatus {
    guard(|| {
        let e = &experiment.as_ref().ok_or_else(|| null_err("experiment"))?.exp;
        let o = out(out_success_rate, "out_success_rate")?;
        let report = evaluate(&e.world, &e.graph, &e.estimator, &e.test_set, &e.params).map_err(core_err)?;
        *o = report.success_rate;
        Ok(ToponavStatus::Ok)
    })
}

/// Why an episode failed.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToponavFailure {
    None = 0,
    Timeout = 1,
    CollisionLimit = 2,
    Stuck = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToponavEpisodeResult {
    pub success: bool,
    pub failure: ToponavFailure,
    pub steps: u32,
    pub collisions: u32,
    pub edges_traversed: u32,
    pub maintenance_events: u32,
    pub final_x: f64,
    pub final_y: f64,
    pub final_theta: f64,
    pub final_pos_error: f64,
    pub final_yaw_error: f64,
}

/// Runs one episode from `(x, y, theta)` to vertex `goal`. With `maintain`
/// the experiment's graph is updated in place.
///
/// # Safety
/// `experiment` must be null or a live handle; `out_result` null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn toponav_experiment_run_episode(
    experiment: *mut ToponavExperiment,
    x: f64,
    y: f64,
    theta: f64,
    goal: u64,
    maintain: bool,
    out_result: *mut ToponavEpisodeResult,
) -> ToponavStatus {
    guard(|| {
        let h = experiment.as_mut().ok_or_else(|| null_err("experiment"))?;
        let o = out(out_result, "out_result")?;
        h.queries += 1;
        let e = &mut h.exp;
        let mut ids = IdSource::starting_at(query_id_base(h.queries));
        let r = run_episode(
            &e.world,
            &mut e.graph,
            &mut e.pool,
            &e.estimator,
            Pose2D::new(x, y, theta),
            goal,
            &e.params,
            maintain,
            &mut ids,
        )
        .map_err(core_err)?;
        *o = ToponavEpisodeResult {
            success: r.success,
            failure: match r.failure_reason {
                None => ToponavFailure::None,
                Some(FailureReason::Timeout) => ToponavFailure::Timeout,
                Some(FailureReason::CollisionLimit) => ToponavFailure::CollisionLimit,
                Some(FailureReason::Stuck) => ToponavFailure::Stuck,
            },
            steps: r.steps,
            collisions: r.collisions,
            edges_traversed: r.edges_traversed,
            maintenance_events: r.maintenance_events.len() as u32,
            final_x: r.final_pose.x,
            final_y: r.final_pose.y,
            final_theta: r.final_pose.theta,
            final_pos_error: r.final_pos_error,
            final_yaw_error: r.final_yaw_error,
        };
        Ok(ToponavStatus::Ok)
    })
}

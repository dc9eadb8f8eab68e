//! Lifelong graph refinement.
//!
//! Traversal outcomes update each edge's existence probability with a
//! discrete Bayes step and, on success, its distance with a scalar Gaussian
//! filter. Edges whose probability falls below the prune threshold are
//! removed. Unlocalizable observations become new vertices, and failed plans
//! pull observations back from the trajectory pool.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perception::{Estimator, Observation};
use crate::topograph::{connect_to_all, plan, BuildParams, TopoGraph, TrajectoryPool};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaintenanceParams {
    /// Prune threshold on the edge probability after a failure.
    pub r_p: f64,
    /// Likelihood of a successful traversal when the edge exists.
    pub p_s_given_r1: f64,
    /// Likelihood of a successful traversal when it does not.
    pub p_s_given_r0: f64,
    pub relax_d_c_factor: f64,
    pub relax_d_m_factor: f64,
    /// Variance of an observed traversal distance.
    pub sigma2_obs: f64,
}

impl Default for MaintenanceParams {
    fn default() -> Self {
        Self {
            r_p: 0.3,
            p_s_given_r1: 0.9,
            p_s_given_r0: 0.2,
            relax_d_c_factor: 1.5,
            relax_d_m_factor: 0.5,
            sigma2_obs: 0.25,
        }
    }
}

impl MaintenanceParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        let ok = self.r_p > 0.0
            && self.r_p < 1.0
            && unit(self.p_s_given_r1)
            && unit(self.p_s_given_r0)
            && self.p_s_given_r1 > self.p_s_given_r0
            && self.relax_d_c_factor > 1.0
            && self.relax_d_m_factor > 0.0
            && self.relax_d_m_factor < 1.0
            && self.sigma2_obs > 0.0;
        if !ok {
            return Err(Error::Config(format!("invalid maintenance params {self:?}")));
        }
        Ok(())
    }

    /// Build parameters with `d_c` widened and `d_m` narrowed.
    pub fn relaxed(&self, build: &BuildParams) -> BuildParams {
        BuildParams {
            d_c: build.d_c * self.relax_d_c_factor,
            d_m: build.d_m * self.relax_d_m_factor,
            ..*build
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraversalOutcome {
    pub edge: (u64, u64),
    pub succeeded: bool,
    /// Distance from the pre-traversal observation to the target, present
    /// iff the traversal succeeded.
    pub observed_distance: Option<f64>,
}

/// Posterior edge probability after one traversal attempt.
///
/// A failure uses the complementary likelihoods `1 − p(s|r)`. Priors of
/// exactly 0 or 1 are fixed points.
pub fn bayes_connectivity_update(p: f64, succeeded: bool, params: &MaintenanceParams) -> f64 {
    let (l1, l0) = if succeeded {
        (params.p_s_given_r1, params.p_s_given_r0)
    } else {
        (1.0 - params.p_s_given_r1, 1.0 - params.p_s_given_r0)
    };
    let num = l1 * p;
    let evidence = num + l0 * (1.0 - p);
    if evidence <= 0.0 {
        return p;
    }
    num / evidence
}

/// Scalar Gaussian fusion of the edge distance with one observed distance.
pub fn gaussian_weight_update(mu: f64, sigma2_edge: f64, d_obs: f64, sigma2_obs: f64) -> (f64, f64) {
    let s = sigma2_edge + sigma2_obs;
    let mu_post = sigma2_obs / s * mu + sigma2_edge / s * d_obs;
    let var_post = 1.0 / (1.0 / sigma2_edge + 1.0 / sigma2_obs);
    (mu_post, var_post)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeAction {
    Updated,
    Pruned,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeUpdate {
    pub edge: (u64, u64),
    pub succeeded: bool,
    pub old_p: f64,
    pub new_p: f64,
    pub old_mu: f64,
    pub new_mu: f64,
    pub action: EdgeAction,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MaintenanceEvent {
    Edge(EdgeUpdate),
    NovelNode { vertex: u64, edges_added: usize },
    Expansion { added: Vec<u64>, path: Vec<u64> },
}

impl MaintenanceEvent {
    /// One structured log line, tagged with the query that caused it.
    pub fn log_line(&self, query: u64) -> String {
        match self {
            MaintenanceEvent::Edge(u) => format!(
                "query={query} edge={}->{} outcome={} p={:.6}->{:.6} mu={:.6}->{:.6} action={}",
                u.edge.0,
                u.edge.1,
                if u.succeeded { "success" } else { "failure" },
                u.old_p,
                u.new_p,
                u.old_mu,
                u.new_mu,
                match u.action {
                    EdgeAction::Updated => "updated",
                    EdgeAction::Pruned => "pruned",
                }
            ),
            MaintenanceEvent::NovelNode { vertex, edges_added } => {
                format!("query={query} novel_node={vertex} edges_added={edges_added} action=added")
            }
            MaintenanceEvent::Expansion { added, path } => format!(
                "query={query} expansion added={} path={} action=expanded",
                join_ids(added),
                join_ids(path)
            ),
        }
    }
}

fn join_ids(ids: &[u64]) -> String {
    let v: Vec<String> = ids.iter().map(u64::to_string).collect();
    format!("[{}]", v.join(","))
}

impl fmt::Display for MaintenanceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // without a query id the tag reads 0
        f.write_str(&self.log_line(0))
    }
}

/// Applies one traversal outcome to the named edge, and only to it.
pub fn apply_traversal_update(
    graph: &mut TopoGraph,
    outcome: &TraversalOutcome,
    params: &MaintenanceParams,
) -> Result<EdgeUpdate> {
    let (src, dst) = outcome.edge;
    let belief = graph
        .edge_mut(src, dst)
        .ok_or(Error::EdgeNotFound { src, dst })?;
    let old = *belief;
    belief.p = bayes_connectivity_update(old.p, outcome.succeeded, params);
    if outcome.succeeded {
        if let Some(d) = outcome.observed_distance {
            let (mu, s2) = gaussian_weight_update(old.mu, old.sigma2, d, params.sigma2_obs);
            belief.mu = mu;
            belief.sigma2 = s2;
        }
    }
    let new = *belief;
    let action = if !outcome.succeeded && new.p < params.r_p {
        graph.remove_edge(src, dst);
        EdgeAction::Pruned
    } else {
        EdgeAction::Updated
    };
    Ok(EdgeUpdate {
        edge: outcome.edge,
        succeeded: outcome.succeeded,
        old_p: old.p,
        new_p: new.p,
        old_mu: old.mu,
        new_mu: new.mu,
        action,
    })
}

/// Adds an unlocalizable observation as a vertex, connecting it in both
/// directions to every vertex under the standard thresholds. The vertex is
/// kept even when no edge passes.
pub fn add_novel_node<E: Estimator>(
    graph: &mut TopoGraph,
    pool: &mut TrajectoryPool,
    obs: &Observation,
    estimator: &E,
    params: &BuildParams,
) -> (u64, usize) {
    pool.remove(obs.id);
    graph.add_vertex(obs.clone());
    let n = connect_to_all(graph, obs, estimator, params);
    (obs.id, n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub path: Vec<u64>,
    /// Pool observations that joined the graph, in ascending id order.
    pub added: Vec<u64>,
}

/// Pulls observations from the pool, in seeded-shuffle order, until `goal`
/// becomes reachable from `start`.
///
/// Candidates are connected with the relaxed thresholds. Once a path exists
/// only the candidates on it stay; the rest go back to the pool with their
/// edges discarded. If the pool runs out first, graph and pool are restored
/// exactly and `Ok(None)` is returned.
#[allow(clippy::too_many_arguments)]
pub fn expand_for_plan<E: Estimator>(
    graph: &mut TopoGraph,
    pool: &mut TrajectoryPool,
    start: u64,
    goal: u64,
    estimator: &E,
    build: &BuildParams,
    params: &MaintenanceParams,
    seed: u64,
) -> Result<Option<Expansion>> {
    if plan(graph, start, goal)?.is_some() {
        return Err(Error::InvalidInput(format!(
            "{goal} is already reachable from {start}; nothing to expand"
        )));
    }
    let relaxed = params.relaxed(build);
    let saved = (graph.clone(), pool.clone());
    let mut order: Vec<u64> = pool.ids().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut candidates = Vec::new();
    for id in order {
        let obs = pool.remove(id).expect("pooled id");
        graph.add_vertex(obs.clone());
        connect_to_all(graph, &obs, estimator, &relaxed);
        candidates.push(id);
        if let Some(path) = plan(graph, start, goal)? {
            let mut added = Vec::new();
            for c in candidates {
                if path.contains(&c) {
                    added.push(c);
                } else {
                    let o = graph.remove_vertex(c).expect("candidate vertex");
                    pool.insert(o);
                }
            }
            added.sort_unstable();
            return Ok(Some(Expansion { path, added }));
        }
    }
    (*graph, *pool) = saved;
    Ok(None)
}

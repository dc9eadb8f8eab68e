//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p toponav --test acceptance`.

mod common;

use std::f64::consts::{FRAC_PI_2, LN_2, PI, SQRT_2};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toponav::gridworld::{ControllerGains, FreeSpace, SensorConfig, DEFAULT_ROBOT_RADIUS};
use toponav::maintenance::{
    apply_traversal_update, bayes_connectivity_update, gaussian_weight_update, EdgeAction, MaintenanceEvent,
    MaintenanceParams, TraversalOutcome,
};
use toponav::navharness::fixtures::{corridor_map, expansion_fixture};
use toponav::navharness::{
    count_wall_crossing_edges, eval_id_base, prepare_experiment, query_id_base, run_episode, run_frozen_episode,
    run_lifelong_experiment, EpisodeLimits, ExperimentConfig, IdSource, NavParams, World,
};
use toponav::perception::{
    loss_reachability, loss_rotation, loss_total, Estimator, LossWeights, NoiseConfig, OracleEstimator, Prediction,
    ReachabilityCriteria,
};
use toponav::se2::{se2_exp, se2_log, waypoint_distance, Waypoint};
use toponav::topograph::{localize, plan, BuildParams, EdgeBelief};

use common::{enumerate_best_path, hand_bayes, oracle_distance, random_graph};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(t: Instant, limit: Duration) -> Result<(), String> {
    ensure(t.elapsed() < limit, format!("took {:.2?}, limit {limit:?}", t.elapsed()))
}

fn se2_core() -> Check {
    let t = Instant::now();
    let cases = [(Waypoint::new(1.0, 0.0, 0.0), 1.0), (Waypoint::new(0.0, 0.0, FRAC_PI_2), PI / SQRT_2)];
    for (w, want) in cases {
        let got = waypoint_distance(&w);
        let oracle = oracle_distance(&w);
        ensure((got - want).abs() < 1e-9, format!("distance {w:?} = {got}, want {want}"))?;
        ensure((got - oracle).abs() < 1e-9, format!("distance {w:?} = {got}, matrix-log oracle {oracle}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let w = Waypoint::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-PI..PI));
        let back = se2_exp(&se2_log(&w));
        worst = worst
            .max((back.dx - w.dx).abs())
            .max((back.dy - w.dy).abs())
            .max((back.dtheta - w.dtheta).abs());
    }
    ensure(worst < 1e-9, format!("exp(log(w)) error {worst:e}"))?;
    within_time(t, Duration::from_secs(5))?;
    Ok(format!("oracle distances within 1e-9, round-trip max error {worst:.1e} over 10000 waypoints"))
}

fn belief_updates() -> Check {
    let t = Instant::now();
    let mp = MaintenanceParams::default();
    let p = bayes_connectivity_update(0.5, true, &mp);
    ensure((p - 9.0 / 11.0).abs() < 1e-12, format!("bayes(0.5, success) = {p}"))?;
    let (mu, var) = gaussian_weight_update(0.0, 3.0, 4.0, 1.0);
    ensure((mu - 3.0).abs() < 1e-12 && (var - 0.75).abs() < 1e-12, format!("gaussian = ({mu}, {var})"))?;

    let mut g = random_graph(&mut ChaCha8Rng::seed_from_u64(0), 2, 0.0, false);
    g.add_edge(0, 1, EdgeBelief { p: 0.9, mu: 1.0, sigma2: 0.25 }).map_err(|e| e.to_string())?;
    let fail = TraversalOutcome { edge: (0, 1), succeeded: false, observed_distance: None };
    let mut seq = vec![0.9];
    let mut hand = 0.9;
    loop {
        let u = apply_traversal_update(&mut g, &fail, &mp).map_err(|e| e.to_string())?;
        hand = hand_bayes(hand, false, mp.p_s_given_r1, mp.p_s_given_r0);
        ensure((u.new_p - hand).abs() < 1e-9, format!("step {}: {} vs hand {hand}", seq.len(), u.new_p))?;
        seq.push(u.new_p);
        if u.action == EdgeAction::Pruned {
            break;
        }
        ensure(seq.len() < 10, "edge never pruned")?;
    }
    ensure(seq.len() == 3, format!("pruned after {} failures", seq.len() - 1))?;
    ensure((seq[1] - 0.529).abs() < 1e-3 && (seq[2] - 0.123).abs() < 1e-3, format!("sequence {seq:?}"))?;
    ensure(seq[2] < mp.r_p && seq[1] >= mp.r_p, format!("prune threshold crossed wrongly: {seq:?}"))?;
    ensure(g.edge(0, 1).is_none(), "pruned edge still present")?;
    within_time(t, Duration::from_secs(1))?;
    let s: Vec<String> = seq.iter().map(|p| format!("{p:.6}")).collect();
    Ok(format!("bayes 9/11 and gaussian (3, 0.75) within 1e-12, pruning {} < 0.3", s.join(" -> ")))
}

fn sparsity() -> Check {
    let t = Instant::now();
    let mut cfg = ExperimentConfig::for_fixture("apartment").map_err(|e| e.to_string())?;
    cfg.noise = NoiseConfig::noiseless();
    let exp = prepare_experiment(&cfg).map_err(|e| e.to_string())?;
    let (n_traj, n_v) = (exp.trajectory.len(), exp.graph.n_vertices());
    ensure(n_v as f64 <= 0.45 * n_traj as f64, format!("|V| = {n_v} for {n_traj} observations"))?;
    let mut checked = 0;
    for o in exp.trajectory.iter().filter(|o| !exp.graph.contains(o.id)) {
        let v = localize(&exp.graph, o, &exp.estimator, &exp.params.build, None)
            .ok_or_else(|| format!("observation {} does not localize", o.id))?;
        let d = exp.estimator.predict(exp.graph.vertex(v).unwrap(), o).distance();
        ensure(d < exp.params.build.d_loc, format!("observation {} at {d} from vertex {v}", o.id))?;
        checked += 1;
    }
    within_time(t, Duration::from_secs(30))?;
    Ok(format!(
        "|V| = {n_v} <= 0.45 * {n_traj} ({:.3}); {checked}/{checked} non-vertex observations localize within D_loc",
        n_v as f64 / n_traj as f64
    ))
}

fn planner_equivalence() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut queries = 0;
    for k in 0..1000 {
        let n = rng.gen_range(1..=8);
        let density = rng.gen_range(0.1..0.7);
        let g = random_graph(&mut rng, n, density, k % 2 == 0);
        for s in 0..n as u64 {
            for d in 0..n as u64 {
                let got = plan(&g, s, d).map_err(|e| e.to_string())?;
                let want = enumerate_best_path(&g, s, d).map(|(_, p)| p);
                ensure(got == want, format!("graph {k} {s}->{d}: {got:?} vs {want:?}"))?;
                queries += 1;
            }
        }
    }
    within_time(t, Duration::from_secs(30))?;
    Ok(format!("1000 graphs, {queries} queries identical to enumeration"))
}

fn maintenance_efficacy() -> Check {
    let t = Instant::now();
    let seeds = [0u64, 1, 2];
    let mut gains = Vec::new();
    let mut notes = Vec::new();
    for &seed in &seeds {
        let mut cfg = ExperimentConfig::for_fixture("two-room").map_err(|e| e.to_string())?;
        cfg.noise.false_positive_rate = 0.10;
        cfg.experiment.seed = seed;
        let mut exp = prepare_experiment(&cfg).map_err(|e| e.to_string())?;
        let walls0 = count_wall_crossing_edges(exp.world.map(), &exp.graph);
        let run = run_lifelong_experiment(&mut exp).map_err(|e| e.to_string())?;
        let (first, last) = (run.curve.points[0], *run.curve.points.last().unwrap());
        ensure(first.wall_crossing_edges == walls0, "curve disagrees with the initial graph")?;
        ensure(
            last.wall_crossing_edges < first.wall_crossing_edges,
            format!("seed {seed}: wall-crossing edges {} -> {}", first.wall_crossing_edges, last.wall_crossing_edges),
        )?;
        gains.push(last.success_rate - first.success_rate);
        notes.push(format!(
            "seed {seed}: {:.3} -> {:.3}, walls {} -> {}",
            first.success_rate, last.success_rate, first.wall_crossing_edges, last.wall_crossing_edges
        ));
    }
    let mean = gains.iter().sum::<f64>() / gains.len() as f64;
    ensure(mean >= 0.15, format!("mean gain {mean:.3}; {}", notes.join("; ")))?;
    within_time(t, Duration::from_secs(600))?;
    Ok(format!("mean gain {:+.1} pp (>= 15); {}", 100.0 * mean, notes.join("; ")))
}

fn expansion() -> Check {
    let t = Instant::now();
    let template = World::new(
        Arc::new(FreeSpace::new(corridor_map(), DEFAULT_ROBOT_RADIUS)),
        SensorConfig::default(),
        ControllerGains::default(),
    );
    let build = BuildParams::default();
    let (mut fx, est) = expansion_fixture(
        &template,
        |space| OracleEstimator::new(space, ReachabilityCriteria::default(), NoiseConfig::noiseless()),
        &build,
    )
    .map_err(|e| e.to_string())?;
    let params = NavParams {
        build,
        maintenance: MaintenanceParams::default(),
        limits: EpisodeLimits::default(),
    };
    ensure(plan(&fx.graph, 0, fx.goal).map_err(|e| e.to_string())?.is_none(), "goal reachable before expansion")?;
    let before: Vec<u64> = fx.graph.vertex_ids().collect();

    let mut ids = IdSource::starting_at(query_id_base(0));
    let r = run_episode(&fx.world, &mut fx.graph, &mut fx.pool, &est, fx.start, fx.goal, &params, true, &mut ids)
        .map_err(|e| e.to_string())?;
    let expansions: Vec<&Vec<u64>> = r
        .maintenance_events
        .iter()
        .filter_map(|e| match e {
            MaintenanceEvent::Expansion { added, .. } => Some(added),
            _ => None,
        })
        .collect();
    ensure(!expansions.is_empty(), format!("no expansion; {}", r.log_line(0)))?;
    ensure(*expansions[0] == vec![fx.bridge], format!("expansion added {:?}", expansions[0]))?;
    let pool_ids = [fx.bridge, 5, 6];
    let joined: Vec<u64> = fx.graph.vertex_ids().filter(|v| pool_ids.contains(v)).collect();
    ensure(joined == vec![fx.bridge], format!("pool observations in V: {joined:?}"))?;
    ensure(
        before.iter().all(|v| fx.graph.contains(*v)),
        "an original vertex was removed",
    )?;

    let mut ids = IdSource::starting_at(eval_id_base(0));
    let after = run_frozen_episode(&fx.world, &fx.graph, &est, fx.start, fx.goal, &params, &mut ids)
        .map_err(|e| e.to_string())?;
    ensure(after.success, format!("evaluation after expansion failed: {}", after.log_line(0)))?;
    within_time(t, Duration::from_secs(60))?;
    Ok(format!(
        "expansion added [{}] only; maintained episode success={}, evaluation success=true",
        fx.bridge, r.success
    ))
}

fn determinism() -> Check {
    let t = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("lifelong.toml");
    std::fs::write(
        &config,
        "[world]\nfixture = \"two-room\"\n\n[noise]\nfalse_positive_rate = 0.1\n\n[experiment]\nseed = 7\n",
    )
    .map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_toponav"))
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .arg("lifelong")
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), String::from_utf8_lossy(&status.stderr).into_owned())?;
        let read = |f: &str| std::fs::read(out.join(f)).map_err(|e| format!("{f}: {e}"));
        outputs.push((status.stdout, read("curve.csv")?, read("graph.topo")?, read("log.txt")?));
    }
    let (a, b) = (&outputs[0], &outputs[1]);
    ensure(a.0 == b.0, "stdout tables differ")?;
    ensure(a.1 == b.1, "curve.csv differs")?;
    ensure(a.2 == b.2, "graph.topo differs")?;
    ensure(a.3 == b.3, "log.txt differs")?;
    within_time(t, Duration::from_secs(600))?;
    Ok(format!(
        "two runs identical: curve.csv {} bytes, graph.topo {} bytes, log.txt {} bytes",
        a.1.len(),
        a.2.len(),
        a.3.len()
    ))
}

fn losses() -> Check {
    let t = Instant::now();
    let lr = loss_reachability(true, 0.5);
    ensure((lr - LN_2).abs() < 1e-12, format!("loss_reachability(1, 0.5) = {lr}"))?;
    let lt = loss_rotation(FRAC_PI_2, 0.0);
    ensure((lt - 2.0).abs() < 1e-12, format!("loss_rotation(pi/2, 0) = {lt}"))?;
    let weights = LossWeights::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let w = Waypoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-PI..PI));
        let r_hat = rng.gen_range(0.01..0.99);
        let a = Prediction { r_hat, w_hat: Waypoint::new(rng.gen_range(-3.0..3.0), 0.0, 0.0) };
        let b = Prediction {
            r_hat,
            w_hat: Waypoint::new(rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0), rng.gen_range(-PI..PI)),
        };
        let (la, lb) = (loss_total(false, &w, &a, &weights), loss_total(false, &w, &b, &weights));
        ensure(la == lb, format!("r = 0 loss changed with the waypoint: {la} vs {lb}"))?;
    }
    within_time(t, Duration::from_secs(1))?;
    Ok("ln 2 and 2 within 1e-12; r = 0 loss unchanged over 1000 waypoint perturbations".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("SE(2) core", se2_core),
        ("belief update exactness", belief_updates),
        ("graph sparsity", sparsity),
        ("planner equivalence", planner_equivalence),
        ("maintenance efficacy", maintenance_efficacy),
        ("expansion correctness", expansion),
        ("determinism", determinism),
        ("loss formulas", losses),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(msg) => println!("[PASS] criterion {}: {name}: {msg} ({:.2?})", k + 1, t.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {msg} ({:.2?})", k + 1, t.elapsed());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

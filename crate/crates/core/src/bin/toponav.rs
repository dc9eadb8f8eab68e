use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use toponav::gridworld::generate_multi_room;
use toponav::navharness::{
    build_estimator, build_world, collect_configured, configured_test_set, evaluate, nav_params,
    prepare_experiment, run_episode, run_lifelong_experiment, ExperimentConfig, IdSource,
};
use toponav::perception::{
    generate_sim_dataset, loss_position, loss_reachability, loss_rotation, loss_total, read_dataset,
    read_trajectory, write_dataset, write_trajectory, Estimator, SimDatasetOptions,
};
use toponav::se2::Pose2D;
use toponav::topograph::{build_graph, load_graph, save_graph, TopoGraph, TrajectoryPool};
use toponav::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "toponav", version, about = "Topological navigation in a 2D gridworld")]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides `experiment.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file, or output directory for `lifelong`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a multi-room map from `[layout]`.
    GenMap,
    /// Drive the configured route and write the trajectory.
    Collect,
    /// Build a graph from a trajectory file.
    Build {
        #[arg(long)]
        trajectory: PathBuf,
    },
    /// Run one episode and print its result.
    Navigate {
        #[arg(long)]
        graph: PathBuf,
        /// Start pose as `x,y,theta`.
        #[arg(long, value_parser = parse_pose, allow_hyphen_values = true)]
        start: Pose2D,
        #[arg(long)]
        goal: u64,
        /// Update the graph during the episode and write it to `--out`.
        #[arg(long)]
        maintain: bool,
    },
    /// Evaluate a graph (or a freshly built one) on the static test set.
    Evaluate {
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Run the lifelong protocol and write the curve and final graph.
    Lifelong,
    /// Report the mean losses of the oracle on a dataset file.
    Losses {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Sample and label a simulated dataset.
    Dataset {
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
    },
}

fn parse_pose(s: &str) -> std::result::Result<Pose2D, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [x, y, theta] => Ok(Pose2D::new(x, y, theta)),
        _ => Err(format!("expected x,y,theta, got {s:?}")),
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.experiment.seed = s;
    }
    Ok(cfg)
}

fn out_path(cli: &Cli) -> Result<&Path> {
    cli.out
        .as_deref()
        .ok_or_else(|| Error::Config("this subcommand needs --out".into()))
}

fn load_graph_file(path: &Path) -> Result<(TopoGraph, TrajectoryPool, toponav::topograph::BuildParams)> {
    let loaded = load_graph(path)?;
    info!("loaded {} ({} vertices, {} edges)", path.display(), loaded.0.n_vertices(), loaded.0.n_edges());
    Ok(loaded)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::GenMap => {
            let map = generate_multi_room(&cfg.layout, cfg.experiment.seed)?;
            map.save(out_path(cli)?)?;
            info!("map {}x{} cells", map.width(), map.height());
        }
        Command::Collect => {
            let world = build_world(&cfg)?;
            let traj = collect_configured(&cfg, &world)?;
            write_trajectory(out_path(cli)?, &traj)?;
            info!("{} observations", traj.len());
        }
        Command::Build { trajectory } => {
            let out = out_path(cli)?;
            let world = build_world(&cfg)?;
            let est = build_estimator(&cfg, &world);
            let params = nav_params(&cfg, &est)?;
            let traj = read_trajectory(trajectory)?;
            let (graph, pool) = build_graph(&traj, &est, &params.build)?;
            save_graph(out, &graph, &pool, &params.build)?;
            println!(
                "trajectory={} vertices={} edges={} pool={}",
                traj.len(),
                graph.n_vertices(),
                graph.n_edges(),
                pool.len()
            );
        }
        Command::Navigate {
            graph,
            start,
            goal,
            maintain,
        } => {
            let world = build_world(&cfg)?;
            let est = build_estimator(&cfg, &world);
            let mut params = nav_params(&cfg, &est)?;
            let (mut g, mut pool, build) = load_graph_file(graph)?;
            params.build = build;
            let mut ids = IdSource::starting_at(toponav::navharness::query_id_base(0));
            let r = run_episode(&world, &mut g, &mut pool, &est, *start, *goal, &params, *maintain, &mut ids)?;
            println!("{}", r.log_line(0));
            for e in &r.maintenance_events {
                println!("{}", e.log_line(0));
            }
            if *maintain {
                if let Some(out) = &cli.out {
                    save_graph(out, &g, &pool, &params.build)?;
                }
            }
        }
        Command::Evaluate { graph } => {
            let (world, est, params, g, test_set) = match graph {
                Some(path) => {
                    let world = build_world(&cfg)?;
                    let est = build_estimator(&cfg, &world);
                    let mut params = nav_params(&cfg, &est)?;
                    let (g, _, build) = load_graph_file(path)?;
                    params.build = build;
                    let starts: Vec<_> = g.vertices().cloned().collect();
                    let test_set = configured_test_set(&cfg, &g, &starts)?;
                    (world, est, params, g, test_set)
                }
                None => {
                    let e = prepare_experiment(&cfg)?;
                    (e.world, e.estimator, e.params, e.graph, e.test_set)
                }
            };
            let report = evaluate(&world, &g, &est, &test_set, &params)?;
            for (k, r) in report.results.iter().enumerate() {
                println!("goal={} {}", test_set[k].1, r.log_line(k));
            }
            println!("success_rate={:.6}", report.success_rate);
        }
        Command::Lifelong => {
            let mut exp = prepare_experiment(&cfg)?;
            info!(
                "trajectory {} observations, graph {} vertices {} edges",
                exp.trajectory.len(),
                exp.graph.n_vertices(),
                exp.graph.n_edges()
            );
            let run = run_lifelong_experiment(&mut exp)?;
            let table = run.curve.to_csv();
            print!("{table}");
            if let Some(dir) = &cli.out {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("curve.csv"), &table)?;
                fs::write(dir.join("log.txt"), run.log.join("\n") + "\n")?;
                save_graph(dir.join("graph.topo"), &exp.graph, &exp.pool, &exp.params.build)?;
            }
        }
        Command::Losses { dataset } => {
            let (criteria, records) = read_dataset(dataset)?;
            if records.is_empty() {
                return Err(Error::InvalidInput("dataset has no records".into()));
            }
            let mut cfg = cfg;
            cfg.criteria = criteria;
            let world = build_world(&cfg)?;
            let est = build_estimator(&cfg, &world);
            let (mut lr, mut lp, mut lt, mut total, mut n_pos) = (0.0, 0.0, 0.0, 0.0, 0usize);
            for rec in &records {
                let a = world.observe(rec.src_id, &rec.src_pose)?;
                let b = world.observe(rec.dst_id, &rec.dst_pose)?;
                let pred = est.predict(&a, &b);
                lr += loss_reachability(rec.r, pred.r_hat);
                if rec.r {
                    n_pos += 1;
                    lp += loss_position(rec.w.dx, rec.w.dy, pred.w_hat.dx, pred.w_hat.dy);
                    lt += loss_rotation(rec.w.dtheta, pred.w_hat.dtheta);
                }
                total += loss_total(rec.r, &rec.w, &pred, &cfg.loss);
            }
            let n = records.len() as f64;
            let per_pos = |x: f64| if n_pos == 0 { 0.0 } else { x / n_pos as f64 };
            println!(
                "pairs={} positives={} reachability={:.6} position={:.6} rotation={:.6} total={:.6}",
                records.len(),
                n_pos,
                lr / n,
                per_pos(lp),
                per_pos(lt),
                total / n
            );
        }
        Command::Dataset { pairs } => {
            let world = build_world(&cfg)?;
            let opts = SimDatasetOptions {
                seed: cfg.experiment.seed,
                ..SimDatasetOptions::default()
            };
            let (data, summary) = generate_sim_dataset(&[&world.space], *pairs, &cfg.criteria, &opts)?;
            write_dataset(out_path(cli)?, &data, &cfg.criteria)?;
            println!("pairs={} positives={} negatives={}", data.len(), summary.positives, summary.negatives);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

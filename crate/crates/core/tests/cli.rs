use std::path::Path;
use std::process::{Command, Output};

fn toponav(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toponav"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = toponav(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[build]\nd_q = 1\n").unwrap();
    let out = toponav(&["--config", "bad.toml", "collect", "--out", "t.traj"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = toponav(&["collect"], dir.path());
    assert_eq!(out.status.code(), Some(2), "missing --out");
}

#[test]
fn runtime_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = toponav(&["evaluate", "--graph", "missing.topo"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn build_from_single_observation() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[world]\nfixture = \"corridor\"\n").unwrap();
    let out = toponav(&["--config", "c.toml", "--out", "full.traj", "collect"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("full.traj")).unwrap();
    let mut lines = text.lines();
    let one = format!("{}\ncount 1\n{}\n", lines.next().unwrap(), lines.nth(1).unwrap());
    std::fs::write(dir.path().join("one.traj"), one).unwrap();

    let out = toponav(&["--config", "c.toml", "--out", "g.topo", "build", "--trajectory", "one.traj"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (g, pool, _) = toponav::topograph::load_graph(dir.path().join("g.topo")).unwrap();
    assert_eq!((g.n_vertices(), g.n_edges(), pool.len()), (1, 0, 0));
}

#[test]
fn map_dataset_and_losses_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = toponav(&["--seed", "4", "--out", "m.map", "gen-map"], dir.path());
    assert!(out.status.success());
    toponav::gridworld::GridMap::load(dir.path().join("m.map")).unwrap();

    std::fs::write(dir.path().join("c.toml"), "[world]\nfixture = \"two-room\"\n").unwrap();
    let out = toponav(&["--config", "c.toml", "--out", "d.txt", "dataset", "--pairs", "50"], dir.path());
    assert!(out.status.success());
    let out = toponav(&["--config", "c.toml", "losses", "--dataset", "d.txt"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(line.starts_with("pairs=50 "), "{line}");
}

#[test]
fn navigate_prints_episode_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[world]\nfixture = \"corridor\"\n").unwrap();
    assert!(toponav(&["--config", "c.toml", "--out", "t.traj", "collect"], dir.path()).status.success());
    assert!(toponav(&["--config", "c.toml", "--out", "g.topo", "build", "--trajectory", "t.traj"], dir.path())
        .status
        .success());
    let (g, _, _) = toponav::topograph::load_graph(dir.path().join("g.topo")).unwrap();
    let goal = g.vertex_ids().last().unwrap().to_string();
    let out = toponav(
        &["--config", "c.toml", "navigate", "--graph", "g.topo", "--start", "1.0,1.0,0", "--goal", &goal],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("episode=0 success="));
}

//! `topograph/v1` text format.
//!
//! ```text
//! topograph/v1
//! params d_m=<f> d_c=<f> d_loc=<f> r_connect_min=<f> sigma2=<f> rng_seed=<u>
//! vertices <n>
//! o ...                     (one observation record per vertex, ascending id)
//! edges <m>
//! e <src> <dst> <p> <mu> <sigma2>   (ascending (src, dst))
//! pool <k>
//! o ...                     (pooled observations, ascending id)
//! ```
//!
//! Floats are written in shortest round-trip form, so a load after a save
//! reproduces every value bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::{BuildParams, EdgeBelief, TopoGraph, TrajectoryPool};
use crate::error::{Error, Result};
use crate::perception::{parse_observation, write_observation, Observation};

const HEADER: &str = "topograph/v1";

pub fn graph_to_text(graph: &TopoGraph, pool: &TrajectoryPool, params: &BuildParams) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(
        out,
        "params d_m={} d_c={} d_loc={} r_connect_min={} sigma2={} rng_seed={}",
        params.d_m, params.d_c, params.d_loc, params.r_connect_min, params.sigma2, params.rng_seed
    )
    .unwrap();
    writeln!(out, "vertices {}", graph.n_vertices()).unwrap();
    for v in graph.vertices() {
        write_observation(&mut out, v);
    }
    writeln!(out, "edges {}", graph.n_edges()).unwrap();
    for ((s, d), b) in graph.edges() {
        writeln!(out, "e {s} {d} {} {} {}", b.p, b.mu, b.sigma2).unwrap();
    }
    writeln!(out, "pool {}", pool.len()).unwrap();
    for o in pool.iter() {
        write_observation(&mut out, o);
    }
    out
}

fn bad(reason: impl Into<String>) -> Error {
    Error::load("graph", reason)
}

fn section_count<'a>(lines: &mut impl Iterator<Item = &'a str>, name: &str) -> Result<usize> {
    let line = lines.next().ok_or_else(|| bad(format!("missing {name} section")))?;
    line.strip_prefix(name)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| bad(format!("expected '{name} <count>', got {line:?}")))
}

fn parse_params(line: &str) -> Result<BuildParams> {
    let body = line
        .strip_prefix("params ")
        .ok_or_else(|| bad(format!("expected params line, got {line:?}")))?;
    let mut p = BuildParams::default();
    let mut seen = 0;
    for kv in body.split_ascii_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("bad param {kv:?}")))?;
        let f = || v.parse::<f64>().map_err(|_| bad(format!("bad value for {k}")));
        match k {
            "d_m" => p.d_m = f()?,
            "d_c" => p.d_c = f()?,
            "d_loc" => p.d_loc = f()?,
            "r_connect_min" => p.r_connect_min = f()?,
            "sigma2" => p.sigma2 = f()?,
            "rng_seed" => p.rng_seed = v.parse().map_err(|_| bad("bad rng_seed"))?,
            other => return Err(bad(format!("unknown param {other}"))),
        }
        seen += 1;
    }
    if seen != 6 {
        return Err(bad("params line must list all six parameters"));
    }
    Ok(p)
}

fn parse_observations<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    n: usize,
) -> Result<Vec<Observation>> {
    (0..n)
        .map(|_| {
            let line = lines.next().ok_or_else(|| bad("truncated observation section"))?;
            parse_observation(line)
        })
        .collect()
}

pub fn graph_from_text(text: &str) -> Result<(TopoGraph, TrajectoryPool, BuildParams)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == HEADER => {}
        Some(h) => return Err(bad(format!("unsupported header {h:?}, expected {HEADER}"))),
        None => return Err(bad("empty file")),
    }
    let params = parse_params(lines.next().ok_or_else(|| bad("missing params"))?)?;

    let mut graph = TopoGraph::new();
    let nv = section_count(&mut lines, "vertices")?;
    for o in parse_observations(&mut lines, nv)? {
        if graph.contains(o.id) {
            return Err(bad(format!("duplicate vertex {}", o.id)));
        }
        graph.add_vertex(o);
    }

    let ne = section_count(&mut lines, "edges")?;
    for _ in 0..ne {
        let line = lines.next().ok_or_else(|| bad("truncated edge section"))?;
        let f: Vec<&str> = line.split_ascii_whitespace().collect();
        if f.len() != 6 || f[0] != "e" {
            return Err(bad(format!("bad edge record {line:?}")));
        }
        let id = |k: usize| f[k].parse::<u64>().map_err(|_| bad(format!("bad edge record {line:?}")));
        let num = |k: usize| f[k].parse::<f64>().map_err(|_| bad(format!("bad edge record {line:?}")));
        let (s, d) = (id(1)?, id(2)?);
        if graph.edge(s, d).is_some() {
            return Err(bad(format!("duplicate edge {s} -> {d}")));
        }
        let belief = EdgeBelief {
            p: num(3)?,
            mu: num(4)?,
            sigma2: num(5)?,
        };
        graph
            .add_edge(s, d, belief)
            .map_err(|e| bad(format!("edge {s} -> {d}: {e}")))?;
    }

    let np = section_count(&mut lines, "pool")?;
    let mut pool = TrajectoryPool::new();
    for o in parse_observations(&mut lines, np)? {
        if graph.contains(o.id) || pool.contains(o.id) {
            return Err(bad(format!("pool observation {} duplicates an id", o.id)));
        }
        pool.insert(o);
    }
    if let Some(extra) = lines.next() {
        return Err(bad(format!("trailing content {extra:?}")));
    }
    Ok((graph, pool, params))
}

pub fn save_graph(
    path: impl AsRef<Path>,
    graph: &TopoGraph,
    pool: &TrajectoryPool,
    params: &BuildParams,
) -> Result<()> {
    std::fs::write(path, graph_to_text(graph, pool, params))?;
    Ok(())
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<(TopoGraph, TrajectoryPool, BuildParams)> {
    graph_from_text(&std::fs::read_to_string(path)?)
}

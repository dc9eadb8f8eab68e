use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::TopoGraph;
use crate::error::{Error, Result};

/// Heap entry ordered so that `BinaryHeap` pops the cheapest label, then the
/// lexicographically smallest path.
struct Label {
    cost: f64,
    path: Vec<u64>,
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.path.cmp(&self.path))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-`mu` directed path from `start` to `goal`.
///
/// Equal-cost paths are resolved toward the lexicographically smallest
/// vertex-id sequence. `Ok(None)` means no path exists.
pub fn plan(graph: &TopoGraph, start: u64, goal: u64) -> Result<Option<Vec<u64>>> {
    for v in [start, goal] {
        if !graph.contains(v) {
            return Err(Error::InvalidVertex(v));
        }
    }
    // Labels are (cost, path) and extending a label by an edge never makes it
    // smaller, so the first label settled at a vertex is its best.
    let mut settled = BTreeSet::new();
    let mut best: BTreeMap<u64, (f64, Vec<u64>)> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    heap.push(Label {
        cost: 0.0,
        path: vec![start],
    });
    while let Some(Label { cost, path }) = heap.pop() {
        let u = *path.last().expect("non-empty path");
        if !settled.insert(u) {
            continue;
        }
        if u == goal {
            return Ok(Some(path));
        }
        for (v, belief) in graph.out_edges(u) {
            if settled.contains(&v) {
                continue;
            }
            let c = cost + belief.mu;
            let better = match best.get(&v) {
                None => true,
                Some((bc, bp)) => match c.total_cmp(bc) {
                    Ordering::Less => true,
                    Ordering::Equal => path.iter().chain([&v]).lt(bp.iter()),
                    Ordering::Greater => false,
                },
            };
            if better {
                let mut p = path.clone();
                p.push(v);
                best.insert(v, (c, p.clone()));
                heap.push(Label { cost: c, path: p });
            }
        }
    }
    Ok(None)
}

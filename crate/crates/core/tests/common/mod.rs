//! Independent oracles shared by the integration test targets.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::hash::Hash;

use hypertree::treestats::RootedGraph;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Rooted isomorphism by backtracking over bijections that fix the root.
pub fn isomorphic(a: &RootedGraph, b: &RootedGraph) -> bool {
    let n = a.vertex_count();
    if n != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    map[a.root()] = b.root();
    used[b.root()] = true;
    fn extend(a: &RootedGraph, b: &RootedGraph, v: usize, map: &mut [usize], used: &mut [bool]) -> bool {
        let n = map.len();
        if v == n {
            return true;
        }
        if map[v] != usize::MAX {
            return extend(a, b, v + 1, map, used);
        }
        for w in 0..n {
            if used[w] || a.neighbors(v).len() != b.neighbors(w).len() {
                continue;
            }
            let consistent = (0..n)
                .filter(|&u| map[u] != usize::MAX)
                .all(|u| a.neighbors(v).contains(&u) == b.neighbors(w).contains(&map[u]));
            if consistent {
                map[v] = w;
                used[w] = true;
                if extend(a, b, v + 1, map, used) {
                    return true;
                }
                map[v] = usize::MAX;
                used[w] = false;
            }
        }
        false
    }
    extend(a, b, 0, &mut map, &mut used)
}

/// A random connected graph: a random recursive tree plus up to `extra` chords.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> RootedGraph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            edges.push((a, b));
        }
    }
    let root = rng.random_range(0..n);
    RootedGraph::new(n, &edges, root).expect("valid edges")
}

pub fn relabel(g: &RootedGraph, perm: &[usize]) -> RootedGraph {
    let mut edges = Vec::new();
    for v in 0..g.vertex_count() {
        for &u in g.neighbors(v) {
            if v < u {
                edges.push((perm[v], perm[u]));
            }
        }
    }
    RootedGraph::new(g.vertex_count(), &edges, perm[g.root()]).expect("valid edges")
}

/// A random parent array of a recursive tree on `n` vertices rooted at 0.
pub fn random_parents(rng: &mut ChaCha8Rng, n: usize) -> Vec<Option<usize>> {
    (0..n)
        .map(|v| (v > 0).then(|| rng.random_range(0..v)))
        .collect()
}

/// Matchings covering every required vertex, by trying every edge subset.
pub fn brute_matchings(parents: &[Option<usize>], required: &[bool]) -> u64 {
    let edges: Vec<(usize, usize)> = parents
        .iter()
        .enumerate()
        .filter_map(|(v, p)| p.map(|p| (p, v)))
        .collect();
    let mut count = 0;
    for mask in 0u64..1 << edges.len() {
        let mut deg = vec![0u8; parents.len()];
        for (i, &(a, b)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                deg[a] += 1;
                deg[b] += 1;
            }
        }
        if deg.iter().all(|&d| d <= 1) && required.iter().zip(&deg).all(|(&req, &d)| !req || d == 1) {
            count += 1;
        }
    }
    count
}

/// Total variation between two empirical count tables.
pub fn tv_counts<K: Ord + Hash + Clone>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> f64 {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    let keys: BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|key| {
            let pa = a.get(key).copied().unwrap_or(0) as f64 / na as f64;
            let pb = b.get(key).copied().unwrap_or(0) as f64 / nb as f64;
            (pa - pb).abs()
        })
        .sum::<f64>()
}

/// Total variation between an empirical table and a complete law.
pub fn tv_to_law<K: Ord>(counts: &BTreeMap<K, u64>, law: &BTreeMap<K, f64>) -> f64 {
    let total: u64 = counts.values().sum();
    let mut diff: f64 = law
        .iter()
        .map(|(key, p)| (counts.get(key).copied().unwrap_or(0) as f64 / total as f64 - p).abs())
        .sum();
    diff += counts
        .iter()
        .filter(|(key, _)| !law.contains_key(key))
        .map(|(_, &c)| c as f64 / total as f64)
        .sum::<f64>();
    0.5 * diff
}

//! Canonical codes for finite rooted graphs.
//!
//! Trees get the AHU parenthesis code. Other graphs are first stripped of
//! their hanging trees, which become AHU labels on the vertex they hang from;
//! the remaining core is then ordered by colour refinement with
//! individualization, and the lexicographically least adjacency string over
//! all leaves of the search tree is the code.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical form of a rooted graph. Tree codes start with `T`, all others
/// with `G`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalCode(String);

impl CanonicalCode {
    pub fn single_vertex() -> CanonicalCode {
        CanonicalCode("T()".to_string())
    }

    pub(crate) fn tree(ahu: String) -> CanonicalCode {
        CanonicalCode(format!("T{ahu}"))
    }

    /// Accepts a string produced by [`CanonicalCode::as_str`].
    pub fn parse(s: &str) -> Result<CanonicalCode> {
        match s.as_bytes().first() {
            Some(b'T') | Some(b'G') => Ok(CanonicalCode(s.to_string())),
            _ => Err(Error::InvalidParameter(format!("not a canonical code: {s:?}"))),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_tree(&self) -> bool {
        self.0.starts_with('T')
    }

    /// The AHU word of a tree code.
    pub fn ahu(&self) -> Option<&str> {
        self.0.strip_prefix('T')
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A finite simple graph with a distinguished root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedGraph {
    adj: Vec<Vec<usize>>,
    root: usize,
}

impl RootedGraph {
    /// Builds from an edge list; duplicate edges are merged, loops rejected.
    pub fn new(vertices: usize, edges: &[(usize, usize)], root: usize) -> Result<RootedGraph> {
        if root >= vertices {
            return Err(Error::InvalidParameter(format!(
                "root {root} out of range for {vertices} vertices"
            )));
        }
        let mut adj = vec![Vec::new(); vertices];
        for &(a, b) in edges {
            if a >= vertices || b >= vertices || a == b {
                return Err(Error::InvalidParameter(format!("bad edge ({a},{b})")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(RootedGraph { adj, root })
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// BFS distances from the root; `usize::MAX` for unreachable vertices.
    pub fn distances(&self) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.adj.len()];
        dist[self.root] = 0;
        let mut queue = VecDeque::from([self.root]);
        while let Some(v) = queue.pop_front() {
            for &u in &self.adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.distances().iter().all(|&d| d != usize::MAX)
    }

    pub fn is_tree(&self) -> bool {
        self.is_connected() && self.edge_count() + 1 == self.vertex_count()
    }
}

/// Canonical code of a connected rooted graph.
pub fn canonicalize(g: &RootedGraph) -> Result<CanonicalCode> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.vertex_count();
    let mut degree: Vec<usize> = (0..n).map(|v| g.adj[v].len()).collect();
    let mut alive = vec![true; n];
    let mut hanging: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut queue: VecDeque<usize> = (0..n)
        .filter(|&v| v != g.root && degree[v] == 1)
        .collect();
    while let Some(v) = queue.pop_front() {
        let code = ahu_word(&mut hanging[v]);
        alive[v] = false;
        let u = *g.adj[v]
            .iter()
            .find(|&&u| alive[u])
            .expect("a leaf keeps one live neighbour");
        hanging[u].push(code);
        degree[u] -= 1;
        if u != g.root && degree[u] == 1 {
            queue.push_back(u);
        }
    }
    let core: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    if core.len() == 1 {
        return Ok(CanonicalCode::tree(ahu_word(&mut hanging[g.root])));
    }

    let mut index = vec![usize::MAX; n];
    for (i, &v) in core.iter().enumerate() {
        index[v] = i;
    }
    let labels: Vec<String> = core.iter().map(|&v| ahu_word(&mut hanging[v])).collect();
    let adj: Vec<Vec<usize>> = core
        .iter()
        .map(|&v| {
            g.adj[v]
                .iter()
                .filter(|&&u| alive[u])
                .map(|&u| index[u])
                .collect()
        })
        .collect();
    let keys: Vec<(bool, &str)> = core
        .iter()
        .zip(&labels)
        .map(|(&v, l)| (v != g.root, l.as_str()))
        .collect();
    let colors = rank_keys(&keys);
    let core_graph = Core {
        adj: &adj,
        labels: &labels,
    };
    let best = core_graph.search(colors);
    Ok(CanonicalCode(format!("G{}", best)))
}

fn ahu_word(children: &mut [String]) -> String {
    children.sort_unstable();
    let mut s = String::with_capacity(2 + children.iter().map(String::len).sum::<usize>());
    s.push('(');
    for c in children.iter() {
        s.push_str(c);
    }
    s.push(')');
    s
}

/// Dense ranks of `keys` in sorted order.
fn rank_keys<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let distinct: BTreeMap<K, usize> = keys.iter().cloned().map(|k| (k, 0)).collect();
    let order: BTreeMap<K, usize> = distinct
        .into_keys()
        .enumerate()
        .map(|(i, k)| (k, i))
        .collect();
    keys.iter().map(|k| order[k]).collect()
}

struct Core<'a> {
    adj: &'a [Vec<usize>],
    labels: &'a [String],
}

impl Core<'_> {
    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let mut classes = colors.iter().collect::<std::collections::BTreeSet<_>>().len();
        loop {
            let sigs: Vec<(usize, Vec<usize>)> = (0..colors.len())
                .map(|v| {
                    let mut nb: Vec<usize> = self.adj[v].iter().map(|&u| colors[u]).collect();
                    nb.sort_unstable();
                    (colors[v], nb)
                })
                .collect();
            let next = rank_keys(&sigs);
            let next_classes = next.iter().max().map_or(0, |m| m + 1);
            colors = next;
            if next_classes == classes {
                return colors;
            }
            classes = next_classes;
        }
    }

    fn search(&self, colors: Vec<usize>) -> String {
        let colors = self.refine(colors);
        let n = colors.len();
        let mut counts = vec![0usize; n];
        for &c in &colors {
            counts[c] += 1;
        }
        match (0..n).find(|&c| counts[c] > 1) {
            None => self.encode(&colors),
            Some(cell) => (0..n)
                .filter(|&v| colors[v] == cell)
                .map(|v| {
                    let keys: Vec<(usize, bool)> =
                        (0..n).map(|u| (colors[u], u != v)).collect();
                    self.search(rank_keys(&keys))
                })
                .min()
                .expect("cell is nonempty"),
        }
    }

    /// `colors` is a permutation; vertex `v` goes to position `colors[v]`.
    fn encode(&self, colors: &[usize]) -> String {
        let n = colors.len();
        let mut order = vec![0; n];
        for (v, &c) in colors.iter().enumerate() {
            order[c] = v;
        }
        let mut s = format!("{n};");
        for &v in &order {
            s.push_str(&self.labels[v]);
            s.push(',');
        }
        s.push(';');
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = self.adj[order[i]].contains(&order[j]);
                s.push(if adjacent { '1' } else { '0' });
            }
        }
        s
    }
}

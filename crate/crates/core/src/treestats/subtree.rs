//! Proper subtrees of `L_{n,k}` and their finite-`n` probabilities.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow};

use super::{matchings_covering, RootedTree, SemiKaryTree};
use crate::error::{Error, Result};
use crate::faces::{neighbors_big, Face};

/// An induced subtree of `L_{n,k}` that contains all `k+1` small neighbours
/// of each of its big vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProperSubtree {
    n: usize,
    k: usize,
    small: Vec<Face>,
    big: Vec<Face>,
}

impl ProperSubtree {
    pub fn new(n: usize, k: usize, small: Vec<Face>, big: Vec<Face>) -> Result<ProperSubtree> {
        if k == 0 || k >= n {
            return Err(Error::InvalidParameter(format!("need 1 <= k < n, got n={n}, k={k}")));
        }
        for (faces, size) in [(&small, k), (&big, k + 1)] {
            for f in faces.iter() {
                f.check_range(n)?;
                if f.len() != size {
                    return Err(Error::InvalidFace(format!("{f} should have {size} elements")));
                }
            }
            if faces.iter().collect::<BTreeSet<_>>().len() != faces.len() {
                return Err(Error::InvalidParameter("repeated face".to_string()));
            }
        }
        let small_set: BTreeSet<&Face> = small.iter().collect();
        for x in &big {
            if let Some(y) = neighbors_big(x).iter().find(|y| !small_set.contains(y)) {
                return Err(Error::NotProperSubtree(format!("{x} is missing its subface {y}")));
            }
        }
        let t = ProperSubtree { n, k, small, big };
        let vertices = t.small.len() + t.big.len();
        if vertices == 0 {
            return Err(Error::NotProperSubtree("empty vertex set".to_string()));
        }
        if t.edges().len() + 1 != vertices || t.rooted().is_err() {
            return Err(Error::NotProperSubtree("induced subgraph is not a tree".to_string()));
        }
        Ok(t)
    }

    /// The big faces together with all their subfaces.
    pub fn from_big(n: usize, k: usize, big: Vec<Face>) -> Result<ProperSubtree> {
        let small: BTreeSet<Face> = big.iter().flat_map(neighbors_big).collect();
        Self::new(n, k, small.into_iter().collect(), big)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn small_faces(&self) -> &[Face] {
        &self.small
    }

    pub fn big_faces(&self) -> &[Face] {
        &self.big
    }

    /// Containment edges as (small index, big index).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (j, x) in self.big.iter().enumerate() {
            for (i, y) in self.small.iter().enumerate() {
                if y.is_subset_of(x) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// The tree rooted at the first small face (or the only big face);
    /// small faces get ids `0..s`, big faces `s..s+b`.
    pub fn rooted(&self) -> Result<RootedTree> {
        let s = self.small.len();
        let total = s + self.big.len();
        let mut adj = vec![Vec::new(); total];
        for (i, j) in self.edges() {
            adj[i].push(s + j);
            adj[s + j].push(i);
        }
        let mut parents: Vec<Option<usize>> = vec![None; total];
        let mut seen = vec![false; total];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    parents[u] = Some(v);
                    queue.push_back(u);
                }
            }
        }
        if seen.iter().any(|&b| !b) {
            return Err(Error::NotProperSubtree("not connected".to_string()));
        }
        RootedTree::from_parents(&parents)
    }

    /// `m(T)`: matchings covering every big vertex.
    pub fn complete_matching_count(&self) -> BigUint {
        let tree = self.rooted().expect("validated on construction");
        let s = self.small.len();
        let required: Vec<bool> = (0..tree.len()).map(|v| v >= s).collect();
        matchings_covering(&tree, &required)
    }
}

/// `P(T ⊂ G_{n,k}) = m(T) / n^{|V_k(T)|}`.
pub fn finite_subtree_probability(t: &ProperSubtree) -> BigRational {
    let denom = BigInt::from(t.n).pow(t.big.len() as u32);
    BigRational::new(BigInt::from(t.complete_matching_count()), denom)
}

/// Number of complete matchings of `t_prime` extending the complete matching
/// `m` of `t`. Matching edges are given as (big face, small face).
pub fn extension_count(
    t: &ProperSubtree,
    t_prime: &ProperSubtree,
    m: &[(Face, Face)],
) -> Result<BigUint> {
    if t.n != t_prime.n || t.k != t_prime.k {
        return Err(Error::Mismatch("subtrees live in different L_{n,k}".to_string()));
    }
    let small: BTreeSet<&Face> = t.small.iter().collect();
    let big: BTreeSet<&Face> = t.big.iter().collect();
    let small_p: BTreeSet<&Face> = t_prime.small.iter().collect();
    let big_p: BTreeSet<&Face> = t_prime.big.iter().collect();
    if !small.is_subset(&small_p) || !big.is_subset(&big_p) {
        return Err(Error::Precondition("T is not contained in T'".to_string()));
    }
    let new_big: Vec<&Face> = big_p.difference(&big).copied().collect();
    let mut delta: BTreeMap<&Face, u32> = BTreeMap::new();
    for x in &new_big {
        let attached: Vec<&Face> = small.iter().copied().filter(|y| y.is_subset_of(x)).collect();
        if attached.is_empty() {
            return Err(Error::Precondition(format!("{x} has no neighbour in T")));
        }
        for y in attached {
            *delta.entry(y).or_default() += 1;
        }
    }
    let mut matched_big: BTreeSet<&Face> = BTreeSet::new();
    let mut covered: BTreeSet<&Face> = BTreeSet::new();
    for (x, y) in m {
        if !big.contains(x) || !small.contains(y) || !y.is_subset_of(x) {
            return Err(Error::Precondition(format!("({x},{y}) is not an edge of T")));
        }
        if !matched_big.insert(x) || !covered.insert(y) {
            return Err(Error::Precondition("M is not a matching".to_string()));
        }
    }
    if matched_big.len() != big.len() {
        return Err(Error::Precondition("M does not cover every big vertex".to_string()));
    }
    let k = BigUint::from(t.k);
    let mut total = BigUint::one();
    for y in &small {
        let d = delta.get(y).copied().unwrap_or(0);
        let full = Pow::pow(&k, d);
        if covered.contains(y) {
            total *= full;
        } else {
            let partial = if d == 0 {
                BigUint::from(0u8)
            } else {
                BigUint::from(d) * Pow::pow(&k, d - 1)
            };
            total *= partial + full;
        }
    }
    Ok(total)
}

/// `|Ind(T,o; L_{n,k}, [k])|`: injective maps of `tree` into `L_{n,k}` that send
/// the root to `{1..k}` and preserve adjacency and non-adjacency.
pub fn induced_embedding_count(tree: &SemiKaryTree, n: usize) -> Result<BigUint> {
    let k = tree.k();
    if k >= n {
        return Err(Error::InvalidParameter(format!("need k < n, got n={n}, k={k}")));
    }
    let t = tree.tree();
    let order = t.bfs_order().to_vec();
    let mut image: Vec<Option<Face>> = vec![None; t.len()];
    image[t.root()] = Some(Face::new(1..=k as u32)?);
    let mut count = BigUint::from(0u8);
    embed(t, n as u32, &order, 1, &mut image, &mut count);
    Ok(count)
}

fn embed(
    t: &RootedTree,
    n: u32,
    order: &[usize],
    pos: usize,
    image: &mut Vec<Option<Face>>,
    count: &mut BigUint,
) {
    if pos == order.len() {
        *count += 1u8;
        return;
    }
    let v = order[pos];
    let p = t.parent(v).expect("non-root");
    let parent_face = image[p].clone().expect("parents are placed first");
    let candidates: Vec<Face> = if t.level(v) % 2 == 1 {
        (1..=n)
            .filter(|a| !parent_face.contains(*a))
            .map(|a| parent_face.with_vertex(a).expect("a is new"))
            .collect()
    } else {
        neighbors_big(&parent_face)
    };
    for c in candidates {
        let clash = order[..pos].iter().any(|&w| {
            let placed = image[w].as_ref().expect("placed");
            if *placed == c {
                return true;
            }
            let adjacent = if placed.len() < c.len() {
                placed.is_subset_of(&c)
            } else {
                c.is_subset_of(placed) && placed.len() > c.len()
            };
            adjacent && w != p
        });
        if !clash {
            image[v] = Some(c);
            embed(t, n, order, pos + 1, image, count);
            image[v] = None;
        }
    }
}

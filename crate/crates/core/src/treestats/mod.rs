//! Rooted trees, semi-k-ary trees and the closed forms attached to them:
//! automorphism counts, matching counts, the limit law of the skeleton tree
//! and the finite-`n` probability of a proper subtree.

mod canon;
mod shapes;
mod subtree;

pub use canon::{canonicalize, CanonicalCode, RootedGraph};
pub use shapes::enumerate_shapes;
pub use subtree::{extension_count, finite_subtree_probability, induced_embedding_count, ProperSubtree};

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// A finite rooted tree with vertices `0..len`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    level: Vec<usize>,
    /// Vertices in BFS order from the root.
    order: Vec<usize>,
}

impl RootedTree {
    /// Builds from a parent array; exactly one entry is `None` (the root).
    pub fn from_parents(parents: &[Option<usize>]) -> Result<RootedTree> {
        let n = parents.len();
        let roots: Vec<usize> = (0..n).filter(|&v| parents[v].is_none()).collect();
        let [root] = roots[..] else {
            return Err(Error::InvalidParameter(format!(
                "a rooted tree needs exactly one root, found {}",
                roots.len()
            )));
        };
        let mut children = vec![Vec::new(); n];
        for (v, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n || p == v {
                    return Err(Error::InvalidParameter(format!("bad parent {p} of vertex {v}")));
                }
                children[p].push(v);
            }
        }
        let mut level = vec![usize::MAX; n];
        level[root] = 0;
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &c in &children[v] {
                level[c] = level[v] + 1;
                queue.push_back(c);
            }
        }
        if order.len() != n {
            return Err(Error::InvalidParameter(
                "parent array contains a cycle".to_string(),
            ));
        }
        Ok(RootedTree {
            root,
            parent: parents.to_vec(),
            children,
            level,
            order,
        })
    }

    /// Parses the AHU word of a tree code; vertices are numbered in preorder.
    pub fn from_code(code: &CanonicalCode) -> Result<RootedTree> {
        let word = code
            .ahu()
            .ok_or_else(|| Error::InvalidParameter(format!("{code} is not a tree code")))?;
        let mut parents: Vec<Option<usize>> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        for ch in word.chars() {
            match ch {
                '(' if stack.is_empty() && !parents.is_empty() => {
                    return Err(Error::InvalidParameter(format!("{code} has two roots")));
                }
                '(' => {
                    parents.push(stack.last().copied());
                    stack.push(parents.len() - 1);
                }
                ')' => {
                    stack.pop().ok_or_else(|| {
                        Error::InvalidParameter(format!("unbalanced code {code}"))
                    })?;
                }
                _ => return Err(Error::InvalidParameter(format!("bad character in {code}"))),
            }
        }
        if !stack.is_empty() || parents.is_empty() {
            return Err(Error::InvalidParameter(format!("unbalanced code {code}")));
        }
        let tree = RootedTree::from_parents(&parents)?;
        if tree.code() != *code {
            return Err(Error::InvalidParameter(format!("{code} is not in canonical form")));
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn level(&self, v: usize) -> usize {
        self.level[v]
    }

    pub fn height(&self) -> usize {
        self.level.iter().copied().max().unwrap_or(0)
    }

    pub fn bfs_order(&self) -> &[usize] {
        &self.order
    }

    /// AHU codes of every subtree.
    fn subtree_codes(&self) -> Vec<String> {
        let mut codes = vec![String::new(); self.len()];
        for &v in self.order.iter().rev() {
            let mut kids: Vec<&str> = self.children[v].iter().map(|&c| codes[c].as_str()).collect();
            kids.sort_unstable();
            let mut s = String::from("(");
            s.extend(kids);
            s.push(')');
            codes[v] = s;
        }
        codes
    }

    pub fn code(&self) -> CanonicalCode {
        let mut codes = self.subtree_codes();
        CanonicalCode::tree(std::mem::take(&mut codes[self.root]))
    }

    pub fn to_graph(&self) -> RootedGraph {
        let edges: Vec<(usize, usize)> = (0..self.len())
            .filter_map(|v| self.parent[v].map(|p| (p, v)))
            .collect();
        RootedGraph::new(self.len(), &edges, self.root).expect("tree edges are valid")
    }

    /// Order of the rooted automorphism group: the product over vertices of
    /// the factorials of the multiplicities of identical child subtrees.
    pub fn aut_count(&self) -> BigUint {
        let codes = self.subtree_codes();
        let mut total = BigUint::one();
        for v in 0..self.len() {
            let mut mult: BTreeMap<&str, u64> = BTreeMap::new();
            for &c in &self.children[v] {
                *mult.entry(codes[c].as_str()).or_default() += 1;
            }
            for m in mult.into_values() {
                total *= factorial(m);
            }
        }
        total
    }
}

pub(crate) fn factorial(m: u64) -> BigUint {
    (1..=m).fold(BigUint::one(), |acc, i| acc * i)
}

/// Number of matchings of `tree` that cover every vertex with `required[v]`.
pub fn matchings_covering(tree: &RootedTree, required: &[bool]) -> BigUint {
    assert_eq!(required.len(), tree.len(), "one flag per vertex");
    // free[v]: v left unmatched inside its subtree; taken[v]: v matched to a child
    let n = tree.len();
    let mut free = vec![BigUint::zero(); n];
    let mut taken = vec![BigUint::zero(); n];
    for &v in tree.order.iter().rev() {
        let kids = &tree.children[v];
        let settled: Vec<BigUint> = kids
            .iter()
            .map(|&c| {
                let mut g = taken[c].clone();
                if !required[c] {
                    g += &free[c];
                }
                g
            })
            .collect();
        // prefix/suffix products give the product of all-but-one in linear time
        let mut prefix = vec![BigUint::one(); kids.len() + 1];
        for i in 0..kids.len() {
            prefix[i + 1] = &prefix[i] * &settled[i];
        }
        let mut suffix = BigUint::one();
        let mut with_child = BigUint::zero();
        for i in (0..kids.len()).rev() {
            with_child += &free[kids[i]] * &prefix[i] * &suffix;
            suffix *= &settled[i];
        }
        free[v] = prefix[kids.len()].clone();
        taken[v] = with_child;
    }
    let r = tree.root;
    let mut total = taken[r].clone();
    if !required[r] {
        total += &free[r];
    }
    total
}

/// A rooted tree whose odd-level vertices all have exactly `k` children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiKaryTree {
    k: usize,
    tree: RootedTree,
}

/// The ingredients of the limit probability of a ball shape.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitBreakdown {
    pub k: usize,
    pub depth: usize,
    #[serde(serialize_with = "crate::harness::serialize_biguint")]
    pub m_star: BigUint,
    #[serde(serialize_with = "crate::harness::serialize_biguint")]
    pub aut: BigUint,
    pub v_k: usize,
    pub v_k_minus_1_inner: usize,
    pub probability: f64,
}

impl SemiKaryTree {
    pub fn new(k: usize, tree: RootedTree) -> Result<SemiKaryTree> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".to_string()));
        }
        for v in 0..tree.len() {
            if tree.level(v) % 2 == 1 && tree.children(v).len() != k {
                return Err(Error::InvalidParameter(format!(
                    "vertex {v} at odd level {} has {} children, expected {k}",
                    tree.level(v),
                    tree.children(v).len()
                )));
            }
        }
        Ok(SemiKaryTree { k, tree })
    }

    pub fn from_parents(k: usize, parents: &[Option<usize>]) -> Result<SemiKaryTree> {
        Self::new(k, RootedTree::from_parents(parents)?)
    }

    pub fn from_code(k: usize, code: &CanonicalCode) -> Result<SemiKaryTree> {
        Self::new(k, RootedTree::from_code(code)?)
    }

    pub fn single(k: usize) -> SemiKaryTree {
        Self::from_parents(k, &[None]).expect("a single vertex is semi-k-ary")
    }

    /// Root with `d` children, each carrying `k` leaves.
    pub fn star(k: usize, d: usize) -> SemiKaryTree {
        let mut parents = vec![None];
        for _ in 0..d {
            let mid = parents.len();
            parents.push(Some(0));
            parents.extend(std::iter::repeat_n(Some(mid), k));
        }
        Self::from_parents(k, &parents).expect("stars are semi-k-ary")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.tree.height()
    }

    pub fn code(&self) -> CanonicalCode {
        self.tree.code()
    }

    /// `|V_k(T)|`, the odd-level vertices.
    pub fn v_k(&self) -> usize {
        (0..self.len()).filter(|&v| self.tree.level(v) % 2 == 1).count()
    }

    /// Even-level vertices at distance at most `radius` from the root.
    pub fn v_k_minus_1_within(&self, radius: isize) -> usize {
        (0..self.len())
            .filter(|&v| self.tree.level(v).is_multiple_of(2) && (self.tree.level(v) as isize) <= radius)
            .count()
    }

    /// `|V_{k-1}(B_{r-1}(T,o))|` with `r` the depth.
    pub fn inner_small_count(&self) -> usize {
        self.v_k_minus_1_within(self.depth() as isize - 1)
    }

    /// `inte(T,o) = |V_{k-1}(B_{r-2}(T,o))|`.
    pub fn inte(&self) -> usize {
        self.v_k_minus_1_within(self.depth() as isize - 2)
    }

    /// `m(T)`: matchings covering every odd-level vertex.
    pub fn m(&self) -> BigUint {
        let required: Vec<bool> = (0..self.len()).map(|v| self.tree.level(v) % 2 == 1).collect();
        matchings_covering(&self.tree, &required)
    }

    /// `m*(T,o)`: matchings covering the ball of radius `depth - 1`.
    pub fn m_star(&self) -> BigUint {
        let depth = self.depth();
        let required: Vec<bool> = (0..self.len())
            .map(|v| self.tree.level(v) < depth)
            .collect();
        matchings_covering(&self.tree, &required)
    }

    pub fn aut_count(&self) -> BigUint {
        self.tree.aut_count()
    }

    pub fn limit_breakdown(&self) -> LimitBreakdown {
        let inner = self.inner_small_count();
        assert_eq!(inner, self.inte(), "even-depth trees have no odd-level small vertices");
        let m_star = self.m_star();
        let aut = self.aut_count();
        let v_k = self.v_k();
        let probability = if m_star.is_zero() {
            0.0
        } else {
            let k = self.k as f64;
            let ln_kfact: f64 = (1..=self.k).map(|i| (i as f64).ln()).sum();
            (ln_big(&m_star) + v_k as f64 * ln_kfact - k * inner as f64 - ln_big(&aut)).exp()
        };
        LimitBreakdown {
            k: self.k,
            depth: self.depth(),
            m_star,
            aut,
            v_k,
            v_k_minus_1_inner: inner,
            probability,
        }
    }

    /// `P(B_r(𝕋_k,o) ≅ (T,o))` with `r` the depth of `T`.
    pub fn limit_probability(&self) -> f64 {
        self.limit_breakdown().probability
    }
}

pub(crate) fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("fits").ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Limit probability of a ball code, or 0 if the code is not a semi-k-ary
/// tree of depth `r`.
pub fn limit_probability_of_code(k: usize, r: usize, code: &CanonicalCode) -> f64 {
    match SemiKaryTree::from_code(k, code) {
        Ok(t) if t.depth() == r => t.limit_probability(),
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// All matchings of a tree by brute force over edge subsets.
    pub(crate) fn brute_matchings(tree: &RootedTree, required: &[bool]) -> u64 {
        let edges: Vec<(usize, usize)> = (0..tree.len())
            .filter_map(|v| tree.parent(v).map(|p| (p, v)))
            .collect();
        let mut count = 0;
        for mask in 0u64..(1 << edges.len()) {
            let mut cover = vec![0u8; tree.len()];
            for (i, &(a, b)) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    cover[a] += 1;
                    cover[b] += 1;
                }
            }
            if cover.iter().all(|&c| c <= 1)
                && (0..tree.len()).all(|v| !required[v] || cover[v] == 1)
            {
                count += 1;
            }
        }
        count
    }

    /// Rooted automorphisms by brute force over root-fixing permutations.
    fn brute_aut(tree: &RootedTree) -> u64 {
        let n = tree.len();
        let adj = |a: usize, b: usize| tree.parent(a) == Some(b) || tree.parent(b) == Some(a);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut count = 0;
        permute(&mut perm, 0, &mut |p| {
            if p[tree.root()] == tree.root()
                && (0..n).all(|a| (0..n).all(|b| adj(a, b) == adj(p[a], p[b])))
            {
                count += 1;
            }
        });
        count
    }

    fn permute(p: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
        if i == p.len() {
            f(p);
            return;
        }
        for j in i..p.len() {
            p.swap(i, j);
            permute(p, i + 1, f);
            p.swap(i, j);
        }
    }

    pub(crate) fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> RootedTree {
        let parents: Vec<Option<usize>> = (0..n)
            .map(|v| if v == 0 { None } else { Some(rng.random_range(0..v)) })
            .collect();
        RootedTree::from_parents(&parents).unwrap()
    }

    #[test]
    fn parents_validation() {
        assert!(RootedTree::from_parents(&[None, None]).is_err());
        assert!(RootedTree::from_parents(&[Some(1), Some(0)]).is_err());
        assert!(RootedTree::from_parents(&[None, Some(2), Some(1)]).is_err());
        assert!(SemiKaryTree::from_parents(2, &[None, Some(0), Some(1)]).is_err());
    }

    #[test]
    fn code_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.random_range(1..15);
            let t = random_tree(&mut rng, n);
            let code = t.code();
            let back = RootedTree::from_code(&code).unwrap();
            assert_eq!(back.code(), code);
            assert_eq!(back.len(), n);
            assert_eq!(canonicalize(&t.to_graph()).unwrap(), code);
        }
        assert!(RootedTree::from_code(&CanonicalCode::parse("T(()").unwrap()).is_err());
        assert!(RootedTree::from_code(&CanonicalCode::parse("T()()").unwrap()).is_err());
    }

    #[test]
    fn aut_examples() {
        assert_eq!(SemiKaryTree::single(2).aut_count(), BigUint::one());
        for d in 1..=3u64 {
            for k in 1..=2u64 {
                let t = SemiKaryTree::star(k as usize, d as usize);
                let expect = factorial(d) * factorial(k).pow(d as u32);
                assert_eq!(t.aut_count(), expect);
                assert_eq!(BigUint::from(brute_aut(t.tree())), expect);
            }
        }
        // two different depth-2 children: no cross swaps
        let parents = [None, Some(0), Some(1), Some(0), Some(3), Some(3)];
        let t = RootedTree::from_parents(&parents).unwrap();
        assert_eq!(t.aut_count(), BigUint::from(2u8));
        assert_eq!(brute_aut(&t), 2);
    }

    #[test]
    fn aut_matches_brute_force_on_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..60 {
            let n = rng.random_range(1..=8);
            let t = random_tree(&mut rng, n);
            assert_eq!(t.aut_count(), BigUint::from(brute_aut(&t)));
        }
    }

    #[test]
    fn matching_examples() {
        let single = SemiKaryTree::single(1);
        assert_eq!(matchings_covering(single.tree(), &[false]), BigUint::one());
        for d in 1..=3u32 {
            for k in 1..=3u32 {
                let t = SemiKaryTree::star(k as usize, d as usize);
                let m = BigUint::from(k.pow(d) + d * k.pow(d - 1));
                let ms = BigUint::from(d * k.pow(d - 1));
                assert_eq!(t.m(), m);
                assert_eq!(t.m_star(), ms);
                let req_m: Vec<bool> = (0..t.len()).map(|v| t.tree().level(v) == 1).collect();
                let req_ms: Vec<bool> = (0..t.len()).map(|v| t.tree().level(v) <= 1).collect();
                assert_eq!(BigUint::from(brute_matchings(t.tree(), &req_m)), m);
                assert_eq!(BigUint::from(brute_matchings(t.tree(), &req_ms)), ms);
            }
        }
    }

    #[test]
    fn matching_dp_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.random_range(1..=12);
            let t = random_tree(&mut rng, n);
            let required: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
            assert_eq!(
                matchings_covering(&t, &required),
                BigUint::from(brute_matchings(&t, &required))
            );
        }
    }

    #[test]
    fn limit_probability_examples() {
        assert_eq!(SemiKaryTree::single(3).limit_probability(), 1.0);
        let e1 = (-1.0f64).exp();
        assert!((SemiKaryTree::star(1, 1).limit_probability() - e1).abs() < 1e-15);
        assert!((SemiKaryTree::star(1, 1).limit_probability() - 0.36788).abs() < 1e-5);
        for k in 1..=3usize {
            for d in 1..=5usize {
                let expect = (k as f64).powi(d as i32 - 1) * (-(k as f64)).exp()
                    / (1..d).map(|i| i as f64).product::<f64>();
                let got = SemiKaryTree::star(k, d).limit_probability();
                assert!((got - expect).abs() < 1e-14 * expect.max(1.0), "k={k} d={d}");
            }
        }
    }

    #[test]
    fn depth_two_mass_is_complete() {
        for k in 1..=2 {
            let total: f64 = (1..=12).map(|d| SemiKaryTree::star(k, d).limit_probability()).sum();
            assert!(total >= 0.9999, "k={k}: {total}");
        }
    }

    #[test]
    fn code_limit_rejects_non_shapes() {
        assert_eq!(limit_probability_of_code(1, 2, &CanonicalCode::single_vertex()), 0.0);
        let star = SemiKaryTree::star(2, 2).code();
        assert_eq!(limit_probability_of_code(3, 2, &star), 0.0);
        assert!(limit_probability_of_code(2, 2, &star) > 0.0);
    }
}

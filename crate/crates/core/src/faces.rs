//! Faces of the simplex on `[n]` and the bipartite containment graph between
//! its `k`-subsets ("small" faces) and `(k+1)`-subsets ("big" faces).
//!
//! Vertices are 1-based, ranks are 0-based colexicographic positions. Every
//! module indexes dense matrices by these ranks, so the colex convention lives
//! here and nowhere else. A useful consequence: the `k`-subsets of `[n-1]` are
//! exactly the first `C(n-1,k)` small faces.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Vertex = u32;

type Elems = SmallVec<[Vertex; 6]>;

/// A strictly increasing set of vertices in `1..=n`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vertex>", into = "Vec<Vertex>")]
pub struct Face(Elems);

impl Face {
    /// Builds a face from any ordering of distinct positive vertices.
    pub fn new(elems: impl IntoIterator<Item = Vertex>) -> Result<Face> {
        let mut v: Elems = elems.into_iter().collect();
        v.sort_unstable();
        if v.first() == Some(&0) {
            return Err(Error::InvalidFace("vertices are 1-based".into()));
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidFace(format!("duplicate element in {v:?}")));
        }
        Ok(Face(v))
    }

    /// Wraps an already strictly increasing slice. Callers guarantee the invariant.
    pub(crate) fn from_sorted(elems: &[Vertex]) -> Face {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        Face(elems.iter().copied().collect())
    }

    pub fn elements(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &Face) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }

    pub fn intersection_len(&self, other: &Face) -> usize {
        self.0.iter().filter(|v| other.contains(**v)).count()
    }

    pub fn intersection(&self, other: &Face) -> Face {
        Face(self.0.iter().copied().filter(|v| other.contains(*v)).collect())
    }

    pub fn union(&self, other: &Face) -> Face {
        let mut v: Elems = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        Face(v)
    }

    /// The face with the element at sorted position `i` removed.
    pub fn without_index(&self, i: usize) -> Face {
        let mut v = self.0.clone();
        v.remove(i);
        Face(v)
    }

    pub fn with_vertex(&self, a: Vertex) -> Result<Face> {
        if self.contains(a) {
            return Err(Error::InvalidFace(format!("{a} already in {self}")));
        }
        let mut v = self.0.clone();
        let pos = v.partition_point(|x| *x < a);
        v.insert(pos, a);
        Ok(Face(v))
    }

    pub fn max_vertex(&self) -> Option<Vertex> {
        self.0.last().copied()
    }

    pub(crate) fn check_range(&self, n: usize) -> Result<()> {
        match self.max_vertex() {
            Some(m) if m as usize > n => Err(Error::InvalidFace(format!(
                "{self} has an element outside 1..={n}"
            ))),
            _ => Ok(()),
        }
    }
}

impl TryFrom<Vec<Vertex>> for Face {
    type Error = Error;

    fn try_from(v: Vec<Vertex>) -> Result<Face> {
        if v.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidFace(format!(
                "{v:?} is not strictly increasing"
            )));
        }
        Face::new(v)
    }
}

impl From<Face> for Vec<Vertex> {
    fn from(f: Face) -> Vec<Vertex> {
        f.0.into_vec()
    }
}

/// Colex order within a size class; smaller faces sort first.
impl Ord for Face {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.iter().rev().cmp(other.0.iter().rev()))
    }
}

impl PartialOrd for Face {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceClass {
    Small,
    Big,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceRank {
    pub rank: u64,
    pub class: FaceClass,
}

impl PartialOrd for FaceClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FaceClass {
    fn cmp(&self, other: &Self) -> Ordering {
        (*self as u8).cmp(&(*other as u8))
    }
}

/// Exact binomial coefficient, or `None` on overflow.
pub fn binomial(n: u64, m: u64) -> Option<u64> {
    if m > n {
        return Some(0);
    }
    let m = m.min(n - m);
    let mut acc: u128 = 1;
    for i in 0..m {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// Pascal table `C(a, b)` for `a <= n`, `b <= max_b`.
#[derive(Clone, Debug)]
struct BinomialTable {
    width: usize,
    table: Vec<u64>,
}

impl BinomialTable {
    fn new(n: usize, max_b: usize) -> BinomialTable {
        let width = max_b + 1;
        let mut table = vec![0u64; (n + 1) * width];
        for a in 0..=n {
            table[a * width] = 1;
            for b in 1..width.min(a + 1) {
                let up = table[(a - 1) * width + b - 1];
                let left = if b < a { table[(a - 1) * width + b] } else { 0 };
                table[a * width + b] = up.saturating_add(left);
            }
        }
        BinomialTable { width, table }
    }

    #[inline]
    fn get(&self, a: usize, b: usize) -> u64 {
        if b >= self.width {
            return 0;
        }
        self.table[a * self.width + b]
    }
}

/// Colex rank of a face within all same-size subsets of `[n]`.
pub fn colex_rank(face: &Face, n: usize) -> Result<u64> {
    face.check_range(n)?;
    Ok(face
        .elements()
        .iter()
        .enumerate()
        .map(|(i, &e)| binomial(u64::from(e) - 1, i as u64 + 1).expect("rank overflow"))
        .sum())
}

/// Inverse of [`colex_rank`] for subsets of size `size`.
pub fn colex_unrank(rank: u64, size: usize, n: usize) -> Result<Face> {
    let total = binomial(n as u64, size as u64).unwrap_or(u64::MAX);
    if rank >= total {
        return Err(Error::InvalidParameter(format!(
            "rank {rank} out of range for C({n},{size}) = {total}"
        )));
    }
    let mut elems: Elems = SmallVec::from_elem(0, size);
    let mut r = rank;
    let mut upper = n as u64;
    for i in (0..size).rev() {
        // largest c < upper with C(c, i+1) <= r
        let mut c = upper - 1;
        while binomial(c, i as u64 + 1).unwrap_or(u64::MAX) > r {
            c -= 1;
        }
        r -= binomial(c, i as u64 + 1).unwrap();
        elems[i] = c as Vertex + 1;
        upper = c;
    }
    Ok(Face(elems))
}

/// Ranking context for the two face layers of `L_{n,k}`.
#[derive(Clone, Debug)]
pub struct FaceSpace {
    n: usize,
    k: usize,
    binom: BinomialTable,
}

impl FaceSpace {
    pub fn new(n: usize, k: usize) -> Result<FaceSpace> {
        if k == 0 || k >= n {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= k < n, got n={n}, k={k}"
            )));
        }
        if n > u16::MAX as usize {
            return Err(Error::InvalidParameter(format!("n={n} is too large")));
        }
        let binom = BinomialTable::new(n, k + 1);
        if binom.get(n, k + 1) == u64::MAX || binom.get(n, k) == u64::MAX {
            return Err(Error::InvalidParameter(format!(
                "C({n},{}) does not fit in 64 bits",
                k + 1
            )));
        }
        Ok(FaceSpace { n, k, binom })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `C(n, k)`.
    pub fn small_count(&self) -> u64 {
        self.binom.get(self.n, self.k)
    }

    /// `C(n, k+1)`.
    pub fn big_count(&self) -> u64 {
        self.binom.get(self.n, self.k + 1)
    }

    /// `C(n-1, k)`, the number of big faces in a hypertree.
    pub fn hypertree_size(&self) -> u64 {
        self.binom.get(self.n - 1, self.k)
    }

    pub fn class_of(&self, face: &Face) -> Result<FaceClass> {
        match face.len() {
            l if l == self.k => Ok(FaceClass::Small),
            l if l == self.k + 1 => Ok(FaceClass::Big),
            l => Err(Error::InvalidFace(format!(
                "{face} has size {l}, expected {} or {}",
                self.k,
                self.k + 1
            ))),
        }
    }

    pub fn rank(&self, face: &Face) -> Result<FaceRank> {
        let class = self.class_of(face)?;
        face.check_range(self.n)?;
        Ok(FaceRank {
            rank: self.rank_sorted(face.elements()),
            class,
        })
    }

    /// Colex rank of a sorted, in-range slice; no validation.
    #[inline]
    pub fn rank_sorted(&self, elems: &[Vertex]) -> u64 {
        elems
            .iter()
            .enumerate()
            .map(|(i, &e)| self.binom.get(e as usize - 1, i + 1))
            .sum()
    }

    pub fn unrank(&self, r: FaceRank) -> Result<Face> {
        let (size, total) = match r.class {
            FaceClass::Small => (self.k, self.small_count()),
            FaceClass::Big => (self.k + 1, self.big_count()),
        };
        if r.rank >= total {
            return Err(Error::InvalidParameter(format!(
                "rank {} out of range ({total})",
                r.rank
            )));
        }
        let mut out: Elems = SmallVec::from_elem(0, size);
        self.unrank_into(r.rank, &mut out);
        Ok(Face(out))
    }

    pub fn unrank_small(&self, rank: u64) -> Face {
        let mut out: Elems = SmallVec::from_elem(0, self.k);
        self.unrank_into(rank, &mut out);
        Face(out)
    }

    pub fn unrank_big(&self, rank: u64) -> Face {
        let mut out: Elems = SmallVec::from_elem(0, self.k + 1);
        self.unrank_into(rank, &mut out);
        Face(out)
    }

    /// Writes the colex-`rank` subset of size `out.len()` into `out`.
    pub fn unrank_into(&self, rank: u64, out: &mut [Vertex]) {
        let mut r = rank;
        let mut upper = self.n;
        for i in (0..out.len()).rev() {
            // largest c < upper with C(c, i+1) <= r; binary search on the monotone column
            let (mut lo, mut hi) = (i, upper - 1);
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                if self.binom.get(mid, i + 1) <= r {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            r -= self.binom.get(lo, i + 1);
            out[i] = lo as Vertex + 1;
            upper = lo;
        }
    }

    /// All small faces in colex order.
    pub fn small_faces(&self) -> impl Iterator<Item = Face> + '_ {
        (0..self.small_count()).map(move |r| self.unrank_small(r))
    }

    /// All big faces in colex order.
    pub fn big_faces(&self) -> impl Iterator<Item = Face> + '_ {
        (0..self.big_count()).map(move |r| self.unrank_big(r))
    }

    /// The `k+1` small faces contained in a big face, in colex order.
    pub fn neighbors_big(&self, x: &Face) -> Result<Vec<Face>> {
        if x.len() != self.k + 1 {
            return Err(Error::InvalidFace(format!(
                "{x} is not a {}-subset",
                self.k + 1
            )));
        }
        x.check_range(self.n)?;
        Ok(neighbors_big(x))
    }

    /// The `n-k` big faces containing a small face, in colex order.
    pub fn neighbors_small(&self, y: &Face) -> Result<Vec<Face>> {
        if y.len() != self.k {
            return Err(Error::InvalidFace(format!("{y} is not a {}-subset", self.k)));
        }
        y.check_range(self.n)?;
        neighbors_small(y, self.n)
    }

    /// Colex ranks of the small faces of the big face with rank `x`.
    pub fn big_neighbor_ranks(&self, x: u64, out: &mut Vec<u64>) {
        let mut elems: Elems = SmallVec::from_elem(0, self.k + 1);
        self.unrank_into(x, &mut elems);
        out.clear();
        let mut sub: Elems = SmallVec::with_capacity(self.k);
        for skip in (0..=self.k).rev() {
            sub.clear();
            sub.extend(
                elems
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, v)| *v),
            );
            out.push(self.rank_sorted(&sub));
        }
    }
}

/// Subsets of `x` of size `|x|-1`, in colex order (drop the largest element first).
pub fn neighbors_big(x: &Face) -> Vec<Face> {
    (0..x.len()).rev().map(|i| x.without_index(i)).collect()
}

/// Supersets `y ∪ {a}` for `a ∈ [n] \ y`, in colex order.
pub fn neighbors_small(y: &Face, n: usize) -> Result<Vec<Face>> {
    y.check_range(n)?;
    (1..=n as Vertex)
        .filter(|a| !y.contains(*a))
        .map(|a| y.with_vertex(a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: &[u32]) -> Face {
        Face::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(colex_rank(&f(&[1, 2]), 4).unwrap(), 0);
        assert_eq!(colex_rank(&f(&[1, 2, 3]), 5).unwrap(), 0);
        // colex order of pairs of [4]: 12 13 23 14 24 34
        let pairs: Vec<Face> = FaceSpace::new(4, 1).unwrap().big_faces().collect();
        let expected = [[1, 2], [1, 3], [2, 3], [1, 4], [2, 4], [3, 4]];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(pairs[i], f(e));
            assert_eq!(colex_rank(&f(e), 4).unwrap(), i as u64);
        }
        assert_eq!(colex_rank(&f(&[3, 4]), 4).unwrap(), 5);
    }

    #[test]
    fn rank_errors() {
        assert!(Face::new([1, 1]).is_err());
        assert!(Face::new([0, 2]).is_err());
        assert!(colex_rank(&f(&[2, 7]), 6).is_err());
        assert!(Face::try_from(vec![3, 2]).is_err());
        let space = FaceSpace::new(5, 2).unwrap();
        assert!(space.rank(&f(&[1, 2, 3, 4])).is_err());
        assert!(space.neighbors_big(&f(&[1, 2])).is_err());
        assert!(space.neighbors_small(&f(&[1, 2, 3])).is_err());
        assert!(FaceSpace::new(3, 3).is_err());
    }

    #[test]
    fn unrank_inverts_rank_exhaustively() {
        for n in 2..=12 {
            for k in 1..=3.min(n - 1) {
                let space = FaceSpace::new(n, k).unwrap();
                for (class, count) in [
                    (FaceClass::Small, space.small_count()),
                    (FaceClass::Big, space.big_count()),
                ] {
                    let mut prev: Option<Face> = None;
                    for rank in 0..count {
                        let face = space.unrank(FaceRank { rank, class }).unwrap();
                        assert_eq!(space.rank(&face).unwrap(), FaceRank { rank, class });
                        let size = face.len();
                        assert_eq!(colex_unrank(rank, size, n).unwrap(), face);
                        if let Some(p) = prev {
                            assert!(p < face);
                        }
                        prev = Some(face);
                    }
                }
            }
        }
    }

    #[test]
    fn neighbor_examples() {
        assert_eq!(
            neighbors_big(&f(&[1, 2, 3])),
            vec![f(&[1, 2]), f(&[1, 3]), f(&[2, 3])]
        );
        assert_eq!(neighbors_big(&f(&[2, 5])), vec![f(&[2]), f(&[5])]);
        assert_eq!(
            neighbors_small(&f(&[1, 2]), 4).unwrap(),
            vec![f(&[1, 2, 3]), f(&[1, 2, 4])]
        );
        assert_eq!(
            neighbors_small(&f(&[1]), 3).unwrap(),
            vec![f(&[1, 2]), f(&[1, 3])]
        );
    }

    #[test]
    fn adjacency_is_symmetric_and_regular() {
        for n in 2..=8 {
            for k in 1..n {
                let space = FaceSpace::new(n, k).unwrap();
                let bigs: Vec<Face> = space.big_faces().collect();
                let smalls: Vec<Face> = space.small_faces().collect();
                for x in &bigs {
                    let nb = space.neighbors_big(x).unwrap();
                    assert_eq!(nb.len(), k + 1);
                    let mut ranks = Vec::new();
                    space.big_neighbor_ranks(space.rank(x).unwrap().rank, &mut ranks);
                    let expect: Vec<u64> =
                        nb.iter().map(|y| space.rank(y).unwrap().rank).collect();
                    assert_eq!(ranks, expect);
                }
                for y in &smalls {
                    let ns = space.neighbors_small(y).unwrap();
                    assert_eq!(ns.len(), n - k);
                    for x in &bigs {
                        let a = space.neighbors_big(x).unwrap().contains(y);
                        let b = ns.contains(x);
                        assert_eq!(a, b);
                    }
                }
            }
        }
    }

    #[test]
    fn json_is_a_sorted_array() {
        let face = f(&[3, 1, 2]);
        assert_eq!(serde_json::to_string(&face).unwrap(), "[1,2,3]");
        let back: Face = serde_json::from_str("[1,2,3]").unwrap();
        assert_eq!(back, face);
        assert!(serde_json::from_str::<Face>("[2,1]").is_err());
    }
}

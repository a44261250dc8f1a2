//! Ball statistics of sampled complexes and their comparison with the limit.
//!
//! A sample `C` induces the graph `G_{n,k}`: all `k`-subsets of `[n]` (small
//! vertices) plus the faces of `C` (big vertices), joined by containment.
//! Balls around small roots are canonicalized and counted in a
//! [`BallHistogram`].

mod cohen;
mod exact;
mod report;

pub use cohen::{cohen_lenstra_report, eta, p_group_aut_count, sylow_type, CohenLenstraReport, TypeRow};
pub use exact::{exact_ball_law, kernel_star_law};
pub use report::{compare_report, CompareReport, LimitLaw, ShapeRow, MIN_EXPECTED_COUNT};

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigUint;
use rand::Rng;
use serde::{Serialize, Serializer};
use smallvec::SmallVec;

use crate::boundary::Mode;
use crate::enumerate::HypertreeSample;
use crate::error::{Error, Result};
use crate::faces::{Face, FaceSpace};
use crate::par::{map_trials, try_fold_trials, Exec};
use crate::sampler::{ust_sample, DppSampler, Verify, DEFAULT_EXACT_THRESHOLD};
use crate::treestats::{canonicalize, CanonicalCode, RootedGraph};

/// Largest root count for an exhaustive scan.
pub const MAX_ROOT_SCAN: u64 = 100_000;

/// Serializes a big integer as a JSON number when it fits in `u64`, else as a
/// decimal string.
pub fn serialize_biguint<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    match u64::try_from(v) {
        Ok(small) => s.serialize_u64(small),
        Err(_) => s.serialize_str(&v.to_string()),
    }
}

/// Counts of ball codes. Tree and non-tree shapes are kept in separate maps
/// so that non-tree mass is always visible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BallHistogram {
    pub k: usize,
    pub r: usize,
    pub n: Option<usize>,
    pub trials: u64,
    pub observations: u64,
    pub counts: BTreeMap<CanonicalCode, u64>,
    pub non_tree: BTreeMap<CanonicalCode, u64>,
    pub non_tree_count: u64,
    /// Sum and sum of squares of the number of small vertices per ball.
    pub small_vertex_sum: u64,
    pub small_vertex_sq_sum: u64,
}

impl BallHistogram {
    pub fn new(k: usize, r: usize, n: Option<usize>) -> BallHistogram {
        BallHistogram {
            k,
            r,
            n,
            trials: 0,
            observations: 0,
            counts: BTreeMap::new(),
            non_tree: BTreeMap::new(),
            non_tree_count: 0,
            small_vertex_sum: 0,
            small_vertex_sq_sum: 0,
        }
    }

    pub fn record(&mut self, code: CanonicalCode, small_vertices: usize) {
        self.observations += 1;
        self.small_vertex_sum += small_vertices as u64;
        self.small_vertex_sq_sum += (small_vertices * small_vertices) as u64;
        if code.is_tree() {
            *self.counts.entry(code).or_default() += 1;
        } else {
            self.non_tree_count += 1;
            *self.non_tree.entry(code).or_default() += 1;
        }
    }

    pub fn merge(&mut self, other: BallHistogram) -> Result<()> {
        if (self.k, self.r, self.n) != (other.k, other.r, other.n) {
            return Err(Error::Mismatch(format!(
                "cannot merge histograms for (k,r,n) = ({},{},{:?}) and ({},{},{:?})",
                self.k, self.r, self.n, other.k, other.r, other.n
            )));
        }
        self.trials += other.trials;
        self.observations += other.observations;
        self.non_tree_count += other.non_tree_count;
        self.small_vertex_sum += other.small_vertex_sum;
        self.small_vertex_sq_sum += other.small_vertex_sq_sum;
        for (c, v) in other.counts {
            *self.counts.entry(c).or_default() += v;
        }
        for (c, v) in other.non_tree {
            *self.non_tree.entry(c).or_default() += v;
        }
        Ok(())
    }

    pub fn merged(mut self, other: BallHistogram) -> Result<BallHistogram> {
        self.merge(other)?;
        Ok(self)
    }

    pub fn count(&self, code: &CanonicalCode) -> u64 {
        self.counts
            .get(code)
            .or_else(|| self.non_tree.get(code))
            .copied()
            .unwrap_or(0)
    }

    pub fn frequency(&self, code: &CanonicalCode) -> f64 {
        if self.observations == 0 {
            0.0
        } else {
            self.count(code) as f64 / self.observations as f64
        }
    }

    /// Every observed code with its count, trees first.
    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalCode, u64)> {
        self.counts.iter().chain(&self.non_tree).map(|(c, &v)| (c, v))
    }

    pub fn non_tree_mass(&self) -> f64 {
        if self.observations == 0 {
            0.0
        } else {
            self.non_tree_count as f64 / self.observations as f64
        }
    }

    pub fn mean_small_vertices(&self) -> f64 {
        self.small_vertex_sum as f64 / self.observations.max(1) as f64
    }

    /// Standard error of [`Self::mean_small_vertices`].
    pub fn mean_small_vertices_se(&self) -> f64 {
        let n = self.observations.max(1) as f64;
        let mean = self.mean_small_vertices();
        let var = (self.small_vertex_sq_sum as f64 / n - mean * mean).max(0.0);
        (var / n).sqrt()
    }
}

/// The radius-`r` ball around a small root in `G_{n,k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedBall {
    pub root: Face,
    pub graph: RootedGraph,
    pub code: CanonicalCode,
    pub small_vertices: usize,
}

impl RootedBall {
    pub fn is_tree(&self) -> bool {
        self.code.is_tree()
    }
}

/// Incidence index of one sample: for every small face, the sample faces
/// containing it.
pub struct SampleIndex<'a> {
    space: &'a FaceSpace,
    big: &'a [u64],
    incident: HashMap<u64, SmallVec<[u32; 4]>>,
}

impl<'a> SampleIndex<'a> {
    pub fn new(space: &'a FaceSpace, big_ranks: &'a [u64]) -> SampleIndex<'a> {
        let mut incident: HashMap<u64, SmallVec<[u32; 4]>> = HashMap::new();
        let mut subs = Vec::with_capacity(space.k() + 1);
        for (i, &x) in big_ranks.iter().enumerate() {
            space.big_neighbor_ranks(x, &mut subs);
            for &y in &subs {
                incident.entry(y).or_default().push(i as u32);
            }
        }
        SampleIndex {
            space,
            big: big_ranks,
            incident,
        }
    }

    /// Ball of radius `r` around the small face with colex rank `root`.
    pub fn ball(&self, root: u64, r: usize) -> RootedBall {
        #[derive(Clone, Copy, PartialEq, Eq, Hash)]
        enum Node {
            Small(u64),
            Big(u32),
        }
        let mut id: HashMap<Node, usize> = HashMap::new();
        let mut level: Vec<usize> = vec![0];
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut small_vertices = 1;
        id.insert(Node::Small(root), 0);
        let mut queue = VecDeque::from([(Node::Small(root), 0usize)]);
        let mut subs = Vec::with_capacity(self.space.k() + 1);
        while let Some((node, v)) = queue.pop_front() {
            let depth = level[v];
            match node {
                Node::Small(y) => {
                    if depth == r {
                        continue;
                    }
                    for &b in self.incident.get(&y).map(|s| s.as_slice()).unwrap_or(&[]) {
                        let key = Node::Big(b);
                        if let std::collections::hash_map::Entry::Vacant(e) = id.entry(key) {
                            e.insert(level.len());
                            level.push(depth + 1);
                            queue.push_back((key, level.len() - 1));
                        }
                    }
                }
                Node::Big(b) => {
                    // every subface of an included big face lies within the ball
                    self.space.big_neighbor_ranks(self.big[b as usize], &mut subs);
                    for &y in &subs {
                        let key = Node::Small(y);
                        let u = match id.get(&key) {
                            Some(&u) => u,
                            None => {
                                id.insert(key, level.len());
                                level.push(depth + 1);
                                small_vertices += 1;
                                queue.push_back((key, level.len() - 1));
                                level.len() - 1
                            }
                        };
                        edges.push((v, u));
                    }
                }
            }
        }
        let graph = RootedGraph::new(level.len(), &edges, 0).expect("ball edges are valid");
        let code = canonicalize(&graph).expect("balls are connected");
        RootedBall {
            root: self.space.unrank_small(root),
            graph,
            code,
            small_vertices,
        }
    }
}

/// Ball of radius `r` around `root` in the graph induced by `sample`.
pub fn extract_ball(sample: &HypertreeSample, root: &Face, r: usize) -> Result<RootedBall> {
    let space = FaceSpace::new(sample.n, sample.k)?;
    if root.len() != sample.k {
        return Err(Error::InvalidFace(format!("root {root} is not a {}-subset", sample.k)));
    }
    root.check_range(sample.n)?;
    let index = SampleIndex::new(&space, &sample.ranks);
    Ok(index.ball(space.rank_sorted(root.elements()), r))
}

/// Which sampler produces the complexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Wilson for `k = 1`, the projection-DPP sampler otherwise.
    #[default]
    Auto,
    Dpp,
    Wilson,
}

/// Roots examined per sampled complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Roots {
    /// This many independent uniform roots.
    Random(u64),
    /// Every small face.
    All,
}

/// Parameters of a ball-statistics run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallExperiment {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub trials: u64,
    pub roots: Roots,
    pub seed: u64,
    pub source: Source,
    pub mode: Mode,
    #[serde(skip)]
    pub exec: Exec,
}

impl BallExperiment {
    pub fn new(n: usize, k: usize, r: usize, trials: u64, seed: u64) -> BallExperiment {
        BallExperiment {
            n,
            k,
            r,
            trials,
            roots: Roots::Random(1),
            seed,
            source: Source::Auto,
            mode: Mode::auto(n, DEFAULT_EXACT_THRESHOLD),
            exec: Exec::default(),
        }
    }

    fn validate(&self) -> Result<FaceSpace> {
        if self.r % 2 == 1 {
            return Err(Error::InvalidParameter(format!("depth must be even, got {}", self.r)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive".to_string()));
        }
        let space = FaceSpace::new(self.n, self.k)?;
        if self.roots == Roots::All && space.small_count() > MAX_ROOT_SCAN {
            return Err(Error::BudgetExceeded {
                what: format!("root scan at n={}, k={}", self.n, self.k),
                count: space.small_count().to_string(),
                budget: MAX_ROOT_SCAN,
            });
        }
        if self.source == Source::Wilson && self.k != 1 {
            return Err(Error::InvalidParameter("the Wilson sampler needs k = 1".to_string()));
        }
        Ok(space)
    }

    fn sampler(&self) -> Result<Option<DppSampler>> {
        let wilson = match self.source {
            Source::Auto => self.k == 1,
            Source::Wilson => true,
            Source::Dpp => false,
        };
        if wilson {
            Ok(None)
        } else {
            Ok(Some(DppSampler::new(self.n, self.k, self.mode)?))
        }
    }
}

fn draw<R: Rng + Clone>(
    space: &FaceSpace,
    sampler: Option<&DppSampler>,
    rng: &mut R,
    trial: u64,
) -> Result<Vec<u64>> {
    match sampler {
        None => Ok(ust_sample(space, rng).ranks),
        Some(s) => {
            let sample = s.draw(rng, trial, Verify::Default)?;
            Ok(sample.ranks)
        }
    }
}

/// Annealed ball histogram: every trial samples a complex and records the
/// balls at the chosen roots.
pub fn annealed_histogram(exp: &BallExperiment) -> Result<BallHistogram> {
    let space = exp.validate()?;
    let sampler = exp.sampler()?;
    let mut hist = try_fold_trials(
        exp.exec,
        exp.trials,
        || BallHistogram::new(exp.k, exp.r, Some(exp.n)),
        |mut h, t| {
            let mut rng = crate::par::trial_rng(exp.seed, t);
            let ranks = draw(&space, sampler.as_ref(), &mut rng, t)?;
            let index = SampleIndex::new(&space, &ranks);
            match exp.roots {
                Roots::All => {
                    for root in 0..space.small_count() {
                        let ball = index.ball(root, exp.r);
                        h.record(ball.code, ball.small_vertices);
                    }
                }
                Roots::Random(m) => {
                    for _ in 0..m {
                        let root = rng.random_range(0..space.small_count());
                        let ball = index.ball(root, exp.r);
                        h.record(ball.code, ball.small_vertices);
                    }
                }
            }
            Ok::<_, Error>(h)
        },
        |a, b| a.merged(b).expect("same parameters"),
    )?;
    hist.trials = exp.trials;
    Ok(hist)
}

/// Per-trial fraction of all `C(n,k)` roots whose ball has code `target`.
pub fn quenched_statistic(exp: &BallExperiment, target: &CanonicalCode) -> Result<Vec<f64>> {
    let exp = BallExperiment {
        roots: Roots::All,
        ..exp.clone()
    };
    let space = exp.validate()?;
    let sampler = exp.sampler()?;
    let roots = space.small_count();
    map_trials(exp.exec, exp.trials, |t| {
        let mut rng = crate::par::trial_rng(exp.seed, t);
        let ranks = draw(&space, sampler.as_ref(), &mut rng, t)?;
        let index = SampleIndex::new(&space, &ranks);
        let hits = (0..roots)
            .filter(|&root| index.ball(root, exp.r).code == *target)
            .count();
        Ok(hits as f64 / roots as f64)
    })
    .into_iter()
    .collect()
}

/// Mean and unbiased sample variance.
pub fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

/// Upper bound on the expected number of small vertices in a radius-`r` ball:
/// `Σ_{ℓ ≤ r/2} (k(k+1))^ℓ`.
pub fn ball_size_bound(k: usize, r: usize) -> f64 {
    (0..=r / 2).map(|l| ((k * (k + 1)) as f64).powi(l as i32)).sum()
}

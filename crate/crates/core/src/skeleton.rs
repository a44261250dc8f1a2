//! The semi-k-ary skeleton tree `(𝕋_k, o)` and its perfect matching `𝕄_k`,
//! grown level by level and truncated at an even depth `r`.
//!
//! Even-level vertices already matched to their parent get `Poisson(k)`
//! children, unmatched ones `1 + Poisson(k)`, odd-level vertices exactly `k`.
//! An unmatched vertex then matches one of its new children. Vertices at level
//! `r` get no children; their matching decisions stay pending.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::BallHistogram;
use crate::par::{fold_trials, trial_rng, Trials};
use crate::treestats::{CanonicalCode, RootedTree, SemiKaryTree};

/// Default bound on the truncation depth.
pub const DEFAULT_MAX_DEPTH: usize = 8;

const POISSON_TERMS: usize = 50;

/// Poisson sampler by inversion of a fixed 50-term CDF table. The table is
/// built with IEEE basic arithmetic only, and the tail beyond the table is
/// folded into its last bucket.
#[derive(Clone, Debug)]
pub struct PoissonTable {
    cdf: [f64; POISSON_TERMS],
}

impl PoissonTable {
    pub fn new(mean: f64) -> PoissonTable {
        assert!(mean.is_finite() && mean >= 0.0, "Poisson mean must be finite and nonnegative");
        // e^{-mean} as the reciprocal of the exponential series, so no libm call
        let mut terms = [0.0; 4 * POISSON_TERMS];
        terms[0] = 1.0;
        for i in 1..terms.len() {
            terms[i] = terms[i - 1] * mean / i as f64;
        }
        let total: f64 = terms.iter().sum();
        let mut cdf = [0.0; POISSON_TERMS];
        let mut acc = 0.0;
        for i in 0..POISSON_TERMS {
            acc += terms[i] / total;
            cdf[i] = acc;
        }
        PoissonTable { cdf }
    }

    pub fn pmf(&self, i: usize) -> f64 {
        match i {
            0 => self.cdf[0],
            i if i < POISSON_TERMS => self.cdf[i] - self.cdf[i - 1],
            _ => 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf
            .iter()
            .position(|&c| u < c)
            .unwrap_or(POISSON_TERMS - 1)
    }
}

/// How an unmatched vertex picks the child it is matched to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MatchChoice {
    #[default]
    Uniform,
    /// Always the first child; gives the same law on unordered shapes.
    First,
}

/// A depth-`r` truncation of the skeleton tree. Vertex 0 is the root and
/// children are listed in creation order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkeletonBall {
    pub k: usize,
    pub depth: usize,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub level: Vec<usize>,
    pub mate: Vec<Option<usize>>,
}

impl SkeletonBall {
    fn push(&mut self, parent: usize) -> usize {
        let v = self.parent.len();
        self.parent.push(Some(parent));
        self.children.push(Vec::new());
        self.level.push(self.level[parent] + 1);
        self.mate.push(None);
        self.children[parent].push(v);
        v
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn child_count(&self, v: usize) -> usize {
        self.children[v].len()
    }

    /// Matching edges as (parent, child).
    pub fn matched_edges(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .filter_map(|v| match (self.parent[v], self.mate[v]) {
                (Some(p), Some(m)) if p == m => Some((p, v)),
                _ => None,
            })
            .collect()
    }

    pub fn to_tree(&self) -> SemiKaryTree {
        let tree = RootedTree::from_parents(&self.parent).expect("generated parents form a tree");
        SemiKaryTree::new(self.k, tree).expect("odd levels have k children")
    }

    pub fn code(&self) -> CanonicalCode {
        self.to_tree().code()
    }

    /// Number of even-level vertices.
    pub fn small_vertex_count(&self) -> usize {
        self.level.iter().filter(|&&l| l % 2 == 0).count()
    }
}

fn check_depth(r: usize, cap: usize) -> Result<()> {
    if r % 2 == 1 {
        return Err(Error::InvalidParameter(format!("depth must be even, got {r}")));
    }
    if r > cap {
        return Err(Error::BudgetExceeded {
            what: "skeleton depth".to_string(),
            count: r.to_string(),
            budget: cap as u64,
        });
    }
    Ok(())
}

/// Grows one ball of radius `r`.
pub fn generate_ball<R: Rng + ?Sized>(
    k: usize,
    r: usize,
    choice: MatchChoice,
    poisson: &PoissonTable,
    rng: &mut R,
) -> SkeletonBall {
    let mut ball = SkeletonBall {
        k,
        depth: r,
        parent: vec![None],
        children: vec![Vec::new()],
        level: vec![0],
        mate: vec![None],
    };
    let mut frontier = vec![0];
    for level in 0..r {
        let mut next = Vec::new();
        for &v in &frontier {
            let c = if level % 2 == 1 {
                k
            } else if ball.mate[v].is_some() {
                poisson.sample(rng)
            } else {
                1 + poisson.sample(rng)
            };
            for _ in 0..c {
                next.push(ball.push(v));
            }
            if ball.mate[v].is_none() {
                let j = match choice {
                    MatchChoice::Uniform => rng.random_range(0..c),
                    MatchChoice::First => 0,
                };
                let u = ball.children[v][j];
                ball.mate[v] = Some(u);
                ball.mate[u] = Some(v);
            }
        }
        frontier = next;
    }
    ball
}

/// One ball on the stream `(seed, 0)`.
pub fn generate_skeleton_ball(k: usize, r: usize, seed: u64) -> Result<SkeletonBall> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".to_string()));
    }
    check_depth(r, DEFAULT_MAX_DEPTH)?;
    let poisson = PoissonTable::new(k as f64);
    Ok(generate_ball(k, r, MatchChoice::Uniform, &poisson, &mut trial_rng(seed, 0)))
}

/// Histogram of `B_r(𝕋_k, o)` codes over `trials` independent balls.
pub fn ball_distribution_mc(k: usize, r: usize, trials: u64, seed: u64) -> Result<BallHistogram> {
    ball_distribution(k, r, Trials::new(trials, seed), MatchChoice::Uniform, DEFAULT_MAX_DEPTH)
}

pub fn ball_distribution(
    k: usize,
    r: usize,
    trials: Trials,
    choice: MatchChoice,
    max_depth: usize,
) -> Result<BallHistogram> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".to_string()));
    }
    check_depth(r, max_depth)?;
    let poisson = PoissonTable::new(k as f64);
    let mut hist = fold_trials(
        trials.exec,
        trials.count,
        || BallHistogram::new(k, r, None),
        |mut h, t| {
            let ball = generate_ball(k, r, choice, &poisson, &mut trials.rng(t));
            h.record(ball.code(), ball.small_vertex_count());
            h
        },
        |a, b| a.merged(b).expect("same parameters"),
    );
    hist.trials = trials.count;
    Ok(hist)
}

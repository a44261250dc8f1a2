//! Samplers for `ν_{n,k}`.
//!
//! [`DppSampler`] is the chain-rule sampler for the projection kernel
//! `P_{n,k}`: pick an item with probability proportional to the current
//! diagonal, condition on it, repeat `C(n-1,k)` times.
//!
//! In exact mode the conditioning runs on the integer matrix `A = n·P` with
//! symmetric Bareiss updates. After conditioning on a set `S` the working entry
//! `(i,j)` equals the bordered minor `det A[S+i, S+j]`, so the diagonal gives
//! integer selection weights `det A[S+i]` whose sum is `n·(r-|S|)·det A[S]`.
//! Draws compare a uniform integer against exact cumulative weights; there is
//! no rounding anywhere. Arithmetic runs in checked `i128` and restarts in
//! arbitrary precision on overflow with the same random stream, which yields
//! the identical sample.
//!
//! [`sample_ust`] draws a uniform spanning tree of `K_n` with Wilson's
//! loop-erased random walks and serves as an independent witness for `k = 1`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::boundary::{build_kernel_capped, Kernel, Mode, DEFAULT_MAX_KERNEL_DIM};
use crate::enumerate::{reduced_determinant, HypertreeSample};
use crate::error::{Error, Result};
use crate::faces::FaceSpace;
use crate::par::trial_rng;

/// Smallest admissible pivot in float mode.
pub const FLOAT_PIVOT_TOLERANCE: f64 = 1e-9;

/// Default `n` up to which sampling is exact.
pub const DEFAULT_EXACT_THRESHOLD: usize = 8;

/// When to recompute `|det Î[C]|` for a drawn sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verify {
    Always,
    /// Exact samples always; float samples on every 100th trial.
    Default,
    Never,
}

impl Verify {
    fn applies(self, mode: Mode, trial: u64) -> bool {
        match self {
            Verify::Always => true,
            Verify::Never => false,
            Verify::Default => mode == Mode::Exact || trial.is_multiple_of(100),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DppSampler {
    space: FaceSpace,
    kernel: Kernel,
    rank: usize,
}

impl DppSampler {
    pub fn new(n: usize, k: usize, mode: Mode) -> Result<DppSampler> {
        Self::with_cap(n, k, mode, DEFAULT_MAX_KERNEL_DIM)
    }

    pub fn with_cap(n: usize, k: usize, mode: Mode, max_dim: usize) -> Result<DppSampler> {
        let kernel = build_kernel_capped(n, k, mode, max_dim)?;
        Ok(Self::from_kernel(kernel))
    }

    pub fn from_kernel(kernel: Kernel) -> DppSampler {
        let space = FaceSpace::new(kernel.n, kernel.k).expect("kernel was validated");
        let rank = space.hypertree_size() as usize;
        DppSampler {
            space,
            kernel,
            rank,
        }
    }

    pub fn space(&self) -> &FaceSpace {
        &self.space
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn mode(&self) -> Mode {
        self.kernel.mode()
    }

    /// Draws the big-face ranks of one sample, unsorted (in selection order).
    pub fn draw_ranks<R: Rng + Clone>(&self, rng: &mut R) -> Result<Vec<u64>> {
        let dim = self.kernel.dim();
        let picked = match (self.kernel.numerators(), self.kernel.floats()) {
            (Some(num), _) => {
                let snapshot = rng.clone();
                match draw_exact_i128(num, dim, self.rank, self.kernel.n, rng) {
                    Some(p) => p,
                    None => {
                        *rng = snapshot;
                        draw_exact_big(num, dim, self.rank, self.kernel.n, rng)
                    }
                }
            }
            (None, Some(k)) => draw_float(k, dim, self.rank, rng)?,
            (None, None) => unreachable!("kernel has entries"),
        };
        Ok(picked.into_iter().map(|i| i as u64).collect())
    }

    /// Draws one sample; `verify` decides whether `|H_{k-1}|` is computed.
    pub fn draw<R: Rng + Clone>(&self, rng: &mut R, trial: u64, verify: Verify) -> Result<HypertreeSample> {
        let ranks = self.draw_ranks(rng)?;
        let order = if verify.applies(self.mode(), trial) {
            let det = reduced_determinant(self.space.n(), self.space.k(), &sorted(&ranks))?;
            if det.is_zero() {
                return Err(Error::NumericalDegeneracy(format!(
                    "trial {trial}: sampled face set has zero reduced determinant"
                )));
            }
            Some(det.to_biguint().expect("absolute value"))
        } else {
            None
        };
        Ok(HypertreeSample::from_ranks(&self.space, ranks, order))
    }
}

fn sorted(v: &[u64]) -> Vec<u64> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

/// One exact-mode sample from `ν_{n,k}` on the stream `(seed, 0)`.
pub fn sample_hypertree(n: usize, k: usize, seed: u64) -> Result<HypertreeSample> {
    let mode = Mode::auto(n, DEFAULT_EXACT_THRESHOLD);
    let sampler = DppSampler::new(n, k, mode)?;
    sampler.draw(&mut trial_rng(seed, 0), 0, Verify::Default)
}

fn pick_u128<R: Rng>(weights: impl Iterator<Item = (usize, u128)>, total: u128, rng: &mut R) -> usize {
    let mut u = rng.random_range(0..total);
    let mut last = None;
    for (i, w) in weights {
        if u < w {
            return i;
        }
        u -= w;
        last = Some(i);
    }
    last.expect("nonempty weights")
}

fn draw_exact_i128<R: Rng>(
    num: &[i64],
    dim: usize,
    rank: usize,
    n: usize,
    rng: &mut R,
) -> Option<Vec<usize>> {
    let mut m: Vec<i128> = num.iter().map(|&x| i128::from(x)).collect();
    let mut active: Vec<usize> = (0..dim).collect();
    let mut chosen = Vec::with_capacity(rank);
    let mut prev: i128 = 1;
    for step in 0..rank {
        let mut total: i128 = 0;
        for &i in &active {
            total = total.checked_add(m[i * dim + i])?;
        }
        debug_assert_eq!(
            Some(total),
            prev.checked_mul((n * (rank - step)) as i128),
            "diagonal sum invariant"
        );
        let pick = pick_u128(
            active.iter().map(|&i| (i, m[i * dim + i] as u128)),
            total as u128,
            rng,
        );
        let pivot = m[pick * dim + pick];
        active.retain(|&i| i != pick);
        for (ai, &a) in active.iter().enumerate() {
            let mai = m[a * dim + pick];
            for &b in &active[ai..] {
                let lhs = pivot.checked_mul(m[a * dim + b])?;
                let rhs = mai.checked_mul(m[pick * dim + b])?;
                let v = lhs.checked_sub(rhs)? / prev;
                m[a * dim + b] = v;
                m[b * dim + a] = v;
            }
        }
        prev = pivot;
        chosen.push(pick);
        active.retain(|&i| m[i * dim + i] != 0);
    }
    Some(chosen)
}

/// Uniform integer in `[0, bound)`; matches `pick_u128` draws whenever the
/// bound fits in 128 bits.
fn uniform_below<R: Rng>(bound: &BigUint, rng: &mut R) -> BigUint {
    if let Some(b) = bound.to_u128() {
        return BigUint::from(rng.random_range(0..b));
    }
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let top_mask = if bits.is_multiple_of(32) {
        u32::MAX
    } else {
        (1u32 << (bits % 32)) - 1
    };
    loop {
        let mut digits: Vec<u32> = (0..words).map(|_| rng.random()).collect();
        *digits.last_mut().unwrap() &= top_mask;
        let candidate = BigUint::new(digits);
        if &candidate < bound {
            return candidate;
        }
    }
}

fn draw_exact_big<R: Rng>(num: &[i64], dim: usize, rank: usize, n: usize, rng: &mut R) -> Vec<usize> {
    let mut m: Vec<BigInt> = num.iter().map(|&x| BigInt::from(x)).collect();
    let mut active: Vec<usize> = (0..dim).collect();
    let mut chosen = Vec::with_capacity(rank);
    let mut prev = BigInt::one();
    for step in 0..rank {
        let total: BigInt = active.iter().map(|&i| &m[i * dim + i]).sum();
        debug_assert_eq!(total, &prev * BigInt::from(n * (rank - step)));
        let mut u = BigInt::from(uniform_below(
            &total.to_biguint().expect("positive semidefinite"),
            rng,
        ));
        let mut pick = *active.last().expect("rank not exhausted");
        for &i in &active {
            let w = &m[i * dim + i];
            if &u < w {
                pick = i;
                break;
            }
            u -= w;
        }
        let pivot = m[pick * dim + pick].clone();
        active.retain(|&i| i != pick);
        for (ai, &a) in active.iter().enumerate() {
            let mai = m[a * dim + pick].clone();
            for &b in &active[ai..] {
                let v = (&pivot * &m[a * dim + b] - &mai * &m[pick * dim + b]).div_floor(&prev);
                m[b * dim + a] = v.clone();
                m[a * dim + b] = v;
            }
        }
        debug_assert!(pivot.is_positive());
        prev = pivot;
        chosen.push(pick);
        active.retain(|&i| !m[i * dim + i].is_zero());
    }
    chosen
}

fn draw_float<R: Rng>(k: &[f64], dim: usize, rank: usize, rng: &mut R) -> Result<Vec<usize>> {
    let mut m = k.to_vec();
    let mut active: Vec<usize> = (0..dim).collect();
    let mut chosen = Vec::with_capacity(rank);
    let mut col = vec![0.0; dim];
    for step in 0..rank {
        let total: f64 = active.iter().map(|&i| m[i * dim + i].max(0.0)).sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = *active.last().ok_or_else(|| {
            Error::NumericalDegeneracy(format!("no candidates left at step {step}"))
        })?;
        for &i in &active {
            let w = m[i * dim + i].max(0.0);
            if u < w {
                pick = i;
                break;
            }
            u -= w;
        }
        let pivot = m[pick * dim + pick];
        if pivot < FLOAT_PIVOT_TOLERANCE {
            return Err(Error::NumericalDegeneracy(format!(
                "pivot {pivot:e} below tolerance at step {step}"
            )));
        }
        active.retain(|&i| i != pick);
        for &a in &active {
            col[a] = m[a * dim + pick];
        }
        // updating one triangle and mirroring keeps the matrix exactly symmetric
        for (ai, &a) in active.iter().enumerate() {
            let ca = col[a] / pivot;
            for &b in &active[ai..] {
                let v = m[a * dim + b] - ca * col[b];
                m[a * dim + b] = v;
                m[b * dim + a] = v;
            }
        }
        chosen.push(pick);
        active.retain(|&i| m[i * dim + i] > 1e-12);
    }
    Ok(chosen)
}

/// Edges of a uniform spanning tree of `K_n` on vertices `1..=n`, by Wilson's
/// algorithm rooted at `n`.
pub fn wilson_edges<R: Rng>(n: usize, rng: &mut R) -> Vec<(u32, u32)> {
    let mut in_tree = vec![false; n + 1];
    let mut next = vec![0u32; n + 1];
    in_tree[n] = true;
    for start in 1..n {
        let mut u = start;
        while !in_tree[u] {
            let mut v = rng.random_range(1..n);
            if v >= u {
                v += 1;
            }
            next[u] = v as u32;
            u = v;
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u] as usize;
        }
    }
    (1..n)
        .map(|u| {
            let v = next[u];
            let u = u as u32;
            (u.min(v), u.max(v))
        })
        .collect()
}

/// Uniform spanning tree of `K_n` as a `k = 1` hypertree.
pub fn ust_sample<R: Rng>(space: &FaceSpace, rng: &mut R) -> HypertreeSample {
    debug_assert_eq!(space.k(), 1);
    let ranks = wilson_edges(space.n(), rng)
        .into_iter()
        .map(|(a, b)| space.rank_sorted(&[a, b]))
        .collect();
    HypertreeSample::from_ranks(space, ranks, Some(BigUint::one()))
}

/// One uniform spanning tree of `K_n` on the stream `(seed, 0)`.
pub fn sample_ust(n: usize, seed: u64) -> Result<HypertreeSample> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    let space = FaceSpace::new(n, 1)?;
    Ok(ust_sample(&space, &mut trial_rng(seed, 0)))
}

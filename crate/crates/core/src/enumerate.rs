//! Exhaustive enumeration of hypertrees for tiny `(n, k)`.
//!
//! This is the ground-truth oracle for the sampler and for the determinantal
//! identities, so it never approximates: if the search space exceeds the
//! budget it refuses.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::boundary::build_reduced;
use crate::error::{Error, Result};
use crate::exactla::det_bareiss;
use crate::faces::{Face, FaceSpace};
use crate::par::{map_trials, Exec};

/// Default cap on `C(C(n,k+1), C(n-1,k))`, the number of candidate face sets.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// One hypertree: its big faces and `|H_{k-1}|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypertreeSample {
    pub n: usize,
    pub k: usize,
    /// Colex ranks of the big faces, ascending. This is the canonical key.
    #[serde(skip)]
    pub ranks: Vec<u64>,
    pub faces: Vec<Face>,
    /// `|det Î[C]|`; absent for float-mode samples that were not verified.
    #[serde(serialize_with = "serialize_order")]
    pub homology_order: Option<BigUint>,
}

fn serialize_order<S: serde::Serializer>(
    v: &Option<BigUint>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some(x) => match u64::try_from(x) {
            Ok(small) => s.serialize_u64(small),
            Err(_) => s.serialize_str(&x.to_string()),
        },
    }
}

impl HypertreeSample {
    /// Builds a sample from big-face ranks; sorts them.
    pub fn from_ranks(space: &FaceSpace, mut ranks: Vec<u64>, order: Option<BigUint>) -> Self {
        ranks.sort_unstable();
        let faces = ranks.iter().map(|&r| space.unrank_big(r)).collect();
        HypertreeSample {
            n: space.n(),
            k: space.k(),
            ranks,
            faces,
            homology_order: order,
        }
    }

    /// `|H_{k-1}|²`, the unnormalized ν-weight.
    pub fn weight(&self) -> Option<BigUint> {
        self.homology_order.as_ref().map(|h| h * h)
    }

    pub fn contains_rank(&self, rank: u64) -> bool {
        self.ranks.binary_search(&rank).is_ok()
    }
}

/// `|det Î_{n,k}[faces]|` by exact elimination.
pub fn reduced_determinant(n: usize, k: usize, ranks: &[u64]) -> Result<BigInt> {
    let ihat = build_reduced(n, k)?;
    if ranks.len() != ihat.rows() {
        return Err(Error::Precondition(format!(
            "a hypertree has {} faces, got {}",
            ihat.rows(),
            ranks.len()
        )));
    }
    let cols: Vec<usize> = ranks.iter().map(|&r| r as usize).collect();
    Ok(det_bareiss(&ihat.columns(&cols))?.abs())
}

/// Number of candidate face sets, `C(C(n,k+1), C(n-1,k))`.
pub fn candidate_count(n: usize, k: usize) -> Result<BigUint> {
    let space = FaceSpace::new(n, k)?;
    Ok(big_binomial(space.big_count(), space.hypertree_size()))
}

fn big_binomial(n: u64, m: u64) -> BigUint {
    if m > n {
        return BigUint::zero();
    }
    let m = m.min(n - m);
    let mut acc = BigUint::one();
    for i in 0..m {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn check_budget(n: usize, k: usize, budget: u64) -> Result<()> {
    let count = candidate_count(n, k)?;
    if count > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            what: format!("enumerating hypertrees at n={n}, k={k}"),
            count: count.to_string(),
            budget,
        });
    }
    Ok(())
}

const MOD: u64 = (1 << 61) - 1;

#[inline]
fn mulmod(a: u64, b: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(MOD)) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    acc
}

/// Column echelon basis mod a 61-bit prime, used to prune dependent prefixes.
/// Every minor of a `{-1,0,1}` matrix with `k+1` nonzeros per column is at most
/// `(k+1)^{m/2}` in magnitude, so when that is below the prime, independence
/// mod p coincides with independence over the rationals.
struct Echelon {
    rows: usize,
    vecs: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Echelon {
    fn try_push(&mut self, col: &[u64]) -> bool {
        let mut v = col.to_vec();
        for (b, &p) in self.vecs.iter().zip(&self.pivots) {
            let c = v[p];
            if c != 0 {
                for i in 0..self.rows {
                    if b[i] != 0 {
                        v[i] = (v[i] + MOD - mulmod(c, b[i])) % MOD;
                    }
                }
            }
        }
        let Some(p) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = powmod(v[p], MOD - 2);
        for x in v.iter_mut() {
            *x = mulmod(*x, inv);
        }
        self.vecs.push(v);
        self.pivots.push(p);
        true
    }

    fn pop(&mut self) {
        self.vecs.pop();
        self.pivots.pop();
    }
}

/// Every hypertree on `[n]` of dimension `k`, in lexicographic order of
/// their sorted big-face ranks.
pub fn enumerate_hypertrees(n: usize, k: usize, budget: u64) -> Result<Vec<HypertreeSample>> {
    enumerate_hypertrees_with(n, k, budget, Exec::default())
}

pub fn enumerate_hypertrees_with(
    n: usize,
    k: usize,
    budget: u64,
    exec: Exec,
) -> Result<Vec<HypertreeSample>> {
    check_budget(n, k, budget)?;
    let space = FaceSpace::new(n, k)?;
    let ihat = build_reduced(n, k)?;
    let (rows, cols) = (ihat.rows(), ihat.cols());
    let hadamard_log2 = (rows as f64 / 2.0) * ((k + 1) as f64).log2();
    if hadamard_log2 >= 60.0 {
        return Err(Error::Precondition(format!(
            "minors may exceed the pruning modulus at n={n}, k={k}"
        )));
    }
    let columns: Vec<Vec<u64>> = (0..cols)
        .map(|c| {
            (0..rows)
                .map(|r| match ihat.get(r, c) {
                    1 => 1,
                    -1 => MOD - 1,
                    _ => 0,
                })
                .collect()
        })
        .collect();

    let branches = map_trials(exec, (cols + 1).saturating_sub(rows) as u64, |first| {
        let mut found: Vec<Vec<u64>> = Vec::new();
        let mut ech = Echelon {
            rows,
            vecs: Vec::with_capacity(rows),
            pivots: Vec::with_capacity(rows),
        };
        let mut chosen = Vec::with_capacity(rows);
        if ech.try_push(&columns[first as usize]) {
            chosen.push(first as usize);
            search(&columns, rows, first as usize + 1, &mut ech, &mut chosen, &mut found);
        }
        found
    });

    let mut out = Vec::new();
    for set in branches.into_iter().flatten() {
        let det = reduced_determinant(n, k, &set)?;
        debug_assert!(!det.is_zero());
        out.push(HypertreeSample::from_ranks(
            &space,
            set,
            Some(det.to_biguint().expect("absolute value")),
        ));
    }
    Ok(out)
}

fn search(
    columns: &[Vec<u64>],
    target: usize,
    start: usize,
    ech: &mut Echelon,
    chosen: &mut Vec<usize>,
    found: &mut Vec<Vec<u64>>,
) {
    if chosen.len() == target {
        found.push(chosen.iter().map(|&c| c as u64).collect());
        return;
    }
    let need = target - chosen.len();
    for c in start..=columns.len() - need {
        if ech.try_push(&columns[c]) {
            chosen.push(c);
            search(columns, target, c + 1, ech, chosen, found);
            chosen.pop();
            ech.pop();
        }
    }
}

/// The normalized law `ν_{n,k}` as exact rationals.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    pub n: usize,
    pub k: usize,
    pub total_weight: BigUint,
    /// Canonical key (sorted big-face ranks) to probability.
    pub entries: BTreeMap<Vec<u64>, BigRational>,
}

impl ExactDistribution {
    pub fn from_samples(n: usize, k: usize, samples: &[HypertreeSample]) -> ExactDistribution {
        let total: BigUint = samples.iter().filter_map(|s| s.weight()).sum();
        let denom = BigInt::from(total.clone());
        let entries = samples
            .iter()
            .map(|s| {
                let w = BigInt::from(s.weight().expect("enumerated samples carry orders"));
                (s.ranks.clone(), BigRational::new(w, denom.clone()))
            })
            .collect();
        ExactDistribution {
            n,
            k,
            total_weight: total,
            entries,
        }
    }

    pub fn probability(&self, key: &[u64]) -> BigRational {
        self.entries.get(key).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `P(F ⊆ C)` for a set of big-face ranks.
    pub fn event_probability(&self, ranks: &[u64]) -> BigRational {
        self.entries
            .iter()
            .filter(|(key, _)| ranks.iter().all(|r| key.binary_search(r).is_ok()))
            .map(|(_, p)| p.clone())
            .sum()
    }

    pub fn total_probability(&self) -> BigRational {
        self.entries.values().cloned().sum()
    }
}

/// Exact `ν_{n,k}`; the denominator is `n^{C(n-2,k)}` when Kalai's formula holds.
pub fn exact_nu(n: usize, k: usize, budget: u64) -> Result<ExactDistribution> {
    let samples = enumerate_hypertrees(n, k, budget)?;
    Ok(ExactDistribution::from_samples(n, k, &samples))
}

/// `ν`-probability that all faces of `f` are present.
pub fn exact_event_prob(n: usize, k: usize, f: &[Face], budget: u64) -> Result<BigRational> {
    let space = FaceSpace::new(n, k)?;
    let mut ranks = Vec::with_capacity(f.len());
    for face in f {
        if face.len() != k + 1 {
            return Err(Error::InvalidFace(format!("{face} is not a big face")));
        }
        ranks.push(space.rank(face)?.rank);
    }
    Ok(exact_nu(n, k, budget)?.event_probability(&ranks))
}

/// `n^{C(n-2,k)}`.
pub fn kalai_count(n: usize, k: usize) -> BigUint {
    let exp = big_binomial(n as u64 - 2, k as u64);
    BigUint::from(n).pow(u32::try_from(&exp).expect("exponent fits"))
}

/// A uniformly random hypertree from an enumeration (uniform measure on the
/// set, not `ν`).
pub fn sample_uniform<'a, R: Rng + ?Sized>(
    samples: &'a [HypertreeSample],
    rng: &mut R,
) -> Option<&'a HypertreeSample> {
    if samples.is_empty() {
        return None;
    }
    Some(&samples[rng.random_range(0..samples.len())])
}

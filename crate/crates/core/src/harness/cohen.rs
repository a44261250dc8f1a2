use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::Serialize;

use crate::boundary::{build_reduced, Mode};
use crate::error::{Error, Result};
use crate::exactla::{det_bareiss, smith_normal_form};
use crate::par::{try_fold_trials, trial_rng, Exec};
use crate::sampler::{DppSampler, Verify};

/// `∏_{i=1}^{64} (1 - p^{-i})`.
pub fn eta(p: u64) -> f64 {
    let inv = 1.0 / p as f64;
    let mut power = 1.0;
    let mut prod = 1.0;
    for _ in 0..64 {
        power *= inv;
        prod *= 1.0 - power;
    }
    prod
}

/// Exponents of `p` in the invariant factors, ascending, zeros dropped.
pub fn sylow_type(diagonal: &[BigInt], p: u64) -> Vec<u32> {
    let p = BigInt::from(p);
    let mut out: Vec<u32> = diagonal
        .iter()
        .filter(|d| !d.is_zero())
        .map(|d| {
            let mut d = d.clone();
            let mut e = 0;
            loop {
                let (q, r) = d.div_rem(&p);
                if !r.is_zero() {
                    break;
                }
                d = q;
                e += 1;
            }
            e
        })
        .filter(|&e| e > 0)
        .collect();
    out.sort_unstable();
    out
}

/// Order of the automorphism group of `⊕ Z/p^{e_i}` for an ascending type.
pub fn p_group_aut_count(p: u64, exps: &[u32]) -> BigUint {
    let m = exps.len();
    let pb = BigUint::from(p);
    let pow = |e: u32| -> BigUint { Pow::pow(&pb, e) };
    // 1-based: d_k = max{l : e_l = e_k}, c_k = min{l : e_l = e_k}
    let d: Vec<u32> = (0..m)
        .map(|i| (0..m).rev().find(|&l| exps[l] == exps[i]).unwrap() as u32 + 1)
        .collect();
    let c: Vec<u32> = (0..m)
        .map(|i| (0..m).find(|&l| exps[l] == exps[i]).unwrap() as u32 + 1)
        .collect();
    let mut total = BigUint::one();
    for i in 0..m {
        total *= pow(d[i]) - pow(i as u32);
        total *= Pow::pow(&pow(exps[i]), m as u32 - d[i]);
        total *= Pow::pow(&pow(exps[i] - 1), m as u32 - c[i] + 1);
    }
    total
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeRow {
    /// Ascending exponents of the p-Sylow subgroup; empty for the trivial group.
    pub sylow_type: Vec<u32>,
    pub count: u64,
    pub frequency: f64,
    /// `η(p) / |Aut(G)|`.
    pub heuristic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohenLenstraReport {
    pub n: usize,
    pub k: usize,
    pub p: u64,
    pub trials: u64,
    pub seed: u64,
    pub eta: f64,
    pub rows: Vec<TypeRow>,
    /// Histogram of the full homology order `|H_{k-1}|`.
    pub orders: BTreeMap<String, u64>,
    /// Samples whose Smith normal form product was checked against `|det|`.
    pub verified: u64,
}

#[derive(Default)]
struct Tally {
    types: BTreeMap<Vec<u32>, u64>,
    orders: BTreeMap<BigUint, u64>,
    verified: u64,
}

/// Sylow-type frequencies of `H_{k-1}` over exact samples, beside the
/// Cohen-Lenstra prediction.
pub fn cohen_lenstra_report(
    n: usize,
    k: usize,
    p: u64,
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<CohenLenstraReport> {
    if p < 2 || !(2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d)) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    let sampler = DppSampler::new(n, k, Mode::Exact)?;
    let ihat = build_reduced(n, k)?;
    let tally = try_fold_trials(
        exec,
        trials,
        Tally::default,
        |mut acc, t| {
            let sample = sampler.draw(&mut trial_rng(seed, t), t, Verify::Never)?;
            let cols: Vec<usize> = sample.ranks.iter().map(|&r| r as usize).collect();
            let sub = ihat.columns(&cols);
            let snf = smith_normal_form(&sub);
            let det = det_bareiss(&sub)?;
            let order = snf.product();
            if order.magnitude() != det.magnitude() || det.is_zero() {
                return Err(Error::Mismatch(format!(
                    "trial {t}: Smith normal form gives {order}, determinant {det}"
                )));
            }
            *acc.types.entry(sylow_type(&snf.diagonal, p)).or_default() += 1;
            *acc.orders.entry(det.magnitude().clone()).or_default() += 1;
            acc.verified += 1;
            Ok(acc)
        },
        |mut a, b| {
            for (t, c) in b.types {
                *a.types.entry(t).or_default() += c;
            }
            for (o, c) in b.orders {
                *a.orders.entry(o).or_default() += c;
            }
            a.verified += b.verified;
            a
        },
    )?;
    let eta_p = eta(p);
    let mut types = tally.types;
    types.entry(Vec::new()).or_default();
    let rows = types
        .into_iter()
        .map(|(ty, count)| TypeRow {
            heuristic: eta_p / p_group_aut_count(p, &ty).to_f64().unwrap_or(f64::INFINITY),
            frequency: count as f64 / trials as f64,
            sylow_type: ty,
            count,
        })
        .collect();
    Ok(CohenLenstraReport {
        n,
        k,
        p,
        trials,
        seed,
        eta: eta_p,
        rows,
        orders: tally.orders.into_iter().map(|(o, c)| (o.to_string(), c)).collect(),
        verified: tally.verified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Automorphisms of `⊕ Z/p^{e_i}` by checking every generator image.
    fn brute_aut(p: u64, exps: &[u32]) -> u64 {
        let mods: Vec<u64> = exps.iter().map(|&e| p.pow(e)).collect();
        let size: u64 = mods.iter().product();
        let elem = |mut idx: u64| -> Vec<u64> {
            mods.iter()
                .map(|&m| {
                    let v = idx % m;
                    idx /= m;
                    v
                })
                .collect()
        };
        let all: Vec<Vec<u64>> = (0..size).map(elem).collect();
        let m = mods.len();
        let mut count = 0;
        let mut images = vec![0u64; m];
        loop {
            // generator i must map to an element killed by p^{e_i}
            let ok = (0..m).all(|i| all[images[i] as usize].iter().zip(&mods).all(|(&x, &q)| (x * mods[i]).is_multiple_of(q)));
            if ok {
                let mut seen = vec![false; size as usize];
                let mut injective = true;
                for g in &all {
                    let img: Vec<u64> = (0..m)
                        .map(|j| (0..m).map(|i| g[i] * all[images[i] as usize][j]).sum::<u64>() % mods[j])
                        .collect();
                    let mut idx = 0;
                    for j in (0..m).rev() {
                        idx = idx * mods[j] + img[j];
                    }
                    if seen[idx as usize] {
                        injective = false;
                        break;
                    }
                    seen[idx as usize] = true;
                }
                if injective {
                    count += 1;
                }
            }
            let mut i = 0;
            loop {
                if i == m {
                    return count;
                }
                images[i] += 1;
                if images[i] < size {
                    break;
                }
                images[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn aut_formula_matches_brute_force() {
        for (p, ty) in [
            (2, vec![1]),
            (2, vec![2]),
            (2, vec![3]),
            (2, vec![1, 1]),
            (2, vec![1, 2]),
            (2, vec![1, 1, 1]),
            (3, vec![1]),
            (3, vec![1, 1]),
            (3, vec![2]),
        ] {
            assert_eq!(
                p_group_aut_count(p, &ty),
                BigUint::from(brute_aut(p, &ty)),
                "p={p} type={ty:?}"
            );
        }
        assert_eq!(p_group_aut_count(2, &[]), BigUint::one());
        assert_eq!(p_group_aut_count(2, &[1, 1]), BigUint::from(6u8));
    }

    #[test]
    fn eta_two() {
        assert!((eta(2) - 0.28879).abs() < 1e-5);
    }

    #[test]
    fn sylow_exponents() {
        let d: Vec<BigInt> = [1, 2, 12, 8, 0].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(sylow_type(&d, 2), vec![1, 2, 3]);
        assert_eq!(sylow_type(&d, 3), vec![1]);
    }

    #[test]
    fn small_report_is_consistent() {
        let rep = cohen_lenstra_report(6, 2, 2, 40, 3, Exec::Sequential).unwrap();
        assert_eq!(rep.verified, 40);
        let total: f64 = rep.rows.iter().map(|r| r.frequency).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(cohen_lenstra_report(6, 2, 4, 1, 3, Exec::Sequential).is_err());
    }
}

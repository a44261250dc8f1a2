use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{LimitLaw, SampleIndex};
use crate::boundary::Kernel;
use crate::enumerate::exact_nu;
use crate::error::{Error, Result};
use crate::faces::{neighbors_small, Face, FaceSpace};
use crate::treestats::{CanonicalCode, SemiKaryTree};

/// Exact law of the radius-`r` ball around a uniform root at finite `n`, as
/// the pushforward of the enumerated `ν_{n,k}`.
pub fn exact_ball_law(
    n: usize,
    k: usize,
    r: usize,
    budget: u64,
) -> Result<BTreeMap<CanonicalCode, BigRational>> {
    let nu = exact_nu(n, k, budget)?;
    let space = FaceSpace::new(n, k)?;
    let roots = space.small_count();
    let per_root = BigRational::new(BigInt::one(), BigInt::from(roots));
    let mut law: BTreeMap<CanonicalCode, BigRational> = BTreeMap::new();
    for (ranks, p) in &nu.entries {
        let index = SampleIndex::new(&space, ranks);
        let weight = p * &per_root;
        for root in 0..roots {
            let code = index.ball(root, r).code;
            *law.entry(code).or_insert_with(BigRational::zero) += &weight;
        }
    }
    Ok(law)
}

/// Exact law of the radius-2 ball around `root` from kernel minors alone.
///
/// The ball is a star whose arms are the sampled faces containing the root,
/// so its law is that of `|C ∩ W|` for the `n-k` supersets `W` of the root.
/// Inclusion-exclusion over subsets of `W` turns the determinantal inclusion
/// probabilities into the exact distribution.
pub fn kernel_star_law(kernel: &Kernel, root: &Face) -> Result<BTreeMap<CanonicalCode, BigRational>> {
    let (n, k) = (kernel.n, kernel.k);
    let space = FaceSpace::new(n, k)?;
    if root.len() != k {
        return Err(Error::InvalidFace(format!("root {root} is not a {k}-subset")));
    }
    let supersets: Vec<usize> = neighbors_small(root, n)?
        .iter()
        .map(|x| space.rank_sorted(x.elements()) as usize)
        .collect();
    let w = supersets.len();
    if w > 20 {
        return Err(Error::BudgetExceeded {
            what: "inclusion-exclusion over root supersets".to_string(),
            count: format!("2^{w}"),
            budget: 1 << 20,
        });
    }
    let inclusion: Vec<BigRational> = (0..1usize << w)
        .map(|mask| {
            let set: Vec<usize> = (0..w).filter(|i| mask >> i & 1 == 1).map(|i| supersets[i]).collect();
            kernel.principal_minor(&set)
        })
        .collect::<Result<_>>()?;
    let mut by_degree = vec![BigRational::zero(); w + 1];
    for s in 0..1usize << w {
        // P(C ∩ W = S) = Σ_{T ⊇ S} (-1)^{|T \ S|} P(T ⊆ C)
        let mut exact = BigRational::zero();
        let free = !s & ((1 << w) - 1);
        let mut extra = free;
        loop {
            let t = s | extra;
            if extra.count_ones().is_multiple_of(2) {
                exact += &inclusion[t];
            } else {
                exact -= &inclusion[t];
            }
            if extra == 0 {
                break;
            }
            extra = (extra - 1) & free;
        }
        by_degree[s.count_ones() as usize] += exact;
    }
    Ok(by_degree
        .into_iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(d, p)| {
            let code = if d == 0 {
                CanonicalCode::single_vertex()
            } else {
                SemiKaryTree::star(k, d).code()
            };
            (code, p)
        })
        .collect())
}

impl LimitLaw {
    /// A complete finite-`n` law given as exact rationals.
    pub fn from_exact(k: usize, r: usize, law: &BTreeMap<CanonicalCode, BigRational>) -> LimitLaw {
        use num_traits::ToPrimitive;
        let probs = law
            .iter()
            .map(|(c, p)| (c.clone(), p.to_f64().expect("probability is finite")))
            .collect();
        LimitLaw { k, r, probs }
    }
}

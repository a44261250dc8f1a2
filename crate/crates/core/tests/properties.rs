mod common;

use hypertree::boundary::{build_kernel, Mode};
use hypertree::exactla::{det_bareiss, smith_normal_form, IntMatrix};
use hypertree::faces::{binomial, colex_rank, colex_unrank, Face};
use hypertree::harness::BallHistogram;
use hypertree::par::{map_trials, trial_rng, Exec};
use hypertree::sampler::{DppSampler, Verify};
use hypertree::skeleton::{generate_ball, MatchChoice, PoissonTable};
use hypertree::treestats::{canonicalize, matchings_covering, RootedGraph, RootedTree, SemiKaryTree};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use proptest::sample::Index;

/// A random recursive tree given by parent indices, plus extra chords.
fn rooted_graph(max: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>, usize, Vec<usize>)> {
    (1..=max).prop_flat_map(|n| {
        (
            Just(n),
            proptest::collection::vec(any::<Index>(), n),
            proptest::collection::vec((0..n, 0..n), 0..4),
            0..n,
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
        )
            .prop_map(|(n, parents, chords, root, perm)| {
                let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (parents[v].index(v), v)).collect();
                edges.extend(chords.into_iter().filter(|(a, b)| a != b));
                (n, edges, root, perm)
            })
    })
}

fn parent_array(max: usize) -> impl Strategy<Value = Vec<Option<usize>>> {
    (1..=max).prop_flat_map(|n| {
        proptest::collection::vec(any::<Index>(), n)
            .prop_map(|idx| idx.iter().enumerate().map(|(v, i)| (v > 0).then(|| i.index(v))).collect())
    })
}

/// Root-fixing automorphisms by trying every permutation.
fn brute_aut(parents: &[Option<usize>]) -> u64 {
    fn permute(parents: &[Option<usize>], map: &mut Vec<usize>, used: &mut Vec<bool>, v: usize) -> u64 {
        let n = parents.len();
        if v == n {
            return 1;
        }
        let mut total = 0;
        for w in 0..n {
            if used[w] {
                continue;
            }
            // parents precede children, so the image of v's parent is fixed already
            let ok = match (parents[v], parents[w]) {
                (None, None) => true,
                (Some(p), Some(q)) => map[p] == q,
                _ => false,
            };
            if ok {
                map[v] = w;
                used[w] = true;
                total += permute(parents, map, used, v + 1);
                used[w] = false;
            }
        }
        total
    }
    let n = parents.len();
    permute(parents, &mut vec![usize::MAX; n], &mut vec![false; n], 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn colex_rank_round_trips(n in 1usize..40, bits in any::<u64>()) {
        let elems: Vec<u32> = (1..=n as u32).filter(|v| bits >> (v - 1) & 1 == 1).collect();
        let f = Face::new(elems.iter().copied()).unwrap();
        let rank = colex_rank(&f, n).unwrap();
        prop_assert!(rank < binomial(n as u64, elems.len() as u64).unwrap());
        prop_assert_eq!(colex_unrank(rank, elems.len(), n).unwrap(), f);
    }

    #[test]
    fn canonical_code_ignores_labels((n, edges, root, perm) in rooted_graph(12)) {
        let g = RootedGraph::new(n, &edges, root).unwrap();
        let h = common::relabel(&g, &perm);
        let code = canonicalize(&g).unwrap();
        prop_assert_eq!(&code, &canonicalize(&h).unwrap());
        prop_assert_eq!(code.is_tree(), g.is_tree());
    }

    #[test]
    fn tree_codes_decode_to_the_same_shape(parents in parent_array(14)) {
        let tree = RootedTree::from_parents(&parents).unwrap();
        let code = tree.code();
        let back = RootedTree::from_code(&code).unwrap();
        prop_assert_eq!(back.code(), code);
        prop_assert_eq!(back.len(), tree.len());
    }

    #[test]
    fn automorphism_count_matches_permutation_search(parents in parent_array(7)) {
        let tree = RootedTree::from_parents(&parents).unwrap();
        prop_assert_eq!(tree.aut_count(), BigUint::from(brute_aut(&parents)));
    }

    #[test]
    fn matching_count_matches_subset_search(parents in parent_array(12), mask in any::<u16>()) {
        let required: Vec<bool> = (0..parents.len()).map(|v| mask >> v & 1 == 1).collect();
        let tree = RootedTree::from_parents(&parents).unwrap();
        prop_assert_eq!(
            matchings_covering(&tree, &required),
            BigUint::from(common::brute_matchings(&parents, &required))
        );
    }

    #[test]
    fn skeleton_balls_are_semi_k_ary_with_valid_limits(k in 1usize..4, half in 0usize..3, seed in any::<u64>()) {
        let r = 2 * half;
        let ball = generate_ball(k, r, MatchChoice::Uniform, &PoissonTable::new(k as f64), &mut trial_rng(seed, 0));
        let tree = ball.to_tree();
        prop_assert_eq!(tree.depth(), r.min(tree.depth()));
        let p = tree.limit_probability();
        prop_assert!(p > 0.0 && p <= 1.0);
        prop_assert_eq!(SemiKaryTree::from_code(k, &tree.code()).unwrap().code(), tree.code());
    }

    #[test]
    fn histogram_merge_is_partition_independent(
        stream in proptest::collection::vec(0usize..6, 1..60),
        cut_a in any::<Index>(),
        cut_b in any::<Index>(),
    ) {
        let record = |h: &mut BallHistogram, d: usize| h.record(SemiKaryTree::star(1, d + 1).code(), d + 2);
        let mut whole = BallHistogram::new(1, 2, None);
        stream.iter().for_each(|&d| record(&mut whole, d));
        let (mut a, mut b) = (cut_a.index(stream.len() + 1), cut_b.index(stream.len() + 1));
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let parts: Vec<BallHistogram> = [&stream[..a], &stream[a..b], &stream[b..]]
            .iter()
            .map(|chunk| {
                let mut h = BallHistogram::new(1, 2, None);
                chunk.iter().for_each(|&d| record(&mut h, d));
                h
            })
            .collect();
        let left = parts[0].clone().merged(parts[1].clone()).unwrap().merged(parts[2].clone()).unwrap();
        let right = parts[2].clone().merged(parts[1].clone().merged(parts[0].clone()).unwrap()).unwrap();
        prop_assert_eq!(&left, &whole);
        prop_assert_eq!(&right, &whole);
    }

    #[test]
    fn kernel_minors_respect_the_product_bound(indices in proptest::collection::btree_set(0usize..35, 1..5)) {
        // (7,2): every inclusion probability of |F| faces lies in [0, (3/7)^|F|]
        let kernel = build_kernel(7, 2, Mode::Exact).unwrap();
        let set: Vec<usize> = indices.into_iter().collect();
        let minor = kernel.principal_minor(&set).unwrap();
        let bound = BigRational::new(BigInt::from(3), BigInt::from(7)).pow(set.len() as i32);
        prop_assert!(!minor.is_negative());
        prop_assert!(minor <= bound);
    }

    #[test]
    fn smith_form_product_is_the_absolute_determinant(
        size in 1usize..6,
        entries in proptest::collection::vec(-6i64..7, 25),
    ) {
        let m = IntMatrix::from_fn(size, size, |i, j| entries[i * 5 + j]);
        let snf = smith_normal_form(&m);
        prop_assert_eq!(snf.product().abs(), det_bareiss(&m).unwrap().abs());
        prop_assert!(snf.divisibility_chain_holds());
    }
}

#[test]
fn draws_do_not_depend_on_the_execution_strategy() {
    let sampler = DppSampler::new(6, 2, Mode::Exact).unwrap();
    let run = |exec| {
        map_trials(exec, 200, |t| {
            sampler.draw(&mut trial_rng(9, t), t, Verify::Default).unwrap().ranks
        })
    };
    assert_eq!(run(Exec::Sequential), run(Exec::Parallel));
}

#[test]
fn kernel_minor_of_the_empty_set_is_one() {
    let kernel = build_kernel(5, 2, Mode::Exact).unwrap();
    assert!(kernel.principal_minor(&[]).unwrap().is_one());
    assert!(!kernel.principal_minor(&[0, 1]).unwrap().is_zero() || kernel.entry(0, 1).is_zero());
}

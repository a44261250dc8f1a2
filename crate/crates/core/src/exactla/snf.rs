use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

/// Invariant factors `d_1 | d_2 | ... | d_r` of an integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    /// The nonzero invariant factors.
    pub diagonal: Vec<BigInt>,
    pub rank: usize,
    /// Length of the full diagonal, `min(rows, cols)`.
    pub size: usize,
}

impl SnfResult {
    /// Product of the full diagonal, zero when the rank is deficient. For a
    /// square matrix this is `|det|`, and the torsion order when nonsingular.
    pub fn product(&self) -> BigInt {
        if self.rank < self.size {
            return BigInt::zero();
        }
        self.diagonal.iter().product()
    }

    pub fn divisibility_chain_holds(&self) -> bool {
        self.diagonal
            .windows(2)
            .all(|w| !w[0].is_zero() && (&w[1] % &w[0]).is_zero())
    }
}

/// Smith normal form by unimodular row and column operations, always pivoting
/// on an entry of smallest nonzero magnitude.
pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut diagonal = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            let Some((pi, pj)) = smallest_nonzero(&a, t) else {
                return SnfResult {
                    rank: diagonal.len(),
                    diagonal,
                    size: rows.min(cols),
                };
            };
            a.swap_rows(t, pi);
            a.swap_cols(t, pj);
            let pivot = a[(t, t)].clone();

            let mut clean = true;
            for i in t + 1..rows {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let q = a[(i, t)].div_floor(&pivot);
                for j in t..cols {
                    let v = &a[(t, j)] * &q;
                    a[(i, j)] -= v;
                }
                clean &= a[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let q = a[(t, j)].div_floor(&pivot);
                for i in t..rows {
                    let v = &a[(i, t)] * &q;
                    a[(i, j)] -= v;
                }
                clean &= a[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            // Row t and column t are clear. Enforce divisibility of the rest.
            let offender = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !(&a[(i, j)] % &pivot).is_zero());
            match offender {
                Some((i, _)) => {
                    for j in t..cols {
                        let v = a[(i, j)].clone();
                        a[(t, j)] += v;
                    }
                }
                None => {
                    diagonal.push(pivot.abs());
                    break;
                }
            }
        }
    }
    SnfResult {
        rank: diagonal.len(),
        diagonal,
        size: rows.min(cols),
    }
}

fn smallest_nonzero(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, BigInt)> = None;
    for i in t..a.rows() {
        for j in t..a.cols() {
            let v = &a[(i, j)];
            if v.is_zero() {
                continue;
            }
            let mag = v.abs();
            if best.as_ref().is_none_or(|(_, _, b)| mag < *b) {
                best = Some((i, j, mag));
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::det_bareiss;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn diag_two_three() {
        let m = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diagonal, ints(&[1, 6]));
        assert!(snf.divisibility_chain_holds());
    }

    #[test]
    fn zero_matrix() {
        let snf = smith_normal_form(&IntMatrix::zeros(3, 2));
        assert_eq!(snf.rank, 0);
        assert!(snf.diagonal.is_empty());
        assert!(snf.product().is_zero());
    }

    #[test]
    fn rectangular() {
        let m = IntMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diagonal, ints(&[2, 6, 12]));
        let m = IntMatrix::from_rows(&[vec![4, 6], vec![6, 9], vec![2, 3]]);
        assert_eq!(smith_normal_form(&m).diagonal, ints(&[1]));
    }

    #[test]
    fn product_equals_abs_det_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 300 {
            let n = rng.random_range(1..=6);
            let m = IntMatrix::from_fn(n, n, |_, _| rng.random_range(-4..=4));
            let det = det_bareiss(&m).unwrap();
            let snf = smith_normal_form(&m);
            assert!(snf.divisibility_chain_holds());
            if det.is_zero() {
                assert!(snf.rank < n);
                continue;
            }
            assert_eq!(snf.rank, n);
            assert_eq!(snf.product(), det.abs());
            checked += 1;
        }
    }

    #[test]
    fn invariant_under_unimodular_operations() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let r = rng.random_range(1..=5);
            let c = rng.random_range(1..=5);
            let m = IntMatrix::from_fn(r, c, |_, _| rng.random_range(-3..=3));
            let mut w = m.clone();
            for _ in 0..6 {
                let (i, j) = (rng.random_range(0..r), rng.random_range(0..r));
                if i != j {
                    let q: i64 = rng.random_range(-2..=2);
                    for col in 0..c {
                        let v = &w[(j, col)] * q;
                        w[(i, col)] += v;
                    }
                }
                let (i, j) = (rng.random_range(0..c), rng.random_range(0..c));
                w.swap_cols(i, j);
            }
            assert_eq!(smith_normal_form(&m), smith_normal_form(&w));
        }
    }
}

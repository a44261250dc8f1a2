//! Exact integer linear algebra over arbitrary-precision integers.
//!
//! Determinants use Bareiss' fraction-free elimination, so every intermediate
//! value is itself a minor of the input and no rationals are ever formed.

mod snf;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub use snf::{smith_normal_form, SnfResult};

/// Dense row-major matrix of big integers.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> IntMatrix {
        let data = (0..rows * cols)
            .map(|idx| BigInt::from(f(idx / cols, idx % cols)))
            .collect();
        IntMatrix { rows, cols, data }
    }

    /// Builds from nested rows. Panics on ragged input.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> IntMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        let data = rows.iter().flatten().cloned().map(Into::into).collect();
        IntMatrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::Mismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = &self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(l, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Submatrix on the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out[(i, jj)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Submatrix on the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> IntMatrix {
        let mut out = IntMatrix::zeros(rows.len(), cols.len());
        for (ii, &i) in rows.iter().enumerate() {
            for (jj, &j) in cols.iter().enumerate() {
                out[(ii, jj)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Fraction-free forward elimination with row pivoting. Returns the rank and,
/// when the matrix is square, the signed determinant.
fn bareiss(mut m: IntMatrix) -> (usize, BigInt) {
    let (rows, cols) = (m.rows, m.cols);
    let mut prev = BigInt::one();
    let mut sign_flip = false;
    let mut rank = 0;
    let mut col = 0;
    while rank < rows && col < cols {
        let Some(p) = (rank..rows).find(|&i| !m[(i, col)].is_zero()) else {
            col += 1;
            continue;
        };
        if p != rank {
            m.swap_rows(p, rank);
            sign_flip = !sign_flip;
        }
        let pivot = m[(rank, col)].clone();
        for i in rank + 1..rows {
            let factor = m[(i, col)].clone();
            for j in col + 1..cols {
                let v = &pivot * &m[(i, j)] - &factor * &m[(rank, j)];
                m[(i, j)] = v / &prev;
            }
            m[(i, col)] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
        col += 1;
    }
    let det = if rows == cols && rank == rows {
        if sign_flip {
            -prev
        } else {
            prev
        }
    } else {
        BigInt::zero()
    };
    (rank, det)
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn det_bareiss(m: &IntMatrix) -> Result<BigInt> {
    if !m.is_square() {
        return Err(Error::Mismatch(format!(
            "determinant of a non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    if m.rows == 0 {
        return Ok(BigInt::one());
    }
    Ok(bareiss(m.clone()).1)
}

/// Rank over the rationals.
pub fn rank(m: &IntMatrix) -> usize {
    bareiss(m.clone()).0
}

/// `det(B Bᵀ)`. Rank-deficient `B` yields zero.
pub fn gram_det(b: &IntMatrix) -> BigInt {
    let gram = b.mul(&b.transpose()).expect("shapes agree");
    det_bareiss(&gram).expect("gram matrix is square")
}

/// Determinant of a square rational matrix, clearing denominators row by row.
pub fn det_rational(rows: &[Vec<BigRational>]) -> Result<BigRational> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Mismatch("rational determinant of a non-square matrix".into()));
    }
    let mut scale = BigInt::one();
    let mut m = IntMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let lcm = row
            .iter()
            .fold(BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = x.numer() * (&lcm / x.denom());
        }
        scale *= lcm;
    }
    Ok(BigRational::new(det_bareiss(&m)?, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Cofactor expansion along the first row; the independent oracle.
    fn cofactor_det(m: &[Vec<i64>]) -> i64 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        if n == 1 {
            return m[0][0];
        }
        let mut total = 0;
        for j in 0..n {
            if m[0][j] == 0 {
                continue;
            }
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != j)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            total += sign * m[0][j] * cofactor_det(&minor);
        }
        total
    }

    #[test]
    fn identity_and_non_square() {
        assert_eq!(det_bareiss(&IntMatrix::identity(5)).unwrap(), BigInt::one());
        assert!(det_bareiss(&IntMatrix::zeros(2, 3)).is_err());
        assert_eq!(det_bareiss(&IntMatrix::zeros(0, 0)).unwrap(), BigInt::one());
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = rng.random_range(1..=6);
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(-1..=1)).collect())
                .collect();
            let m = IntMatrix::from_rows(&rows);
            assert_eq!(det_bareiss(&m).unwrap(), BigInt::from(cofactor_det(&rows)));
        }
    }

    #[test]
    fn rank_of_dependent_rows() {
        let m = IntMatrix::from_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]);
        assert_eq!(rank(&m), 2);
        assert_eq!(rank(&IntMatrix::zeros(3, 4)), 0);
        assert_eq!(det_bareiss(&m).unwrap(), BigInt::zero());
    }

    #[test]
    fn gram_det_matches_cauchy_binet() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let r = rng.random_range(1..=3);
            let c = rng.random_range(r..=6);
            let b = IntMatrix::from_fn(r, c, |_, _| rng.random_range(-2..=2));
            let mut sum = BigInt::zero();
            for mask in 0u32..(1 << c) {
                if mask.count_ones() as usize != r {
                    continue;
                }
                let cols: Vec<usize> = (0..c).filter(|j| mask >> j & 1 == 1).collect();
                let d = det_bareiss(&b.select_columns(&cols)).unwrap();
                sum += &d * &d;
            }
            assert_eq!(gram_det(&b), sum);
        }
    }

    #[test]
    fn rational_determinant() {
        let half = BigRational::new(1.into(), 2.into());
        let third = BigRational::new(1.into(), 3.into());
        let rows = vec![
            vec![half.clone(), third.clone()],
            vec![third.clone(), half.clone()],
        ];
        // 1/4 - 1/9 = 5/36
        assert_eq!(
            det_rational(&rows).unwrap(),
            BigRational::new(5.into(), 36.into())
        );
    }
}

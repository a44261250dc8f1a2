//! The boundary matrix `I_{n,k}`, its reduced form `Î_{n,k}` (rows restricted
//! to `k`-subsets of `[n-1]`), and the projection kernel
//! `P_{n,k} = (1/n) Iᵀ I` onto their common row space.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactla::{det_bareiss, IntMatrix};
use crate::faces::{Face, FaceSpace};

/// Incidence coefficient of `y` in the boundary of `x`: `(-1)^i` when
/// `y = x \ {x_i}` with `x` sorted ascending (0-based `i`), else 0.
pub fn boundary_entry(y: &Face, x: &Face) -> Result<i8> {
    if y.len() + 1 != x.len() {
        return Err(Error::InvalidFace(format!(
            "boundary entry needs |Y| + 1 = |X|, got {y} and {x}"
        )));
    }
    Ok(entry_unchecked(y, x))
}

fn entry_unchecked(y: &Face, x: &Face) -> i8 {
    let xs = x.elements();
    let ys = y.elements();
    // the first position where they differ is the omitted index
    let i = xs
        .iter()
        .zip(ys.iter())
        .position(|(a, b)| a != b)
        .unwrap_or(ys.len());
    if xs[..i] != ys[..i] || xs[i + 1..] != ys[i..] {
        return 0;
    }
    if i % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `J(X,Y) = I(X∩Y, X) · I(X∩Y, Y)` for big faces sharing exactly `k` vertices.
pub fn j_sign(x: &Face, y: &Face) -> Result<i8> {
    if x.len() != y.len() || x.intersection_len(y) + 1 != x.len() {
        return Err(Error::InvalidFace(format!(
            "J is defined for (k+1)-sets meeting in k elements, got {x} and {y}"
        )));
    }
    let s = x.intersection(y);
    Ok(entry_unchecked(&s, x) * entry_unchecked(&s, y))
}

/// Dense `{-1,0,1}` boundary matrix. Rows are small faces in colex order
/// (all of them, or only those inside `[n-1]` when reduced); columns are all
/// big faces in colex order.
#[derive(Clone, Debug)]
pub struct BoundaryMatrix {
    pub n: usize,
    pub k: usize,
    pub reduced: bool,
    rows: usize,
    cols: usize,
    entries: Vec<i8>,
}

impl BoundaryMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.cols + col]
    }

    pub fn to_int_matrix(&self) -> IntMatrix {
        IntMatrix::from_fn(self.rows, self.cols, |i, j| i64::from(self.get(i, j)))
    }

    /// Square submatrix on a set of column (big face) ranks.
    pub fn columns(&self, cols: &[usize]) -> IntMatrix {
        IntMatrix::from_fn(self.rows, cols.len(), |i, j| i64::from(self.get(i, cols[j])))
    }

    /// Writes `row label, column label, value` lines for nonzero entries.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let space = FaceSpace::new(self.n, self.k).expect("validated at construction");
        writeln!(out, "row,column,value")?;
        for i in 0..self.rows {
            let y = space.unrank_small(i as u64);
            for j in 0..self.cols {
                let v = self.get(i, j);
                if v != 0 {
                    writeln!(out, "\"{}\",\"{}\",{}", y, space.unrank_big(j as u64), v)?;
                }
            }
        }
        Ok(())
    }
}

fn build(n: usize, k: usize, reduced: bool) -> Result<BoundaryMatrix> {
    let space = FaceSpace::new(n, k)?;
    let rows = if reduced {
        space.hypertree_size()
    } else {
        space.small_count()
    } as usize;
    let cols = space.big_count() as usize;
    let mut entries = vec![0i8; rows * cols];
    let mut nbrs = Vec::with_capacity(k + 1);
    for col in 0..cols {
        space.big_neighbor_ranks(col as u64, &mut nbrs);
        // nbrs[j] drops sorted position k - j
        for (j, &row) in nbrs.iter().enumerate() {
            if (row as usize) < rows {
                let i = k - j;
                entries[row as usize * cols + col] = if i.is_multiple_of(2) { 1 } else { -1 };
            }
        }
    }
    Ok(BoundaryMatrix {
        n,
        k,
        reduced,
        rows,
        cols,
        entries,
    })
}

/// The full boundary matrix `I_{n,k}`, `C(n,k) x C(n,k+1)`.
pub fn build_full(n: usize, k: usize) -> Result<BoundaryMatrix> {
    build(n, k, false)
}

/// `Î_{n,k}`: rows restricted to the `C(n-1,k)` subsets of `[n-1]`.
pub fn build_reduced(n: usize, k: usize) -> Result<BoundaryMatrix> {
    build(n, k, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    /// Exact at or below `threshold`, float above.
    pub fn auto(n: usize, threshold: usize) -> Mode {
        if n <= threshold {
            Mode::Exact
        } else {
            Mode::Float
        }
    }
}

/// Default cap on the kernel dimension `C(n,k+1)`.
pub const DEFAULT_MAX_KERNEL_DIM: usize = 4096;

/// The projection kernel `P_{n,k}`, indexed by big-face colex ranks.
///
/// In exact mode every entry is an integer multiple of `1/n`, so the kernel
/// stores integer numerators over the common denominator `n`.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub n: usize,
    pub k: usize,
    dim: usize,
    entries: KernelEntries,
}

#[derive(Clone, Debug)]
enum KernelEntries {
    Exact(Vec<i64>),
    Float(Vec<f64>),
}

impl Kernel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> Mode {
        match self.entries {
            KernelEntries::Exact(_) => Mode::Exact,
            KernelEntries::Float(_) => Mode::Float,
        }
    }

    /// `n · P(i,j)` in exact mode.
    pub fn numerator(&self, i: usize, j: usize) -> Option<i64> {
        match &self.entries {
            KernelEntries::Exact(v) => Some(v[i * self.dim + j]),
            KernelEntries::Float(_) => None,
        }
    }

    /// Integer matrix `n · P` (exact mode only).
    pub fn numerators(&self) -> Option<&[i64]> {
        match &self.entries {
            KernelEntries::Exact(v) => Some(v),
            KernelEntries::Float(_) => None,
        }
    }

    pub fn floats(&self) -> Option<&[f64]> {
        match &self.entries {
            KernelEntries::Float(v) => Some(v),
            KernelEntries::Exact(_) => None,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> BigRational {
        match &self.entries {
            KernelEntries::Exact(v) => {
                BigRational::new(v[i * self.dim + j].into(), (self.n as i64).into())
            }
            KernelEntries::Float(v) => {
                BigRational::from_float(v[i * self.dim + j]).expect("finite kernel entry")
            }
        }
    }

    pub fn entry_f64(&self, i: usize, j: usize) -> f64 {
        match &self.entries {
            KernelEntries::Exact(v) => v[i * self.dim + j] as f64 / self.n as f64,
            KernelEntries::Float(v) => v[i * self.dim + j],
        }
    }

    /// `det P[F,F]` for a set of big-face ranks, exactly.
    pub fn principal_minor(&self, set: &[usize]) -> Result<BigRational> {
        let Some(num) = self.numerators() else {
            return Err(Error::Precondition("exact minors need an exact kernel".into()));
        };
        let m = IntMatrix::from_fn(set.len(), set.len(), |a, b| {
            num[set[a] * self.dim + set[b]]
        });
        let det = det_bareiss(&m)?;
        Ok(BigRational::new(
            det,
            BigInt::from(self.n).pow(set.len() as u32),
        ))
    }

    /// Exact kernel as rationals, row-major.
    pub fn to_rational_rows(&self) -> Vec<Vec<BigRational>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let space = FaceSpace::new(self.n, self.k).expect("validated at construction");
        writeln!(out, "row,column,value")?;
        for i in 0..self.dim {
            let x = space.unrank_big(i as u64);
            for j in 0..self.dim {
                let zero = match &self.entries {
                    KernelEntries::Exact(v) => v[i * self.dim + j] == 0,
                    KernelEntries::Float(v) => v[i * self.dim + j] == 0.0,
                };
                if zero {
                    continue;
                }
                let value = match self.mode() {
                    Mode::Exact => self.entry(i, j).to_string(),
                    Mode::Float => format!("{}", self.entry_f64(i, j)),
                };
                writeln!(out, "\"{}\",\"{}\",{}", x, space.unrank_big(j as u64), value)?;
            }
        }
        Ok(())
    }
}

/// Builds `P_{n,k}` from the three-case closed form: `(k+1)/n` on the
/// diagonal, `J(X,Y)/n` when `|X∩Y| = k`, zero otherwise.
pub fn build_kernel(n: usize, k: usize, mode: Mode) -> Result<Kernel> {
    build_kernel_capped(n, k, mode, DEFAULT_MAX_KERNEL_DIM)
}

pub fn build_kernel_capped(n: usize, k: usize, mode: Mode, max_dim: usize) -> Result<Kernel> {
    let space = FaceSpace::new(n, k)?;
    let dim = space.big_count();
    if dim > max_dim as u64 {
        return Err(Error::BudgetExceeded {
            what: format!("kernel dimension C({n},{})", k + 1),
            count: dim.to_string(),
            budget: max_dim as u64,
        });
    }
    let dim = dim as usize;
    let mut num = vec![0i64; dim * dim];
    let mut elems = vec![0u32; k + 1];
    for x in 0..dim {
        num[x * dim + x] = (k + 1) as i64;
        space.unrank_into(x as u64, &mut elems);
        let xf = Face::from_sorted(&elems);
        // neighbors sharing k elements: swap one element of x for one outside
        for drop in 0..=k {
            let s = xf.without_index(drop);
            let sign_x = if drop % 2 == 0 { 1 } else { -1 };
            for a in 1..=n as u32 {
                if xf.contains(a) {
                    continue;
                }
                let y = s.with_vertex(a).expect("a is outside x");
                let pos = y.elements().iter().position(|v| *v == a).unwrap();
                let sign_y = if pos % 2 == 0 { 1 } else { -1 };
                let yr = space.rank_sorted(y.elements()) as usize;
                num[x * dim + yr] = sign_x * sign_y;
            }
        }
    }
    let entries = match mode {
        Mode::Exact => KernelEntries::Exact(num),
        Mode::Float => {
            let inv = 1.0 / n as f64;
            KernelEntries::Float(num.into_iter().map(|v| v as f64 * inv).collect())
        }
    };
    Ok(Kernel {
        n,
        k,
        dim,
        entries,
    })
}

/// `Iᵀ I` computed directly from the boundary matrix, as `n · P`.
pub fn kernel_numerators_from_boundary(n: usize, k: usize) -> Result<IntMatrix> {
    let i = build_full(n, k)?.to_int_matrix();
    i.transpose().mul(&i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::rank;
    use num_traits::{One, Zero};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(v: &[u32]) -> Face {
        Face::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn entry_examples() {
        assert_eq!(boundary_entry(&f(&[1, 3]), &f(&[1, 2, 3])).unwrap(), -1);
        assert_eq!(boundary_entry(&f(&[1, 2]), &f(&[1, 2, 3])).unwrap(), 1);
        assert_eq!(boundary_entry(&f(&[1, 4]), &f(&[1, 2, 3])).unwrap(), 0);
        assert_eq!(boundary_entry(&f(&[2, 3]), &f(&[1, 2, 3])).unwrap(), 1);
        // k = 1: the lower endpoint gets -1
        assert_eq!(boundary_entry(&f(&[2]), &f(&[2, 5])).unwrap(), -1);
        assert_eq!(boundary_entry(&f(&[5]), &f(&[2, 5])).unwrap(), 1);
        assert!(boundary_entry(&f(&[1]), &f(&[1, 2, 3])).is_err());
    }

    #[test]
    fn alternating_signs_by_omitted_position() {
        for n in 2..=7 {
            for k in 1..n {
                let space = FaceSpace::new(n, k).unwrap();
                for x in space.big_faces() {
                    for i in 0..=k {
                        let expect = if i % 2 == 0 { 1 } else { -1 };
                        assert_eq!(boundary_entry(&x.without_index(i), &x).unwrap(), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn columns_have_k_plus_one_nonzeros() {
        let m = build_full(6, 2).unwrap();
        for c in 0..m.cols() {
            let nz = (0..m.rows()).filter(|&r| m.get(r, c) != 0).count();
            assert_eq!(nz, 3);
        }
        let space = FaceSpace::new(6, 2).unwrap();
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                let y = space.unrank_small(r as u64);
                let x = space.unrank_big(c as u64);
                assert_eq!(m.get(r, c), boundary_entry(&y, &x).unwrap());
            }
        }
    }

    #[test]
    fn reduced_shape_and_rank() {
        let m = build_reduced(4, 1).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 6));
        assert_eq!(rank(&m.to_int_matrix()), 3);
        let m = build_reduced(5, 2).unwrap();
        assert_eq!((m.rows(), m.cols()), (6, 10));
        assert_eq!(rank(&m.to_int_matrix()), 6);
        let space = FaceSpace::new(5, 2).unwrap();
        for r in 0..m.rows() {
            assert!(!space.unrank_small(r as u64).contains(5));
        }
        assert!(build_reduced(3, 3).is_err());
    }

    #[test]
    fn j_examples() {
        assert_eq!(j_sign(&f(&[1, 2]), &f(&[2, 3])).unwrap(), -1);
        assert!(j_sign(&f(&[1, 2]), &f(&[3, 4])).is_err());
        let (x, y) = (f(&[1, 2, 4]), f(&[1, 3, 4]));
        assert_eq!(j_sign(&x, &y).unwrap(), j_sign(&y, &x).unwrap());
    }

    fn triple(s: &Face, r: [u32; 3]) -> i8 {
        let u = |a: u32, b: u32| s.union(&f(&[a, b]));
        let [r1, r2, r3] = r;
        j_sign(&u(r1, r2), &u(r2, r3)).unwrap()
            * j_sign(&u(r2, r3), &u(r1, r3)).unwrap()
            * j_sign(&u(r1, r3), &u(r1, r2)).unwrap()
    }

    #[test]
    fn j_triple_product_is_minus_one() {
        assert_eq!(triple(&f(&[1]), [2, 3, 4]), -1);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (n, k) in [(6usize, 2usize), (7, 2), (7, 3)] {
            for _ in 0..200 {
                let mut pool: Vec<u32> = (1..=n as u32).collect();
                pool.shuffle(&mut rng);
                let s = Face::new(pool[..k - 1].iter().copied()).unwrap();
                let r = [pool[k - 1], pool[k], pool[k + 1]];
                assert_eq!(triple(&s, r), -1, "S={s}, R={r:?}");
            }
        }
    }

    #[test]
    fn closed_form_matches_boundary_product() {
        for n in 2..=8 {
            for k in 1..n.min(4) {
                let kernel = build_kernel(n, k, Mode::Exact).unwrap();
                let direct = kernel_numerators_from_boundary(n, k).unwrap();
                for i in 0..kernel.dim() {
                    for j in 0..kernel.dim() {
                        assert_eq!(BigInt::from(kernel.numerator(i, j).unwrap()), direct[(i, j)]);
                    }
                }
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let kernel = build_kernel(5, 2, Mode::Exact).unwrap();
        let three_fifths = BigRational::new(3.into(), 5.into());
        for i in 0..kernel.dim() {
            assert_eq!(kernel.entry(i, i), three_fifths);
        }
        let space = FaceSpace::new(5, 2).unwrap();
        let a = space.rank(&f(&[1, 2, 3])).unwrap().rank as usize;
        let b = space.rank(&f(&[1, 4, 5])).unwrap().rank as usize;
        assert!(kernel.entry(a, b).is_zero());
        assert_eq!(kernel.principal_minor(&[]).unwrap(), BigRational::one());
    }

    #[test]
    fn float_kernel_agrees() {
        let exact = build_kernel(6, 2, Mode::Exact).unwrap();
        let float = build_kernel(6, 2, Mode::Float).unwrap();
        for i in 0..exact.dim() {
            for j in 0..exact.dim() {
                assert!((exact.entry_f64(i, j) - float.entry_f64(i, j)).abs() < 1e-15);
            }
        }
        assert!(matches!(
            build_kernel_capped(30, 3, Mode::Float, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn csv_dump() {
        let mut buf = Vec::new();
        build_reduced(3, 1).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("row,column,value\n"));
        assert!(text.contains("\"{1}\",\"{1,2}\",-1"));
        let mut buf = Vec::new();
        build_kernel(3, 1, Mode::Exact).unwrap().write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("\"{1,2}\",\"{1,2}\",2/3"));
    }
}

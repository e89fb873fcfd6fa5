use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{denominator_lcm, BigRat};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix rows");
        let n = rows.len();
        Matrix {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// Copy with column `j` replaced by `col`.
    pub fn with_column(&self, j: usize, col: &[T]) -> Self {
        assert_eq!(col.len(), self.rows);
        let mut m = self.clone();
        for (i, v) in col.iter().enumerate() {
            m[(i, j)] = v.clone();
        }
        m
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Exact determinant of a rational matrix.
///
/// Each row is scaled to integers by the lcm of its denominators, the integer
/// matrix goes through Bareiss elimination, and the result is divided by the
/// product of the scaling factors. The empty matrix has determinant 1.
pub fn bareiss_det(m: &Matrix<BigRat>) -> BigRat {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows();
    let mut scale = BigInt::one();
    let mut ints = Vec::with_capacity(n);
    for i in 0..n {
        let row = m.row(i);
        let den = denominator_lcm(row);
        ints.push(
            row.iter()
                .map(|q| q.numer() * (&den / q.denom()))
                .collect::<Vec<_>>(),
        );
        scale *= den;
    }
    let det = bareiss_det_int(&Matrix::from_rows(ints));
    BigRat::new(det, scale)
}

/// Fraction-free Gaussian elimination over the integers.
pub fn bareiss_det_int(m: &Matrix<BigInt>) -> BigInt {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[(k, k)].is_zero() {
            match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                Some(p) => {
                    a.swap_rows(k, p);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)];
                // exact by Sylvester's identity
                a[(i, j)] = v / &prev;
            }
            a[(i, k)] = BigInt::zero();
        }
        prev = a[(k, k)].clone();
    }
    let d = a[(n - 1, n - 1)].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// Solves `m * x = rhs` exactly; `None` if `m` is singular.
pub fn solve_exact(m: &Matrix<BigRat>, rhs: &Matrix<BigRat>) -> Option<Matrix<BigRat>> {
    assert!(m.is_square() && m.rows() == rhs.rows(), "shape mismatch");
    let n = m.rows();
    let mut a = m.clone();
    let mut b = rhs.clone();
    for k in 0..n {
        let p = (k..n).find(|&i| !a[(i, k)].is_zero())?;
        a.swap_rows(k, p);
        b.swap_rows(k, p);
        let inv = a[(k, k)].recip();
        for j in 0..n {
            a[(k, j)] = &a[(k, j)] * &inv;
        }
        for j in 0..b.cols() {
            b[(k, j)] = &b[(k, j)] * &inv;
        }
        for i in (0..n).filter(|&i| i != k) {
            let f = a[(i, k)].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                let v = &a[(k, j)] * &f;
                a[(i, j)] -= v;
            }
            for j in 0..b.cols() {
                let v = &b[(k, j)] * &f;
                b[(i, j)] -= v;
            }
        }
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratio};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn int_matrix(rows: &[&[i64]]) -> Matrix<BigRat> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect())
    }

    /// Cofactor expansion along the first row.
    fn laplace(m: &Matrix<BigRat>) -> BigRat {
        let n = m.rows();
        if n == 0 {
            return BigRat::one();
        }
        let mut acc = BigRat::zero();
        for j in 0..n {
            let minor = Matrix::from_fn(n - 1, n - 1, |r, c| {
                m[(r + 1, if c < j { c } else { c + 1 })].clone()
            });
            let term = &m[(0, j)] * laplace(&minor);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn small_cases() {
        assert_eq!(bareiss_det(&Matrix::from_rows(vec![])), rat(1));
        assert_eq!(bareiss_det(&int_matrix(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])), rat(1));
        assert_eq!(bareiss_det(&int_matrix(&[&[1, 1], &[1, 2]])), rat(1));
        assert_eq!(bareiss_det(&int_matrix(&[&[0, 1], &[1, 0]])), rat(-1));
        assert_eq!(bareiss_det(&int_matrix(&[&[1, 2], &[2, 4]])), rat(0));
    }

    #[test]
    fn exact_solve() {
        let m = int_matrix(&[&[0, 2], &[1, 1]]);
        let rhs = int_matrix(&[&[4], &[3]]);
        assert_eq!(solve_exact(&m, &rhs).unwrap(), int_matrix(&[&[1], &[2]]));
        assert!(solve_exact(&int_matrix(&[&[1, 2], &[2, 4]]), &rhs).is_none());
    }

    #[test]
    fn rational_entries() {
        let m = Matrix::from_rows(vec![
            vec![ratio(1, 2), ratio(1, 3)],
            vec![ratio(1, 4), ratio(1, 5)],
        ]);
        assert_eq!(bareiss_det(&m), ratio(1, 10) - ratio(1, 12));
    }

    #[test]
    fn random_5x5_matches_laplace() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = Matrix::from_fn(5, 5, |_, _| rat(rng.random_range(-20..=20)));
        assert_eq!(bareiss_det(&m), laplace(&m));
    }

    #[test]
    fn agrees_with_laplace_up_to_6x6() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xba7e155);
        for case in 0..600 {
            let n = case % 7;
            let m = Matrix::from_fn(n, n, |_, _| rat(rng.random_range(-9..=9)));
            assert_eq!(bareiss_det(&m), laplace(&m), "case {case}: {m:?}");
        }
    }

    #[test]
    fn row_swap_and_multilinearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let m = Matrix::from_fn(4, 4, |_, _| ratio(rng.random_range(-9..=9), rng.random_range(1..=4)));
            let mut swapped = m.clone();
            swapped.swap_rows(0, 2);
            assert_eq!(bareiss_det(&swapped), -bareiss_det(&m));

            let u: Vec<BigRat> = (0..4).map(|_| rat(rng.random_range(-9..=9))).collect();
            let v: Vec<BigRat> = (0..4).map(|_| rat(rng.random_range(-9..=9))).collect();
            let c = rat(rng.random_range(-5..=5));
            let mix: Vec<BigRat> = u.iter().zip(&v).map(|(a, b)| a * &c + b).collect();
            let row_as = |r: &[BigRat]| {
                let mut t = m.clone();
                for (j, x) in r.iter().enumerate() {
                    t[(1, j)] = x.clone();
                }
                bareiss_det(&t)
            };
            assert_eq!(row_as(&mix), row_as(&u) * &c + row_as(&v));
        }
    }
}

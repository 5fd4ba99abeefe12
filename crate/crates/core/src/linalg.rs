//! Small dense complex linear algebra, generic over the real scalar.
//!
//! The solvers in this crate work with matrices of at most a few dozen rows,
//! so everything here is straightforward dense code: row-major storage, LU
//! with partial pivoting, no blocking. Vectors are plain `&[Complex<T>]`
//! slices operated on by free functions.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::Debug;
use std::iter::Sum;

/// Real scalar bound for the generic kernels: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Debug + Send + Sync + 'static
{
}
impl Real for f32 {}
impl Real for f64 {}

/// `x^H y` — inner product conjugating the first argument.
pub fn cdot<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
        acc + a.conj() * b
    })
}

/// `x^T y` — unconjugated dot product (row times column).
pub fn dotu<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
        acc + a * b
    })
}

/// Squared Euclidean norm.
pub fn norm_sqr<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|v| v.norm_sqr()).sum()
}

/// Euclidean norm.
pub fn norm<T: Real>(x: &[Complex<T>]) -> T {
    norm_sqr(x).sqrt()
}

/// Real part of `x^H y`, the Riemannian inner product used by the manifold code.
pub fn real_inner<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> T {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a.conj() * b).re).sum()
}

/// `y += alpha * x`.
pub fn axpy<T: Real>(alpha: Complex<T>, x: &[Complex<T>], y: &mut [Complex<T>]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T: Real> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex<T>] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[Complex<T>]) {
        debug_assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    /// `A x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        (0..self.rows).map(|i| dotu(self.row(i), x)).collect()
    }

    /// `A^H x` without forming the transpose.
    pub fn herm_mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.rows, "dimension mismatch");
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a.conj() * xi;
            }
        }
        out
    }

    /// `x^T A` for a row vector `x` (length `rows`), returning a row of length `cols`.
    pub fn row_vec_mul(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.rows, "dimension mismatch");
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a * xi;
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mat_mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a.norm_sqr() == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(l, j)];
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        norm(&self.data)
    }

    /// LU factorization with partial pivoting. `None` for a singular matrix.
    pub fn lu(&self) -> Option<Lu<T>> {
        let n = self.rows;
        assert_eq!(self.cols, n, "factorization requires a square matrix");
        let mut a = self.data.clone();
        let mut swaps = Vec::with_capacity(n);
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].norm_sqr();
            for r in col + 1..n {
                let m = a[r * n + col].norm_sqr();
                if m > best {
                    best = m;
                    piv = r;
                }
            }
            if best == T::zero() {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
            }
            swaps.push(piv);
            let d = a[col * n + col];
            for r in col + 1..n {
                let factor = a[r * n + col] / d;
                a[r * n + col] = factor;
                if factor.norm_sqr() == T::zero() {
                    continue;
                }
                for j in col + 1..n {
                    let v = a[col * n + j];
                    a[r * n + j] = a[r * n + j] - factor * v;
                }
            }
        }
        Some(Lu { n, data: a, swaps })
    }

    /// Solve `A x = b` by LU with partial pivoting. `A` must be square.
    pub fn solve(&self, b: &[Complex<T>]) -> Option<Vec<Complex<T>>> {
        self.lu().map(|f| f.solve(b))
    }
}

/// Factored form of a square matrix; solves many right-hand sides cheaply.
#[derive(Debug, Clone)]
pub struct Lu<T: Real> {
    n: usize,
    data: Vec<Complex<T>>,
    swaps: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n;
        assert_eq!(b.len(), n, "dimension mismatch");
        let mut x = b.to_vec();
        for (i, &p) in self.swaps.iter().enumerate() {
            if p != i {
                x.swap(i, p);
            }
        }
        for i in 0..n {
            let mut v = x[i];
            for j in 0..i {
                v = v - self.data[i * n + j] * x[j];
            }
            x[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for j in i + 1..n {
                v = v - self.data[i * n + j] * x[j];
            }
            x[i] = v / self.data[i * n + i];
        }
        x
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Solve the real square system `A x = b` (used for the tight-SINR power system).
pub fn solve_real<T: Real>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = b.len();
    let m = CMat::from_fn(n, n, |i, j| Complex::new(a[i][j], T::zero()));
    let rhs: Vec<Complex<T>> = b.iter().map(|&v| Complex::new(v, T::zero())).collect();
    m.solve(&rhs).map(|x| x.into_iter().map(|c| c.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = CMat::from_rows(&[
            vec![c(2.0, 1.0), c(0.5, -0.3), c(0.0, 1.0)],
            vec![c(-1.0, 0.0), c(3.0, 0.2), c(0.7, 0.7)],
            vec![c(0.1, -0.5), c(0.0, 0.9), c(1.5, 0.0)],
        ]);
        let x_true = vec![c(1.0, -2.0), c(0.5, 0.5), c(-1.0, 0.25)];
        let b = a.mul_vec(&x_true);
        let x = a.solve(&b).expect("nonsingular");
        for (got, want) in x.iter().zip(&x_true) {
            assert!((got - want).norm() < 1e-12, "got {got}, want {want}");
        }
    }

    #[test]
    fn solve_singular_returns_none() {
        let a = CMat::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]);
        assert!(a.solve(&[c(1.0, 0.0), c(2.0, 0.0)]).is_none());
    }

    #[test]
    fn herm_mul_matches_explicit_transpose() {
        let a = CMat::from_rows(&[
            vec![c(1.0, 1.0), c(0.0, -2.0), c(0.3, 0.0)],
            vec![c(-0.5, 0.2), c(1.0, 0.0), c(0.0, 0.4)],
        ]);
        let x = vec![c(0.7, -0.1), c(0.2, 0.9)];
        let direct = a.herm_mul_vec(&x);
        let via_t = a.conj_transpose().mul_vec(&x);
        for (u, v) in direct.iter().zip(&via_t) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn inner_products() {
        let x = vec![c(1.0, 2.0), c(0.0, -1.0)];
        let y = vec![c(0.5, 0.0), c(2.0, 2.0)];
        let d = cdot(&x, &y);
        // conj(1+2i)*0.5 + conj(-i)*(2+2i) = (0.5 - i) + (-2 + 2i) = -1.5 + i
        assert!((d - c(-1.5, 1.0)).norm() < 1e-14);
        assert!((real_inner(&x, &y) - (-1.5)).abs() < 1e-14);
        assert!((norm_sqr(&x) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn works_at_f32() {
        let a: CMat<f32> = CMat::identity(3);
        let b = vec![Complex::new(1.0f32, 0.5), Complex::new(0.0, 1.0), Complex::new(2.0, 0.0)];
        let x = a.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&b) {
            assert!((u - v).norm() < 1e-6);
        }
    }
}

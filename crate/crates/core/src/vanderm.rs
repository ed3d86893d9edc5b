//! Vandermonde matrices on equidistant spin nodes, their exact inverses and
//! Kronecker products.
//!
//! `V(s)[j][k] = x_j^k` with `x_j` the ascending moments of `s`. Rows are
//! nodes, columns are powers; the inverse therefore has powers as rows and
//! nodes as columns.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};
use crate::spin::{exact_moments, NodeConvention, SpinValue};

/// Default limit on the number of entries of a Kronecker product.
pub const DEFAULT_KRON_CAP: u128 = 1_000_000;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RationalMatrix = Matrix<BigRational>;
pub type RealMatrix = Matrix<f64>;

impl<T> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Format("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }
}

impl<T> Matrix<T>
where
    T: Zero + Clone,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| acc + self.get(i, k) * other.get(k, j))
        }))
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + a * b))
            .collect())
    }
}

impl RationalMatrix {
    pub fn to_f64(&self) -> RealMatrix {
        self.map(|x| x.to_f64().expect("rational fits in f64"))
    }

    /// Exact inverse by Gauss–Jordan elimination with full pivoting.
    pub fn invert_exact(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a: Vec<Vec<BigRational>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut inv: Vec<Vec<BigRational>> = Self::identity(n).data.chunks(n).map(<[BigRational]>::to_vec).collect();
        // col_perm[k] = original column now sitting at position k
        let mut col_perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            // largest magnitude in the trailing block keeps intermediate sizes small
            let mut pivot: Option<(usize, usize)> = None;
            for i in k..n {
                for j in k..n {
                    if a[i][j].is_zero() {
                        continue;
                    }
                    let better = match pivot {
                        None => true,
                        Some((pi, pj)) => a[i][j].abs() > a[pi][pj].abs(),
                    };
                    if better {
                        pivot = Some((i, j));
                    }
                }
            }
            let (pi, pj) = pivot.ok_or(Error::Singular)?;
            a.swap(k, pi);
            inv.swap(k, pi);
            if pj != k {
                for row in a.iter_mut() {
                    row.swap(k, pj);
                }
                col_perm.swap(k, pj);
            }

            let p = a[k][k].clone();
            for x in a[k].iter_mut() {
                *x /= &p;
            }
            for x in inv[k].iter_mut() {
                *x /= &p;
            }
            for i in 0..n {
                if i == k || a[i][k].is_zero() {
                    continue;
                }
                let factor = a[i][k].clone();
                for j in 0..n {
                    let da = &factor * &a[k][j];
                    a[i][j] -= da;
                    let di = &factor * &inv[k][j];
                    inv[i][j] -= di;
                }
            }
        }

        // A·P = LU-reduced to I, so inv currently holds (A·P)^{-1} = P^T·A^{-1}.
        let mut out = vec![Vec::new(); n];
        for (k, row) in inv.into_iter().enumerate() {
            out[col_perm[k]] = row;
        }
        Self::from_rows(out)
    }
}

impl fmt::Display for RationalMatrix {
    /// Comma-separated rows of `p/q` fractions (integers without a denominator).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "{}", line.join(","))?;
        }
        Ok(())
    }
}

pub fn format_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Format(format!("not a fraction: {s:?}"));
    let (n, d) = match s.trim().split_once('/') {
        Some((n, d)) => (n, d),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// `V(s)` with entry `(j, k) = x_j^k`.
pub fn build_vandermonde(s: SpinValue, conv: NodeConvention) -> RationalMatrix {
    let nodes = exact_moments(s, conv);
    let n = s.states();
    Matrix::from_fn(n, n, |j, k| num_traits::pow(nodes[j].clone(), k))
}

/// Exact inverse of [`build_vandermonde`].
pub fn inverse_vandermonde(s: SpinValue, conv: NodeConvention) -> RationalMatrix {
    build_vandermonde(s, conv)
        .invert_exact()
        .expect("distinct nodes give a nonsingular Vandermonde matrix")
}

pub fn invert_exact(m: &RationalMatrix) -> Result<RationalMatrix> {
    m.invert_exact()
}

/// Unsigned Stirling number of the first kind, `c(n, k)`: permutations of
/// `n` elements with exactly `k` cycles.
pub fn stirling_first_unsigned(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    // row[k] = c(m, k) for the current m
    let mut row = vec![BigUint::zero(); n + 1];
    row[0] = BigUint::one();
    for m in 0..n {
        for j in (0..=m + 1).rev() {
            let prev = if j == 0 { BigUint::zero() } else { row[j - 1].clone() };
            row[j] = &row[j] * BigUint::from(m) + prev;
        }
    }
    row[k].clone()
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Terminating Gauss series `2F1(a, -N; c; z) = Σ_{p=0}^{N} (a)_p (-N)_p / ((c)_p p!) z^p`.
fn hypergeometric_terminating(a: i64, minus_n: i64, c: i64, z: &BigRational) -> BigRational {
    debug_assert!(minus_n <= 0);
    let mut total = BigRational::zero();
    let mut term = BigRational::one();
    for p in 0..=(-minus_n) {
        total += &term;
        let ratio = BigRational::new(BigInt::from((a + p) * (minus_n + p)), BigInt::from((c + p) * (p + 1)));
        term = term * ratio * z;
    }
    total
}

/// Closed-form entry `(i, j)` (one-based) of the inverse Vandermonde matrix.
///
/// ```text
/// (-1)^{i+j} / ((2s+1-j)! (j-1)!) Σ_{k=i}^{2s+1} (-s-1)^{k-i} C(k,i) c(2s+2, k+1) F(i,k)
/// F(i,k) = 2F1(1, i-k; i+1; 1 - j/(s+1))
/// ```
///
/// `c` is the unsigned Stirling number of the first kind. The normalized
/// convention multiplies row `i` by `s^{i-1}`.
pub fn inverse_element_closed_form(s: SpinValue, i: usize, j: usize, conv: NodeConvention) -> Result<BigRational> {
    let n = s.states();
    for (value, leg) in [(i, 0), (j, 1)] {
        if value == 0 || value > n {
            return Err(Error::IndexOutOfRange { leg, value, max: n });
        }
    }
    let spin = BigRational::new(BigInt::from(s.twice()), BigInt::from(2));
    let shift = &spin + BigRational::one();
    let z = BigRational::one() - BigRational::from_integer(BigInt::from(j)) / &shift;
    let minus_shift = -shift;

    let mut sum = BigRational::zero();
    for k in i..=n {
        let stirling = BigInt::from(stirling_first_unsigned(n + 1, k + 1));
        let term = num_traits::pow(minus_shift.clone(), k - i)
            * BigRational::from_integer(binomial(k, i) * stirling)
            * hypergeometric_terminating(1, i as i64 - k as i64, i as i64 + 1, &z);
        sum += term;
    }
    let sign = if (i + j).is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    };
    let prefactor = BigRational::new(sign, factorial(n - j) * factorial(j - 1));
    let mut value = prefactor * sum;
    if conv == NodeConvention::Normalized {
        value *= num_traits::pow(spin, i - 1);
    }
    Ok(value)
}

/// Whole inverse assembled from [`inverse_element_closed_form`].
pub fn inverse_closed_form(s: SpinValue, conv: NodeConvention) -> RationalMatrix {
    let n = s.states();
    Matrix::from_fn(n, n, |i, j| {
        inverse_element_closed_form(s, i + 1, j + 1, conv).expect("indices in range")
    })
}

/// Kronecker product with the default entry cap.
pub fn kron<T>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>>
where
    for<'x> &'x T: Mul<&'x T, Output = T>,
{
    kron_with_cap(a, b, DEFAULT_KRON_CAP)
}

pub fn kron_with_cap<T>(a: &Matrix<T>, b: &Matrix<T>, cap: u128) -> Result<Matrix<T>>
where
    for<'x> &'x T: Mul<&'x T, Output = T>,
{
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let entries = rows as u128 * cols as u128;
    if entries > cap {
        return Err(Error::DimensionCap { entries, cap });
    }
    Ok(Matrix::from_fn(rows, cols, |i, j| {
        a.get(i / b.rows, j / b.cols) * b.get(i % b.rows, j % b.cols)
    }))
}

/// Kronecker product of several factors, left to right.
pub fn kron_all<T>(factors: &[Matrix<T>], cap: u128) -> Result<Matrix<T>>
where
    T: Clone,
    for<'x> &'x T: Mul<&'x T, Output = T>,
{
    let (first, rest) = factors
        .split_first()
        .ok_or(Error::LengthMismatch { expected: 1, actual: 0 })?;
    rest.iter()
        .try_fold(first.clone(), |acc, f| kron_with_cap(&acc, f, cap))
}

/// `(A_1 ⊗ … ⊗ A_m) · v` applied one factor at a time, never forming the product.
pub fn kron_apply(factors: &[RealMatrix], v: &[f64]) -> Result<Vec<f64>> {
    let total: usize = factors.iter().map(Matrix::cols).product();
    if total != v.len() {
        return Err(Error::LengthMismatch {
            expected: total,
            actual: v.len(),
        });
    }
    let mut cur = v.to_vec();
    // dims[k] tracks the current extent of axis k (cols before, rows after)
    let mut dims: Vec<usize> = factors.iter().map(Matrix::cols).collect();
    for (axis, a) in factors.iter().enumerate() {
        let outer: usize = dims[..axis].iter().product();
        let inner: usize = dims[axis + 1..].iter().product();
        let mut next = vec![0.0; outer * a.rows() * inner];
        for o in 0..outer {
            for r in 0..a.rows() {
                let row = a.row(r);
                for t in 0..inner {
                    let mut acc = 0.0;
                    for (c, &coef) in row.iter().enumerate() {
                        acc += coef * cur[(o * a.cols() + c) * inner + t];
                    }
                    next[(o * a.rows() + r) * inner + t] = acc;
                }
            }
        }
        dims[axis] = a.rows();
        cur = next;
    }
    Ok(cur)
}

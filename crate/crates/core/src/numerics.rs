//! Dense linear algebra over ℝ and ℂ, exact integer determinants, generalized
//! Schur complements and the signature of order-preserving split permutations.
//!
//! Everything here is a pure function of its inputs. Matrices are small
//! (desk-scale circuits), so storage is a plain row-major `Vec`.

use std::fmt;
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default relative tolerance for rank and residual decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Element of the scalar field (ℝ or ℂ).
pub trait Scalar:
    Copy
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    fn is_finite(self) -> bool;

    fn from_i64(x: i64) -> Self {
        Self::from_f64(x as f64)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DenseMatrix { rows, cols, data }
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

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Copy> DenseMatrix<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> Self {
        DenseMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Submatrix on the given (0-based) rows and columns, in the order given.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        DenseMatrix::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])])
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, cols)
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} columns on {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(DenseMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Places `self` to the left of `other`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot join {} rows with {} rows",
                self.rows, other.rows
            )));
        }
        Ok(DenseMatrix::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)]
            } else {
                other[(r, c - self.cols)]
            }
        }))
    }
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn diagonal(d: &[T]) -> Self {
        DenseMatrix::from_fn(d.len(), d.len(), |r, c| if r == c { d[r] } else { T::zero() })
    }

    pub fn column_vector(v: &[T]) -> Self {
        DenseMatrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == T::zero() {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] = out[(r, c)] + a * other[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} matrix to a vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &x)| acc + a * x)
            })
            .collect())
    }

    /// `self · diag(d)`: scales column `c` by `d[c]`.
    pub fn scale_columns(&self, d: &[T]) -> Result<Self> {
        if d.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{} column scales for {} columns",
                d.len(),
                self.cols
            )));
        }
        Ok(DenseMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] * d[c]))
    }

    pub fn max_modulus(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Scale against which determinants are judged to vanish: the product
    /// of column max-norms times the product of row max-norms of the
    /// column-normalized matrix. Zero when a row or column is null.
    pub fn equilibration_scale(&self) -> f64 {
        let cols: Vec<f64> = (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].modulus()).fold(0.0, f64::max))
            .collect();
        if cols.contains(&0.0) {
            return 0.0;
        }
        let rows: f64 = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)].modulus() / cols[c]).fold(0.0, f64::max))
            .product();
        cols.iter().product::<f64>() * rows
    }

    pub fn determinant(&self) -> Result<T> {
        Ok(Lu::factor(self)?.det())
    }
}

impl DenseMatrix<i64> {
    pub fn to_scalar<T: Scalar>(&self) -> DenseMatrix<T> {
        self.map(|&x| T::from_i64(x))
    }

    pub fn int_matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(DenseMatrix::from_fn(self.rows, other.cols, |r, c| {
            (0..self.cols).map(|k| self[(r, k)] * other[(k, c)]).sum()
        }))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// LU factorization with partial (largest-modulus) pivoting.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    factors: DenseMatrix<T>,
    perm: Vec<usize>,
    odd: bool,
    scale: f64,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(m: &DenseMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        let scale = m.equilibration_scale();
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for k in 0..n {
            let (pivot_row, pivot_mod) = (k..n)
                .map(|r| (r, a[(r, k)].modulus()))
                .fold((k, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best });
            if pivot_mod == 0.0 {
                // Column already eliminated: det is exactly zero, keep going so
                // the factors stay well formed.
                continue;
            }
            if pivot_row != k {
                for c in 0..n {
                    let tmp = a[(k, c)];
                    a[(k, c)] = a[(pivot_row, c)];
                    a[(pivot_row, c)] = tmp;
                }
                perm.swap(k, pivot_row);
                odd = !odd;
            }
            let pivot = a[(k, k)];
            for r in k + 1..n {
                let factor = a[(r, k)] / pivot;
                a[(r, k)] = factor;
                if factor == T::zero() {
                    continue;
                }
                for c in k + 1..n {
                    let upd = a[(r, c)] - factor * a[(k, c)];
                    a[(r, c)] = upd;
                }
            }
        }
        Ok(Lu {
            factors: a,
            perm,
            odd,
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.factors.rows()
    }

    pub fn det(&self) -> T {
        let d = (0..self.dim()).fold(T::one(), |acc, k| acc * self.factors[(k, k)]);
        if self.odd {
            -d
        } else {
            d
        }
    }

    /// `|det|` over [`DenseMatrix::equilibration_scale`]; zero for a matrix
    /// with a null row or column.
    pub fn degeneracy_ratio(&self) -> f64 {
        if self.dim() == 0 {
            return 1.0;
        }
        if self.scale == 0.0 {
            return 0.0;
        }
        self.det().modulus() / self.scale
    }

    /// NaN ratios count as singular.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn is_singular(&self, tol: f64) -> bool {
        !(self.degeneracy_ratio() >= tol)
    }

    /// Solves `M X = rhs`, refusing when the matrix is numerically singular.
    pub fn solve(&self, rhs: &DenseMatrix<T>, tol: f64) -> Result<DenseMatrix<T>> {
        let n = self.dim();
        if rhs.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} rows, expected {n}",
                rhs.rows()
            )));
        }
        if self.is_singular(tol) {
            return Err(Error::SingularMatrix {
                ratio: self.degeneracy_ratio(),
            });
        }
        let mut x = DenseMatrix::from_fn(n, rhs.cols(), |r, c| rhs[(self.perm[r], c)]);
        for c in 0..rhs.cols() {
            for r in 0..n {
                let mut acc = x[(r, c)];
                for k in 0..r {
                    acc = acc - self.factors[(r, k)] * x[(k, c)];
                }
                x[(r, c)] = acc;
            }
            for r in (0..n).rev() {
                let mut acc = x[(r, c)];
                for k in r + 1..n {
                    acc = acc - self.factors[(r, k)] * x[(k, c)];
                }
                x[(r, c)] = acc / self.factors[(r, r)];
            }
        }
        Ok(x)
    }

    pub fn solve_vec(&self, rhs: &[T], tol: f64) -> Result<Vec<T>> {
        Ok(self
            .solve(&DenseMatrix::column_vector(rhs), tol)?
            .as_slice()
            .to_vec())
    }
}

/// Determinant of `m` and, when `rhs` is given, the solution of `m X = rhs`.
///
/// A right-hand side against a numerically singular matrix yields
/// [`Error::SingularMatrix`] carrying the determinant ratio.
pub fn lu_solve_det<T: Scalar>(
    m: &DenseMatrix<T>,
    rhs: Option<&DenseMatrix<T>>,
    tol: f64,
) -> Result<(T, Option<DenseMatrix<T>>)> {
    let lu = Lu::factor(m)?;
    let solution = rhs.map(|b| lu.solve(b, tol)).transpose()?;
    Ok((lu.det(), solution))
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn integer_det(m: &DenseMatrix<i64>) -> Result<i64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "determinant needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(1);
    }
    let mut a: Vec<Vec<i128>> = (0..n)
        .map(|r| m.row(r).iter().map(|&x| x as i128).collect())
        .collect();
    let mut negate = false;
    let mut prev: i128 = 1;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    negate = !negate;
                }
                None => return Ok(0),
            }
        }
        for r in k + 1..n {
            for c in k + 1..n {
                let num = a[r][c]
                    .checked_mul(a[k][k])
                    .and_then(|x| x.checked_sub(a[r][k].checked_mul(a[k][c])?))
                    .ok_or(Error::IntegerOverflow)?;
                a[r][c] = num / prev;
            }
            a[r][k] = 0;
        }
        prev = a[k][k];
    }
    let det = if negate { -a[n - 1][n - 1] } else { a[n - 1][n - 1] };
    i64::try_from(det).map_err(|_| Error::IntegerOverflow)
}

/// Strictly increasing set of 1-based indices drawn from `{1..universe}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet {
    members: Vec<usize>,
    universe: usize,
}

impl IndexSet {
    pub fn new(members: Vec<usize>, universe: usize) -> Result<Self> {
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndexSet(format!(
                "{members:?} is not strictly increasing"
            )));
        }
        if let Some(&bad) = members.iter().find(|&&j| j == 0 || j > universe) {
            return Err(Error::InvalidIndexSet(format!(
                "index {bad} outside 1..={universe}"
            )));
        }
        Ok(IndexSet { members, universe })
    }

    /// Builds from 0-based positions, sorting them.
    pub fn from_zero_based(mut positions: Vec<usize>, universe: usize) -> Result<Self> {
        positions.sort_unstable();
        IndexSet::new(positions.into_iter().map(|p| p + 1).collect(), universe)
    }

    pub fn full(universe: usize) -> Self {
        IndexSet {
            members: (1..=universe).collect(),
            universe,
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.members.binary_search(&j).is_ok()
    }

    pub fn zero_based(&self) -> Vec<usize> {
        self.members.iter().map(|j| j - 1).collect()
    }

    pub fn sum(&self) -> usize {
        self.members.iter().sum()
    }

    pub fn complement(&self) -> IndexSet {
        IndexSet {
            members: (1..=self.universe).filter(|&j| !self.contains(j)).collect(),
            universe: self.universe,
        }
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, j) in self.members.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

/// Signature of the permutation of `{1..m}` mapping `sigma1` onto `sigma2`
/// and their complements onto each other, both in increasing order.
pub fn permutation_signature(sigma1: &IndexSet, sigma2: &IndexSet, m: usize) -> Result<i32> {
    if sigma1.len() != sigma2.len() {
        return Err(Error::CardinalityMismatch(sigma1.len(), sigma2.len()));
    }
    if sigma1.universe() > m || sigma2.universe() > m {
        return Err(Error::InvalidIndexSet(format!(
            "index sets exceed universe {m}"
        )));
    }
    Ok(if (sigma1.sum() + sigma2.sum()).is_multiple_of(2) {
        1
    } else {
        -1
    })
}

/// `det M` through the generalized Schur complement of `M[alpha, omega]`.
pub fn schur_det<T: Scalar>(
    m: &DenseMatrix<T>,
    alpha: &IndexSet,
    omega: &IndexSet,
    tol: f64,
) -> Result<T> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "Schur determinant needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if alpha.len() != omega.len() {
        return Err(Error::CardinalityMismatch(alpha.len(), omega.len()));
    }
    if alpha.universe() != n || omega.universe() != n {
        return Err(Error::DimensionMismatch(format!(
            "index sets over {{1..{}}}/{{1..{}}} for an order-{n} matrix",
            alpha.universe(),
            omega.universe()
        )));
    }
    let (a, w) = (alpha.zero_based(), omega.zero_based());
    let (a_bar, w_bar) = (alpha.complement().zero_based(), omega.complement().zero_based());

    let block = m.select(&a, &w);
    let block_lu = Lu::factor(&block)?;
    if block_lu.is_singular(tol) {
        return Err(Error::SingularPivotBlock);
    }
    let sign = permutation_signature(alpha, omega, n)?;

    let complement = if a_bar.is_empty() {
        DenseMatrix::zeros(0, 0)
    } else {
        let x = block_lu.solve(&m.select(&a, &w_bar), tol)?;
        let correction = m.select(&a_bar, &w).matmul(&x)?;
        let base = m.select(&a_bar, &w_bar);
        DenseMatrix::from_fn(base.rows(), base.cols(), |r, c| {
            base[(r, c)] - correction[(r, c)]
        })
    };
    let value = block_lu.det() * Lu::factor(&complement)?.det();
    Ok(if sign < 0 { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    type C = Complex64;

    /// Leibniz expansion over all permutations (independent oracle).
    fn leibniz<T: Scalar>(m: &DenseMatrix<T>) -> T {
        fn rec<T: Scalar>(m: &DenseMatrix<T>, row: usize, used: &mut Vec<bool>, perm: &mut Vec<usize>, acc: &mut T) {
            let n = m.rows();
            if row == n {
                let inversions = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| perm[i] > perm[j])
                    .count();
                let term = (0..n).fold(T::one(), |p, r| p * m[(r, perm[r])]);
                *acc = if inversions % 2 == 0 { *acc + term } else { *acc - term };
                return;
            }
            for c in 0..n {
                if !used[c] {
                    used[c] = true;
                    perm.push(c);
                    rec(m, row + 1, used, perm, acc);
                    perm.pop();
                    used[c] = false;
                }
            }
        }
        let mut acc = T::zero();
        rec(m, 0, &mut vec![false; m.rows()], &mut Vec::new(), &mut acc);
        acc
    }

    /// Explicit order-preserving split permutation and its inversion parity.
    fn inversion_sign(s1: &[usize], s2: &[usize], m: usize) -> i32 {
        let c1: Vec<usize> = (1..=m).filter(|j| !s1.contains(j)).collect();
        let c2: Vec<usize> = (1..=m).filter(|j| !s2.contains(j)).collect();
        let mut image = vec![0usize; m + 1];
        for (a, b) in s1.iter().zip(s2).chain(c1.iter().zip(&c2)) {
            image[*a] = *b;
        }
        let inv = (1..=m)
            .flat_map(|i| (i + 1..=m).map(move |j| (i, j)))
            .filter(|&(i, j)| image[i] > image[j])
            .count();
        if inv % 2 == 0 { 1 } else { -1 }
    }

    fn random_complex(rng: &mut StdRng, n: usize) -> DenseMatrix<C> {
        DenseMatrix::from_fn(n, n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn rel_close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn identity_solve() {
        let m = DenseMatrix::<f64>::identity(3);
        let e1 = DenseMatrix::column_vector(&[1.0, 0.0, 0.0]);
        let (det, sol) = lu_solve_det(&m, Some(&e1), DEFAULT_TOL).unwrap();
        assert_eq!(det, 1.0);
        assert_eq!(sol.unwrap(), e1);
    }

    #[test]
    fn transposition_det() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(lu_solve_det(&m, None, DEFAULT_TOL).unwrap().0, -1.0);
    }

    #[test]
    fn complex_det_matches_leibniz() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..5 {
            let m = random_complex(&mut rng, 6);
            let (det, _) = lu_solve_det(&m, None, DEFAULT_TOL).unwrap();
            assert!(rel_close(det, leibniz(&m), 1e-10));
        }
    }

    #[test]
    fn singular_solve_is_refused() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let rhs = DenseMatrix::column_vector(&[1.0, 1.0]);
        match lu_solve_det(&m, Some(&rhs), DEFAULT_TOL) {
            Err(Error::SingularMatrix { ratio }) => assert!(ratio < 1e-12),
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn solution_residual_is_small() {
        let mut rng = StdRng::seed_from_u64(3);
        let m = random_complex(&mut rng, 8);
        let b = random_complex(&mut rng, 8).select(&(0..8).collect::<Vec<_>>(), &[0, 1]);
        let (_, x) = lu_solve_det(&m, Some(&b), DEFAULT_TOL).unwrap();
        let r = m.matmul(&x.unwrap()).unwrap();
        for i in 0..8 {
            for j in 0..2 {
                assert!((r[(i, j)] - b[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_errors() {
        let m = DenseMatrix::<f64>::zeros(2, 3);
        assert!(matches!(Lu::factor(&m), Err(Error::DimensionMismatch(_))));
        let sq = DenseMatrix::<f64>::identity(2);
        let rhs = DenseMatrix::column_vector(&[1.0, 2.0, 3.0]);
        assert!(matches!(lu_solve_det(&sq, Some(&rhs), DEFAULT_TOL), Err(Error::DimensionMismatch(_))));
        assert!(matches!(integer_det(&DenseMatrix::<i64>::from_fn(1, 2, |_, _| 0)), Err(Error::DimensionMismatch(_))));
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn integer_det_identity_and_triangle() {
        let id = DenseMatrix::from_fn(4, 4, |r, c| i64::from(r == c));
        assert_eq!(integer_det(&id).unwrap(), 1);
        // reduced incidence of a triangle (reference node removed)
        let a = DenseMatrix::from_rows(&[vec![1, -1, 0], vec![0, 1, -1]]).unwrap();
        let aat = a.int_matmul(&a.transpose()).unwrap();
        assert_eq!(integer_det(&aat).unwrap(), 3);
    }

    #[test]
    fn integer_det_agrees_with_float() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let m = DenseMatrix::from_fn(5, 5, |_, _| rng.gen_range(-1i64..=1));
            let exact = integer_det(&m).unwrap();
            let float = lu_solve_det(&m.to_scalar::<f64>(), None, DEFAULT_TOL).unwrap().0;
            assert_eq!(exact, float.round() as i64);
        }
    }

    #[test]
    fn integer_det_needs_row_swap() {
        let m = DenseMatrix::from_rows(&[vec![0, 1, 2], vec![1, 0, 3], vec![4, -3, 8]]).unwrap();
        assert_eq!(integer_det(&m).unwrap(), leibniz(&m.to_scalar::<f64>()).round() as i64);
    }

    #[test]
    fn signature_examples() {
        let s = |v: Vec<usize>, m| IndexSet::new(v, m).unwrap();
        assert_eq!(permutation_signature(&s(vec![1, 2], 3), &s(vec![1, 2], 3), 3).unwrap(), 1);
        assert_eq!(permutation_signature(&s(vec![1], 2), &s(vec![2], 2), 2).unwrap(), -1);
        assert_eq!(permutation_signature(&s(vec![1, 3], 4), &s(vec![2, 3], 4), 4).unwrap(), -1);
        assert_eq!(inversion_sign(&[1, 3], &[2, 3], 4), -1);
        assert!(matches!(
            permutation_signature(&s(vec![1], 3), &s(vec![1, 2], 3), 3),
            Err(Error::CardinalityMismatch(1, 2))
        ));
    }

    #[test]
    fn signature_matches_inversions_exhaustively() {
        for m in 1..=8usize {
            let subsets: Vec<Vec<usize>> = (0u32..1 << m)
                .map(|mask| (1..=m).filter(|j| mask & (1 << (j - 1)) != 0).collect())
                .collect();
            for s1 in &subsets {
                for s2 in subsets.iter().filter(|s| s.len() == s1.len()) {
                    let a = IndexSet::new(s1.clone(), m).unwrap();
                    let b = IndexSet::new(s2.clone(), m).unwrap();
                    assert_eq!(
                        permutation_signature(&a, &b, m).unwrap(),
                        inversion_sign(s1, s2, m),
                        "m={m} {s1:?} {s2:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn schur_full_block() {
        let mut rng = StdRng::seed_from_u64(5);
        let m = random_complex(&mut rng, 4);
        let full = IndexSet::full(4);
        let d = schur_det(&m, &full, &full, DEFAULT_TOL).unwrap();
        assert!(rel_close(d, m.determinant().unwrap(), 1e-12));
    }

    #[test]
    fn schur_two_by_two_off_diagonal() {
        let (a, b, c, d) = (2.0, 3.0, 5.0, 7.0);
        let m = DenseMatrix::from_rows(&[vec![a, b], vec![c, d]]).unwrap();
        let alpha = IndexSet::new(vec![1], 2).unwrap();
        let omega = IndexSet::new(vec![2], 2).unwrap();
        // −b · (c − d·b⁻¹·a)
        let closed = -b * (c - d * a / b);
        let got = schur_det(&m, &alpha, &omega, DEFAULT_TOL).unwrap();
        assert!((got - closed).abs() < 1e-12);
        assert!((got - (a * d - b * c)).abs() < 1e-12);
    }

    #[test]
    fn schur_random_complex_matches_lu() {
        let mut rng = StdRng::seed_from_u64(9);
        let alpha = IndexSet::new(vec![1, 3], 5).unwrap();
        let omega = IndexSet::new(vec![2, 5], 5).unwrap();
        for _ in 0..20 {
            let m = random_complex(&mut rng, 5);
            let d = schur_det(&m, &alpha, &omega, DEFAULT_TOL).unwrap();
            assert!(rel_close(d, lu_solve_det(&m, None, DEFAULT_TOL).unwrap().0, 1e-10));
        }
    }

    #[test]
    fn schur_singular_block() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let one = IndexSet::new(vec![1], 2).unwrap();
        assert_eq!(schur_det(&m, &one, &one, DEFAULT_TOL), Err(Error::SingularPivotBlock));
    }

    #[test]
    fn rotation_block_identity() {
        // det [[P, −Q], [Q, P]] = det(P² + Q²) for diagonal P, Q
        let mut rng = StdRng::seed_from_u64(13);
        for m in 1..=8 {
            let p: Vec<C> = (0..m).map(|_| C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            let q: Vec<C> = (0..m).map(|_| C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            let big = DenseMatrix::from_fn(2 * m, 2 * m, |r, c| {
                let (br, bc, i, j) = (r / m, c / m, r % m, c % m);
                if i != j {
                    return C::new(0.0, 0.0);
                }
                match (br, bc) {
                    (0, 0) | (1, 1) => p[i],
                    (0, 1) => -q[i],
                    _ => q[i],
                }
            });
            let expected = (0..m).fold(C::new(1.0, 0.0), |acc, k| acc * (p[k] * p[k] + q[k] * q[k]));
            assert!(rel_close(big.determinant().unwrap(), expected, 1e-10));
        }
    }

    #[test]
    fn index_set_validation() {
        assert!(IndexSet::new(vec![2, 1], 3).is_err());
        assert!(IndexSet::new(vec![0], 3).is_err());
        assert!(IndexSet::new(vec![4], 3).is_err());
        let s = IndexSet::new(vec![1, 3], 4).unwrap();
        assert_eq!(s.complement().members(), &[2, 4]);
        assert_eq!(s.to_string(), "{1,3}");
    }

    proptest::proptest! {
        #[test]
        fn lu_integer_schur_agree(entries in proptest::collection::vec(-3i64..=3, 16), a in 1usize..=4, w in 1usize..=4) {
            let m = DenseMatrix::new(4, 4, entries).unwrap();
            let exact = integer_det(&m).unwrap() as f64;
            let mf = m.to_scalar::<f64>();
            let lu = lu_solve_det(&mf, None, DEFAULT_TOL).unwrap().0;
            proptest::prop_assert!((lu - exact).abs() <= 1e-10 * exact.abs().max(1.0));
            let alpha = IndexSet::new(vec![a], 4).unwrap();
            let omega = IndexSet::new(vec![w], 4).unwrap();
            if let Ok(s) = schur_det(&mf, &alpha, &omega, DEFAULT_TOL) {
                proptest::prop_assert!((s - exact).abs() <= 1e-10 * exact.abs().max(1.0));
            }
        }
    }
}

//! Exact rational matrices and subspace algebra.
//!
//! Every subspace is stored as the reduced row-echelon form of a spanning set,
//! so two subspaces are equal exactly when their stored bases are identical.
//! Vectors are rows; a linear map `A: Q^n -> Q^m` is an `m x n` matrix acting
//! on column vectors, so the image of a row vector `x` is `x * A^T`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always reduced with a positive denominator.
pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("ragged matrix: row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
}

pub(crate) fn check_dim(
    context: &'static str,
    expected: usize,
    found: usize,
) -> Result<(), LinalgError> {
    if expected == found {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Dense row-major matrix over the rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>, cols: usize) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(LinalgError::Ragged {
                    row: i,
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r);
        }
        Ok(Mat {
            rows: n,
            cols,
            data,
        })
    }

    /// Integer matrix literal; panics on ragged input.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged literal");
                r.iter().map(|&v| rat(v))
            })
            .collect();
        Mat {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn push_row(&mut self, row: &[Rat]) {
        assert_eq!(row.len(), self.cols, "row length");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn is_skew(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        (0..self.rows).all(|i| {
            (i..self.cols).all(|j| {
                let s = &self[(i, j)] + &self[(j, i)];
                s.is_zero()
            })
        })
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat, LinalgError> {
        check_dim("matrix product", self.cols, other.rows)?;
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `self * v` for a column vector `v`.
    pub fn apply(&self, v: &[Rat]) -> Result<Vec<Rat>, LinalgError> {
        check_dim("matrix-vector product", self.cols, v.len())?;
        Ok((0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect())
    }

    pub fn add(&self, other: &Mat) -> Result<Mat, LinalgError> {
        check_dim("matrix sum (rows)", self.rows, other.rows)?;
        check_dim("matrix sum (cols)", self.cols, other.cols)?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat, LinalgError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, s: &Rat) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn hstack(&self, other: &Mat) -> Result<Mat, LinalgError> {
        check_dim("horizontal stack", self.rows, other.rows)?;
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(Mat {
            rows: self.rows,
            cols,
            data,
        })
    }

    pub fn vstack(&self, other: &Mat) -> Result<Mat, LinalgError> {
        check_dim("vertical stack", self.cols, other.cols)?;
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Mat {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Block-diagonal `diag(self, other)`.
    pub fn block_diag(&self, other: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    pub fn select_cols(&self, cols: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (k, &c) in cols.iter().enumerate() {
                out[(i, k)] = self[(i, c)].clone();
            }
        }
        out
    }

    pub fn col_range(&self, start: usize, end: usize) -> Mat {
        let cols: Vec<usize> = (start..end).collect();
        self.select_cols(&cols)
    }

    pub fn rank(&self) -> usize {
        rref_with_pivots(self).1.len()
    }

    pub fn inverse(&self) -> Option<Mat> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = self.hstack(&Mat::identity(n)).ok()?;
        let (r, pivots) = rref_with_pivots(&aug);
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        Some(r.col_range(n, 2 * n))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

/// Reduced row-echelon form plus the pivot column of each surviving row.
pub fn rref_with_pivots(m: &Mat) -> (Mat, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(p) = (r..a.rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..a.cols {
                a.data.swap(p * a.cols + j, r * a.cols + j);
            }
        }
        let inv = a[(r, c)].recip();
        for j in c..a.cols {
            let v = &a[(r, j)] * &inv;
            a[(r, j)] = v;
        }
        for i in 0..a.rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..a.cols {
                if a[(r, j)].is_zero() {
                    continue;
                }
                let d = &f * &a[(r, j)];
                a[(i, j)] -= d;
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.data.truncate(r * a.cols);
    a.rows = r;
    (a, pivots)
}

/// Reduced row-echelon form with zero rows dropped.
pub fn rref(m: &Mat) -> Mat {
    rref_with_pivots(m).0
}

/// Solves `c * rows = target` for a row vector `c`, if a solution exists.
pub fn solve_row_combination(rows: &Mat, target: &[Rat]) -> Option<Vec<Rat>> {
    if target.len() != rows.cols {
        return None;
    }
    // Transpose to a column system rows^T c = target and reduce the augmented matrix.
    let mut aug = rows.transpose();
    let col: Vec<Vec<Rat>> = target.iter().map(|t| vec![t.clone()]).collect();
    aug = aug.hstack(&Mat::from_rows(col, 1).ok()?).ok()?;
    let (r, pivots) = rref_with_pivots(&aug);
    let n = rows.rows;
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut c = vec![Rat::zero(); n];
    for (i, &p) in pivots.iter().enumerate() {
        c[p] = r[(i, n)].clone();
    }
    Some(c)
}

/// A subspace of `Q^n`, stored as a canonical (rref) basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Mat,
    pivots: Vec<usize>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in Q^{}: {:?})", self.dim(), self.ambient_dim, self.basis)
    }
}

impl Subspace {
    pub fn span(spanning: &Mat) -> Subspace {
        let (basis, pivots) = rref_with_pivots(spanning);
        Subspace {
            ambient_dim: spanning.cols(),
            basis,
            pivots,
        }
    }

    pub fn from_vectors(ambient_dim: usize, vectors: Vec<Vec<Rat>>) -> Result<Subspace, LinalgError> {
        Ok(Subspace::span(&Mat::from_rows(vectors, ambient_dim)?))
    }

    pub fn zero(ambient_dim: usize) -> Subspace {
        Subspace::span(&Mat::zeros(0, ambient_dim))
    }

    pub fn full(ambient_dim: usize) -> Subspace {
        Subspace::span(&Mat::identity(ambient_dim))
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinate(ambient_dim: usize, indices: impl IntoIterator<Item = usize>) -> Subspace {
        let mut m = Mat::zeros(0, ambient_dim);
        for i in indices {
            let mut row = vec![Rat::zero(); ambient_dim];
            row[i] = Rat::one();
            m.push_row(&row);
        }
        Subspace::span(&m)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Columns that carry no pivot; their unit vectors span a complement.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.ambient_dim)
            .filter(|c| !self.pivots.contains(c))
            .collect()
    }

    pub fn contains_vector(&self, v: &[Rat]) -> Result<bool, LinalgError> {
        check_dim("membership test", self.ambient_dim, v.len())?;
        // Reduce v against the rref basis; v is inside iff the residue vanishes.
        let mut r = v.to_vec();
        for (i, &p) in self.pivots.iter().enumerate() {
            if r[p].is_zero() {
                continue;
            }
            let f = r[p].clone();
            for (j, b) in self.basis.row(i).iter().enumerate() {
                if !b.is_zero() {
                    r[j] -= &f * b;
                }
            }
        }
        Ok(r.iter().all(Zero::is_zero))
    }

    pub fn contains(&self, other: &Subspace) -> Result<bool, LinalgError> {
        check_dim("containment", self.ambient_dim, other.ambient_dim)?;
        for i in 0..other.dim() {
            if !self.contains_vector(other.basis.row(i))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn equals(&self, other: &Subspace) -> Result<bool, LinalgError> {
        check_dim("equality", self.ambient_dim, other.ambient_dim)?;
        Ok(self == other)
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        check_dim("subspace sum", self.ambient_dim, other.ambient_dim)?;
        Ok(Subspace::span(&self.basis.vstack(&other.basis)?))
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        check_dim("subspace intersection", self.ambient_dim, other.ambient_dim)?;
        let stacked = self.annihilator().sum(&other.annihilator())?;
        Ok(stacked.annihilator())
    }

    /// Annihilator in the dual space, identified with `Q^n` via the standard pairing.
    pub fn annihilator(&self) -> Subspace {
        kernel(&self.basis)
    }

    /// Image of the subspace under the map `a` (an `m x n` matrix).
    pub fn map(&self, a: &Mat) -> Result<Subspace, LinalgError> {
        check_dim("subspace image", self.ambient_dim, a.cols())?;
        Ok(Subspace::span(&self.basis.mul(&a.transpose())?))
    }

    /// `{x : a x in self}`.
    pub fn preimage(&self, a: &Mat) -> Result<Subspace, LinalgError> {
        check_dim("subspace preimage", self.ambient_dim, a.rows())?;
        let constraints = self.annihilator().basis.mul(a)?;
        Ok(kernel(&constraints))
    }

    /// Direct sum `self (+) other` in `Q^(n+m)`.
    pub fn product(&self, other: &Subspace) -> Subspace {
        let left = self.basis.hstack(&Mat::zeros(self.dim(), other.ambient_dim)).expect("rows match");
        let right = Mat::zeros(other.dim(), self.ambient_dim)
            .hstack(&other.basis)
            .expect("rows match");
        Subspace::span(&left.vstack(&right).expect("cols match"))
    }
}

/// `{x : m x = 0}`.
pub fn kernel(m: &Mat) -> Subspace {
    let n = m.cols();
    let (r, pivots) = rref_with_pivots(m);
    let mut basis = Mat::zeros(0, n);
    for f in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rat::zero(); n];
        v[f] = Rat::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -r[(i, f)].clone();
        }
        basis.push_row(&v);
    }
    Subspace::span(&basis)
}

/// Column space of `m`.
pub fn image(m: &Mat) -> Subspace {
    Subspace::span(&m.transpose())
}

pub fn sum(a: &Subspace, b: &Subspace) -> Result<Subspace, LinalgError> {
    a.sum(b)
}

pub fn intersect(a: &Subspace, b: &Subspace) -> Result<Subspace, LinalgError> {
    a.intersect(b)
}

pub fn annihilator(a: &Subspace) -> Subspace {
    a.annihilator()
}

pub fn contains(a: &Subspace, b: &Subspace) -> Result<bool, LinalgError> {
    a.contains(b)
}

pub fn equal(a: &Subspace, b: &Subspace) -> Result<bool, LinalgError> {
    a.equals(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_examples() {
        assert_eq!(rref(&Mat::identity(3)), Mat::identity(3));
        assert_eq!(rref(&Mat::from_i64(&[&[2, 4], &[1, 2]])), Mat::from_i64(&[&[1, 2]]));
        assert_eq!(rref(&Mat::zeros(2, 3)).rows(), 0);
    }

    #[test]
    fn rref_pivots_increase_and_idempotent() {
        let m = Mat::from_i64(&[&[0, 2, 4, 1], &[0, 1, 2, 0], &[3, 0, 1, 1]]);
        let (r, piv) = rref_with_pivots(&m);
        assert!(piv.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(rref(&r), r);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel(&Mat::identity(3)).is_zero());
        let k = kernel(&Mat::from_i64(&[&[1, 1]]));
        assert_eq!(k, Subspace::span(&Mat::from_i64(&[&[1, -1]])));
        assert!(kernel(&Mat::zeros(2, 2)).is_full());
    }

    #[test]
    fn subspace_algebra_examples() {
        let e1 = Subspace::coordinate(2, [0]);
        assert_eq!(e1.annihilator(), Subspace::coordinate(2, [1]));
        let a = Subspace::coordinate(3, [0, 1]);
        let b = Subspace::coordinate(3, [1, 2]);
        assert_eq!(a.intersect(&b).unwrap(), Subspace::coordinate(3, [1]));
        assert_eq!(a.sum(&Subspace::zero(3)).unwrap(), a);
    }

    #[test]
    fn containment_and_equality() {
        let x = Subspace::span(&Mat::from_i64(&[&[1, 1]]));
        let y = Subspace::span(&Mat::from_i64(&[&[2, 2]]));
        assert!(equal(&x, &y).unwrap());
        assert!(contains(&Subspace::full(2), &Subspace::coordinate(2, [0])).unwrap());
        assert!(!contains(&Subspace::coordinate(2, [0]), &Subspace::coordinate(2, [1])).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = Subspace::full(2);
        let b = Subspace::full(3);
        assert!(matches!(a.sum(&b), Err(LinalgError::DimensionMismatch { .. })));
        assert!(a.intersect(&b).is_err());
        assert!(a.contains(&b).is_err());
    }

    #[test]
    fn image_and_preimage() {
        let a = Mat::from_i64(&[&[1, 0, 0], &[0, 1, 0]]);
        assert!(image(&a).is_full());
        let line = Subspace::coordinate(2, [0]);
        assert_eq!(line.preimage(&a).unwrap(), Subspace::coordinate(3, [0, 2]));
        assert_eq!(Subspace::full(3).map(&a).unwrap(), Subspace::full(2));
    }

    #[test]
    fn inverse_and_solve() {
        let m = Mat::from_i64(&[&[2, 1], &[1, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Mat::identity(2));
        assert!(Mat::from_i64(&[&[1, 2], &[2, 4]]).inverse().is_none());
        let c = solve_row_combination(&m, &[rat(3), rat(2)]).unwrap();
        assert_eq!(c, vec![rat(1), rat(1)]);
        assert!(solve_row_combination(&Mat::from_i64(&[&[1, 0]]), &[rat(0), rat(1)]).is_none());
    }
}

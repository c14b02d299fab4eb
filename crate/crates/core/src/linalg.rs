//! Dense vectors, matrices, and orthogonal projectors.
//!
//! Everything here is small and dense: the spaces `X` and `H_ω` handled by
//! the rest of the crate are finite-dimensional, usually with a handful of
//! coordinates, so a `Vec<f64>` per vector and a row-major `Vec<f64>` per
//! matrix is all the structure needed.

use std::ops::{Deref, Index};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A point of a finite-dimensional real Hilbert space.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Point::new(Vec::<f64>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl Point {
    /// Checked constructor: rejects empty or non-finite coordinates.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("point must have dim ≥ 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point coordinates"));
        }
        Ok(Point(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> f64) -> Self {
        Point((0..dim).map(f).collect())
    }

    /// Standard basis vector `e_k` of `R^dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        Point::from_fn(dim, |i| if i == k { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn add(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, alpha: f64) -> Point {
        Point(self.0.iter().map(|a| alpha * a).collect())
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: f64, x: &Point) {
        debug_assert_eq!(self.dim(), x.dim());
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            *s += alpha * v;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Point {
        Point(self.0.iter().map(|&c| f(c)).collect())
    }

    /// Euclidean distance.
    pub fn dist(&self, other: &Point) -> f64 {
        self.sub(other).norm()
    }

    /// Largest coordinate-wise absolute difference.
    pub fn max_abs_diff(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Point(v.to_vec())
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

const NORM_MAX_ITER: usize = 5000;
const NORM_REL_TOL: f64 = 1e-14;

/// A dense linear operator `L: R^cols → R^rows`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct LinOp {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl LinOp {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(
                "linear operator needs at least one row and column".into(),
            ));
        }
        check_dim("linop entries", rows * cols, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("linop entries"));
        }
        Ok(LinOp { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidParameter("ragged matrix rows".into()));
        }
        LinOp::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        LinOp {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        LinOp {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut l = LinOp::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            l.data[i * n + i] = *d;
        }
        l
    }

    /// The functional `x ↦ ⟨x, e⟩` as a `1 × dim` matrix.
    pub fn functional(e: &Point) -> Self {
        LinOp {
            rows: 1,
            cols: e.dim(),
            data: e.as_slice().to_vec(),
        }
    }

    /// Builds the operator whose columns are the given vectors.
    pub fn from_columns(cols: &[Point]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, Point::dim);
        if cols.iter().any(|v| v.dim() != r) {
            return Err(Error::InvalidParameter("columns differ in length".into()));
        }
        let mut data = vec![0.0; r * c];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..r {
                data[i * c + j] = col[i];
            }
        }
        LinOp::new(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn scaled(&self, c: f64) -> LinOp {
        LinOp {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn transpose(&self) -> LinOp {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        LinOp {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    /// Exact identity check (square with unit diagonal and zeros elsewhere).
    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| self.get(i, j) == if i == j { 1.0 } else { 0.0 }))
    }

    /// `L x`
    pub fn apply(&self, x: &Point) -> Result<Point> {
        check_dim("linop apply", self.cols, x.dim())?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Point) -> Point {
        Point::from_fn(self.rows, |i| {
            self.row(i).iter().zip(x.as_slice()).map(|(a, b)| a * b).sum()
        })
    }

    /// `Lᵀ y`
    pub fn adjoint_apply(&self, y: &Point) -> Result<Point> {
        check_dim("linop adjoint", self.rows, y.dim())?;
        Ok(self.adjoint_apply_unchecked(y))
    }

    pub(crate) fn adjoint_apply_unchecked(&self, y: &Point) -> Point {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            if yi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        Point::from(out)
    }

    /// Spectral norm by power iteration on `LᵀL`.
    ///
    /// The all-ones start vector is deterministic but can be orthogonal to the
    /// dominant singular direction (e.g. `[[1, -1]]`), so a second fixed start
    /// with alternating signs is run as well and the larger estimate kept.
    pub fn operator_norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let n = self.cols;
        let ones = Point::from(vec![1.0; n]);
        let ramp = Point::from_fn(n, |k| if k % 2 == 0 { (k + 1) as f64 } else { -((k + 1) as f64) });
        self.power_iteration(ones)
            .max(self.power_iteration(ramp))
            .sqrt()
    }

    fn power_iteration(&self, start: Point) -> f64 {
        let mut v = start.scale(1.0 / start.norm());
        let mut rq_prev = f64::NAN;
        let mut rq = 0.0;
        for _ in 0..NORM_MAX_ITER {
            let w = self.adjoint_apply_unchecked(&self.apply_unchecked(&v));
            rq = v.dot(&w);
            let wn = w.norm();
            if wn == 0.0 {
                return 0.0;
            }
            if (rq - rq_prev).abs() < NORM_REL_TOL * rq.abs() {
                break;
            }
            rq_prev = rq;
            v = w.scale(1.0 / wn);
        }
        rq.max(0.0)
    }

    /// `I + c·L` for square `L`.
    pub(crate) fn identity_plus(&self, c: f64) -> LinOp {
        debug_assert_eq!(self.rows, self.cols);
        let mut out = self.scaled(c);
        for i in 0..self.rows {
            out.data[i * self.cols + i] += 1.0;
        }
        out
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl TryFrom<Vec<Vec<f64>>> for LinOp {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        LinOp::from_rows(rows)
    }
}

impl From<LinOp> for Vec<Vec<f64>> {
    fn from(l: LinOp) -> Self {
        (0..l.rows).map(|i| l.row(i).to_vec()).collect()
    }
}

/// Solves `A y = b` for a square dense `A` by LU with partial pivoting.
pub(crate) fn lu_solve(a: &LinOp, b: &Point) -> Result<Point> {
    check_dim("lu solve", a.rows(), b.dim())?;
    let lu = a.to_dmatrix().lu();
    let sol = lu
        .solve(&DVector::from_column_slice(b.as_slice()))
        .ok_or_else(|| Error::InvalidParameter("singular system in LU solve".into()))?;
    Ok(Point::from(sol.as_slice().to_vec()))
}

/// Smallest eigenvalue of the symmetric part `(M + Mᵀ)/2`.
pub(crate) fn min_sym_eigenvalue(m: &LinOp) -> f64 {
    let d = m.to_dmatrix();
    let sym = (&d + d.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

const RANK_TOL: f64 = 1e-10;

/// A nonzero linear subspace of `R^ambient_dim`, held as an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Point>,
}

impl Subspace {
    /// Orthonormalizes `spanning` by modified Gram–Schmidt, dropping vectors
    /// whose residual norm falls below `1e-10`.
    pub fn new(ambient_dim: usize, spanning: &[Point]) -> Result<Self> {
        let mut basis: Vec<Point> = Vec::new();
        for v in spanning {
            check_dim("subspace spanning vector", ambient_dim, v.dim())?;
            if !v.is_finite() {
                return Err(Error::NonFinite("subspace spanning vector"));
            }
            let mut w = v.clone();
            // two passes keep the basis orthonormal to ~1e-15
            for _ in 0..2 {
                for b in &basis {
                    let c = w.dot(b);
                    w.axpy(-c, b);
                }
            }
            let n = w.norm();
            if n > RANK_TOL {
                basis.push(w.scale(1.0 / n));
            }
            if basis.len() == ambient_dim {
                break;
            }
        }
        if basis.is_empty() {
            return Err(Error::ZeroSubspace);
        }
        Ok(Subspace { ambient_dim, basis })
    }

    /// The whole space `R^n`.
    pub fn full(n: usize) -> Self {
        Subspace {
            ambient_dim: n,
            basis: (0..n).map(|k| Point::basis(n, k)).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Point] {
        &self.basis
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient_dim
    }

    /// Orthogonal projection `Σ_k ⟨x, b_k⟩ b_k`.
    pub fn project(&self, x: &Point) -> Result<Point> {
        check_dim("subspace projection", self.ambient_dim, x.dim())?;
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &Point) -> Point {
        if self.is_full() {
            return x.clone();
        }
        let mut out = Point::zeros(self.ambient_dim);
        for b in &self.basis {
            out.axpy(x.dot(b), b);
        }
        out
    }

    /// `‖x − proj_V x‖`
    pub fn distance(&self, x: &Point) -> Result<f64> {
        Ok(x.dist(&self.project(x)?))
    }
}

/// `make_subspace`: orthonormal basis of the span of `spanning`.
pub fn make_subspace(ambient_dim: usize, spanning: &[Point]) -> Result<Subspace> {
    Subspace::new(ambient_dim, spanning)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn apply_examples() {
        let id = LinOp::identity(2);
        assert_eq!(id.apply(&Point::from([3.0, -1.0])).unwrap(), Point::from([3.0, -1.0]));
        let z = LinOp::zeros(2, 3);
        assert_eq!(z.apply(&Point::from([1.0, 2.0, 3.0])).unwrap(), Point::zeros(2));
        let d = LinOp::diagonal(&[1.0, 2.0]);
        assert_eq!(d.apply(&Point::from([1.0, 1.0])).unwrap(), Point::from([1.0, 2.0]));
        assert!(matches!(
            d.apply(&Point::from([1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn adjoint_of_row_functional() {
        let l = LinOp::from_rows(vec![vec![1.0, 2.0]]).unwrap();
        assert_eq!(l.adjoint_apply(&Point::from([5.0])).unwrap(), Point::from([5.0, 10.0]));
        assert!(l.adjoint_apply(&Point::from([1.0, 1.0])).is_err());
    }

    #[test]
    fn operator_norm_examples() {
        assert_abs_diff_eq!(LinOp::identity(4).operator_norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(LinOp::diagonal(&[1.0, 3.0]).operator_norm(), 3.0, epsilon = 1e-10);
        let shift = LinOp::from_rows(vec![vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(shift.operator_norm(), 1.0, epsilon = 1e-12);
        assert_eq!(LinOp::zeros(3, 2).operator_norm(), 0.0);
    }

    #[test]
    fn operator_norm_when_ones_is_in_the_kernel() {
        let l = LinOp::from_rows(vec![vec![1.0, -1.0]]).unwrap();
        assert_abs_diff_eq!(l.operator_norm(), 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn subspace_examples() {
        let v = make_subspace(2, &[Point::from([2.0, 0.0])]).unwrap();
        assert_eq!(v.basis(), &[Point::from([1.0, 0.0])]);
        let full = make_subspace(2, &[Point::from([1.0, 0.0]), Point::from([0.0, 1.0])]).unwrap();
        assert!(full.is_full());
        let line = make_subspace(2, &[Point::from([1.0, 1.0]), Point::from([2.0, 2.0])]).unwrap();
        assert_eq!(line.dim(), 1);
        let s = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(line.basis()[0][0], s, epsilon = 1e-15);
        assert_abs_diff_eq!(line.basis()[0][1], s, epsilon = 1e-15);
        assert_eq!(
            make_subspace(2, &[Point::zeros(2), Point::from([1e-12, 0.0])]),
            Err(Error::ZeroSubspace)
        );
    }

    #[test]
    fn projection_examples() {
        let x = Point::from([3.0, 4.0]);
        assert_eq!(Subspace::full(2).project(&x).unwrap(), x);
        let e1 = make_subspace(2, &[Point::from([1.0, 0.0])]).unwrap();
        assert_eq!(e1.project(&x).unwrap(), Point::from([3.0, 0.0]));
        let diag = make_subspace(2, &[Point::from([1.0, 1.0])]).unwrap();
        let p = diag.project(&Point::from([1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn lu_and_eigen_helpers() {
        let a = LinOp::from_rows(vec![vec![1.0, -1.0], vec![1.0, 1.0]]).unwrap();
        let y = lu_solve(&a, &Point::from([1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(y[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(y[1], -0.5, epsilon = 1e-15);
        let rot = LinOp::from_rows(vec![vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(min_sym_eigenvalue(&rot), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let l = LinOp::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(s, "[[1.0,2.0],[3.0,4.0]]");
        assert_eq!(serde_json::from_str::<LinOp>(&s).unwrap(), l);
        assert!(serde_json::from_str::<LinOp>("[[1.0],[2.0,3.0]]").is_err());
        assert!(serde_json::from_str::<Point>("[]").is_err());
    }

    fn mat(rows: usize, cols: usize) -> impl Strategy<Value = LinOp> {
        prop::collection::vec(-5.0..5.0f64, rows * cols)
            .prop_map(move |d| LinOp::new(rows, cols, d).unwrap())
    }

    fn vec_of(n: usize) -> impl Strategy<Value = Point> {
        prop::collection::vec(-5.0..5.0f64, n).prop_map(Point::from)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn adjoint_identity((l, x, y) in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| (mat(r, c), vec_of(c), vec_of(r)))) {
            let lhs = l.apply(&x).unwrap().dot(&y);
            let rhs = x.dot(&l.adjoint_apply(&y).unwrap());
            let scale = 1.0 + l.apply(&x).unwrap().norm() * y.norm();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn operator_norm_bounds_ratio((l, x) in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| (mat(r, c), vec_of(c)))) {
            prop_assume!(x.norm() > 1e-6);
            let ratio = l.apply(&x).unwrap().norm() / x.norm();
            prop_assert!(l.operator_norm() >= ratio * (1.0 - 1e-9));
        }

        #[test]
        fn operator_norm_matches_svd(l in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| mat(r, c))) {
            let sv = l.to_dmatrix().singular_values().max();
            prop_assert!((l.operator_norm() - sv).abs() <= 1e-10 * (1.0 + sv));
        }

        #[test]
        fn projection_idempotent_and_nonexpansive(
            (span, x) in (2usize..6).prop_flat_map(|n| (prop::collection::vec(vec_of(n), 1..4), vec_of(n)))
        ) {
            let n = x.dim();
            prop_assume!(span.iter().any(|v| v.norm() > 1e-6));
            let v = Subspace::new(n, &span).unwrap();
            let p = v.project(&x).unwrap();
            let pp = v.project(&p).unwrap();
            prop_assert!(p.max_abs_diff(&pp) <= 1e-12 * (1.0 + x.norm()));
            prop_assert!(p.norm() <= x.norm() * (1.0 + 1e-12));
            for (i, a) in v.basis().iter().enumerate() {
                for (j, b) in v.basis().iter().enumerate() {
                    let d = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((a.dot(b) - d).abs() <= 1e-12);
                }
            }
        }
    }
}

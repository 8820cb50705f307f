//! Dense row-major `f64` matrices.
//!
//! Every matrix in this crate is small (the largest fixture is 5×5), so the
//! kernel is deliberately plain: one contiguous `Vec<f64>`, no views, no
//! sparsity. Constructors reject non-finite entries; arithmetic does not
//! re-check.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Tolerance used when a caller does not supply one.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("entry count {len} does not match shape {rows}x{cols}")]
    BadLength { rows: usize, cols: usize, len: usize },
    #[error("rows have unequal length: row 0 has {expected} entries, row {row} has {found}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("non-finite entry {value} at ({row}, {col})")]
    NonFinite { row: usize, col: usize, value: f64 },
    #[error("{op}: dimension mismatch between {left} and {right}")]
    DimensionMismatch {
        op: &'static str,
        left: Shape,
        right: Shape,
    },
    #[error("range rows {rows:?} cols {cols:?} out of bounds for {shape}")]
    OutOfRange {
        rows: Range<usize>,
        cols: Range<usize>,
        shape: Shape,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Result of [`Matrix::approx_eq`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub equal: bool,
    pub max_abs_diff: f64,
    /// Position of the largest difference; `None` for empty matrices.
    pub at: Option<(usize, usize)>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::BadLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(MatrixError::NonFinite {
                row: i / cols.max(1),
                col: i % cols.max(1),
                value: data[i],
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices. An empty slice yields `0x0`; use
    /// [`Matrix::zeros`] for `r x 0` or `0 x c` shapes.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(MatrixError::Ragged {
                    row: i,
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn column(values: &[f64]) -> Result<Self, MatrixError> {
        Self::new(values.len(), 1, values.to_vec())
    }

    pub fn row(values: &[f64]) -> Result<Self, MatrixError> {
        Self::new(1, values.len(), values.to_vec())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Bypasses the finiteness check; only for results of arithmetic on
    /// already-validated matrices.
    fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> Shape {
        Shape {
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        self.data[row * self.cols + col]
    }

    /// Returns a copy with one entry replaced. Rejects non-finite values.
    pub fn with_entry(&self, row: usize, col: usize, value: f64) -> Result<Self, MatrixError> {
        if row >= self.rows || col >= self.cols {
            return Err(MatrixError::OutOfRange {
                rows: row..row + 1,
                cols: col..col + 1,
                shape: self.shape(),
            });
        }
        if !value.is_finite() {
            return Err(MatrixError::NonFinite { row, col, value });
        }
        let mut out = self.clone();
        out.data[row * self.cols + col] = value;
        Ok(out)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row_slice(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row_slice(r).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mat_mul(&self, rhs: &Matrix) -> Result<Matrix, MatrixError> {
        if self.cols != rhs.rows {
            return Err(MatrixError::DimensionMismatch {
                op: "mat_mul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = vec![0.0; self.rows * rhs.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let lhs = self.data[i * self.cols + k];
                if lhs == 0.0 {
                    continue;
                }
                let rhs_row = rhs.row_slice(k);
                let out_row = &mut out[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, r) in out_row.iter_mut().zip(rhs_row) {
                    *o += lhs * r;
                }
            }
        }
        Ok(Matrix::from_raw(self.rows, rhs.cols, out))
    }

    pub fn mat_add(&self, rhs: &Matrix) -> Result<Matrix, MatrixError> {
        self.zip_with(rhs, "mat_add", |a, b| a + b)
    }

    pub fn mat_sub(&self, rhs: &Matrix) -> Result<Matrix, MatrixError> {
        self.zip_with(rhs, "mat_sub", |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Matrix, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Matrix, MatrixError> {
        if self.shape() != rhs.shape() {
            return Err(MatrixError::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Matrix::from_raw(self.rows, self.cols, data))
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix::from_raw(self.rows, self.cols, self.data.iter().map(|v| v * factor).collect())
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = vec![0.0; self.data.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        Matrix::from_raw(self.cols, self.rows, out)
    }

    /// Matrix-vector product `self · v`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, MatrixError> {
        if v.len() != self.cols {
            return Err(MatrixError::DimensionMismatch {
                op: "mul_vec",
                left: self.shape(),
                right: Shape { rows: v.len(), cols: 1 },
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row_slice(r).iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
            .collect())
    }

    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> Result<Matrix, MatrixError> {
        if rows.start > rows.end || cols.start > cols.end || rows.end > self.rows || cols.end > self.cols {
            return Err(MatrixError::OutOfRange {
                rows,
                cols,
                shape: self.shape(),
            });
        }
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for r in rows.clone() {
            data.extend_from_slice(&self.row_slice(r)[cols.clone()]);
        }
        Ok(Matrix::from_raw(rows.len(), cols.len(), data))
    }

    /// Writes `block` into a copy of `self` with its top-left corner at
    /// `(row, col)`.
    pub fn with_block(&self, row: usize, col: usize, block: &Matrix) -> Result<Matrix, MatrixError> {
        if row + block.rows > self.rows || col + block.cols > self.cols {
            return Err(MatrixError::OutOfRange {
                rows: row..row + block.rows,
                cols: col..col + block.cols,
                shape: self.shape(),
            });
        }
        let mut out = self.clone();
        for r in 0..block.rows {
            let dst = (row + r) * self.cols + col;
            out.data[dst..dst + block.cols].copy_from_slice(block.row_slice(r));
        }
        Ok(out)
    }

    pub fn approx_eq(&self, other: &Matrix, tol: f64) -> Result<Comparison, MatrixError> {
        if self.shape() != other.shape() {
            return Err(MatrixError::DimensionMismatch {
                op: "approx_eq",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut max = 0.0;
        let mut at = None;
        for (i, (a, b)) in self.data.iter().zip(&other.data).enumerate() {
            let d = (a - b).abs();
            if at.is_none() || d > max {
                max = d;
                at = Some((i / self.cols, i % self.cols));
            }
        }
        Ok(Comparison {
            equal: max <= tol,
            max_abs_diff: max,
            at,
        })
    }
}

/// Block-diagonal assembly; off-block entries are exactly zero.
pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
    let rows = blocks.iter().map(|b| b.rows).sum();
    let cols = blocks.iter().map(|b| b.cols).sum();
    let mut out = vec![0.0; rows * cols];
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        for r in 0..b.rows {
            let dst = (r0 + r) * cols + c0;
            out[dst..dst + b.cols].copy_from_slice(b.row_slice(r));
        }
        r0 += b.rows;
        c0 += b.cols;
    }
    Matrix::from_raw(rows, cols, out)
}

/// Side-by-side concatenation `(a b ...)`. All parts must share a row count.
pub fn hcat(parts: &[&Matrix]) -> Result<Matrix, MatrixError> {
    let Some(first) = parts.first() else {
        return Ok(Matrix::zeros(0, 0));
    };
    let rows = first.rows;
    if let Some(bad) = parts.iter().find(|p| p.rows != rows) {
        return Err(MatrixError::DimensionMismatch {
            op: "hcat",
            left: first.shape(),
            right: bad.shape(),
        });
    }
    let cols = parts.iter().map(|p| p.cols).sum();
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for p in parts {
            data.extend_from_slice(p.row_slice(r));
        }
    }
    Ok(Matrix::from_raw(rows, cols, data))
}

/// Stacked concatenation. All parts must share a column count.
pub fn vcat(parts: &[&Matrix]) -> Result<Matrix, MatrixError> {
    let Some(first) = parts.first() else {
        return Ok(Matrix::zeros(0, 0));
    };
    let cols = first.cols;
    if let Some(bad) = parts.iter().find(|p| p.cols != cols) {
        return Err(MatrixError::DimensionMismatch {
            op: "vcat",
            left: first.shape(),
            right: bad.shape(),
        });
    }
    let rows = parts.iter().map(|p| p.rows).sum();
    let mut data = Vec::with_capacity(rows * cols);
    for p in parts {
        data.extend_from_slice(&p.data);
    }
    Ok(Matrix::from_raw(rows, cols, data))
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}{:?}", self.shape(), self.to_rows())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows == 0 {
            return write!(f, "[] ({})", self.shape());
        }
        for r in 0..self.rows {
            let row: Vec<String> = self.row_slice(r).iter().map(|v| format!("{v:>10.6}")).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Serialized as `{"rows": r, "cols": c, "data": [[...], ...]}` so that
/// empty shapes survive a round trip.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<Vec<f64>>,
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            data: self.to_rows(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        if repr.data.len() != repr.rows {
            return Err(serde::de::Error::custom("row count does not match `rows`"));
        }
        let data: Vec<f64> = repr.data.into_iter().flatten().collect();
        Matrix::new(repr.rows, repr.cols, data).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn eq5_a() -> Matrix {
        m(&[&[-0.313, 56.7, 0.0], &[-0.0139, -0.426, 0.0], &[0.0, 56.7, 0.0]])
    }

    #[test]
    fn scalar_product() {
        assert_eq!(m(&[&[2.0]]).mat_mul(&m(&[&[3.0]])).unwrap(), m(&[&[6.0]]));
    }

    #[test]
    fn identity_left_unit_on_3x3() {
        let a = eq5_a();
        assert_eq!(Matrix::identity(3).mat_mul(&a).unwrap(), a);
    }

    #[test]
    fn eq5_first_column() {
        let e1 = Matrix::column(&[1.0, 0.0, 0.0]).unwrap();
        let col = eq5_a().mat_mul(&e1).unwrap();
        assert_eq!(col.as_slice(), &[-0.313, -0.0139, 0.0]);
    }

    #[test]
    fn mat_mul_shape_error_names_both_shapes() {
        let err = Matrix::zeros(2, 3).mat_mul(&Matrix::zeros(2, 3)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3"), "{msg}");
        assert!(matches!(err, MatrixError::DimensionMismatch { .. }));
    }

    #[test]
    fn addition_examples() {
        assert_eq!(
            m(&[&[1.0, 2.0]]).mat_add(&Matrix::zeros(1, 2)).unwrap(),
            m(&[&[1.0, 2.0]])
        );
        assert_eq!(m(&[&[1.0]]).mat_add(&m(&[&[-1.0]])).unwrap(), m(&[&[0.0]]));
        let b_d = Matrix::column(&[0.232, 0.0203, 0.0]).unwrap();
        assert_eq!(b_d.mat_add(&Matrix::zeros(3, 1)).unwrap(), b_d);
        assert!(Matrix::zeros(1, 2).mat_add(&Matrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn block_diag_examples() {
        let d = block_diag(&[&m(&[&[2.0]]), &m(&[&[3.0]])]);
        assert_eq!(d, m(&[&[2.0, 0.0], &[0.0, 3.0]]));
        let a = eq5_a();
        assert_eq!(block_diag(&[&a]), a);
        assert_eq!(block_diag(&[]).shape(), Shape { rows: 0, cols: 0 });
        // mixed and empty shapes
        let d = block_diag(&[&Matrix::zeros(0, 2), &m(&[&[1.0]])]);
        assert_eq!(d.shape(), Shape { rows: 1, cols: 3 });
        assert_eq!(d.as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn block_diag_matches_laxator_picture() {
        let a1 = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let a2 = m(&[&[5.0]]);
        let d = block_diag(&[&a1, &a2]);
        assert_eq!(d.submatrix(0..2, 0..2).unwrap(), a1);
        assert_eq!(d.submatrix(2..3, 2..3).unwrap(), a2);
        assert!(d.submatrix(0..2, 2..3).unwrap().is_zero());
        assert!(d.submatrix(2..3, 0..2).unwrap().is_zero());
    }

    #[test]
    fn submatrix_examples() {
        assert_eq!(Matrix::identity(2).submatrix(0..1, 0..1).unwrap(), m(&[&[1.0]]));
        let a = eq5_a();
        assert_eq!(a.submatrix(0..3, 0..3).unwrap(), a);
        assert!(matches!(a.submatrix(0..4, 0..1), Err(MatrixError::OutOfRange { .. })));
    }

    #[test]
    fn approx_eq_examples() {
        let a = eq5_a();
        assert!(a.approx_eq(&a, 0.0).unwrap().equal);
        assert!(m(&[&[1.0]]).approx_eq(&m(&[&[1.0 + 1e-12]]), 1e-9).unwrap().equal);
        let c = m(&[&[1.0]]).approx_eq(&m(&[&[1.1]]), 1e-9).unwrap();
        assert!(!c.equal);
        assert!((c.max_abs_diff - 0.1).abs() < 1e-12);
        assert_eq!(c.at, Some((0, 0)));
        assert!(a.approx_eq(&Matrix::zeros(2, 2), 1.0).is_err());
    }

    #[test]
    fn construction_rejects_non_finite() {
        assert!(matches!(
            Matrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(MatrixError::NonFinite { row: 0, col: 1, .. })
        ));
        assert!(Matrix::from_rows(&[[f64::INFINITY]]).is_err());
        assert!(Matrix::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn transpose_and_concat() {
        let a = m(&[&[1.0, 2.0, 3.0]]);
        assert_eq!(a.transpose(), Matrix::column(&[1.0, 2.0, 3.0]).unwrap());
        let h = hcat(&[&m(&[&[1.0]]), &m(&[&[2.0, 3.0]])]).unwrap();
        assert_eq!(h, a);
        let v = vcat(&[&a, &a]).unwrap();
        assert_eq!(v.shape(), Shape { rows: 2, cols: 3 });
        assert!(hcat(&[&Matrix::zeros(1, 1), &Matrix::zeros(2, 1)]).is_err());
    }

    #[test]
    fn serde_round_trip_keeps_empty_shapes() {
        let z = Matrix::zeros(3, 0);
        let back: Matrix = serde_json::from_str(&serde_json::to_string(&z).unwrap()).unwrap();
        assert_eq!(back, z);
    }

    fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |d| Matrix::new(rows, cols, d).unwrap())
    }

    fn arb_chain() -> impl Strategy<Value = (Matrix, Matrix, Matrix)> {
        (1usize..=8, 1usize..=8, 1usize..=8, 1usize..=8)
            .prop_flat_map(|(a, b, c, d)| (arb_matrix(a, b), arb_matrix(b, c), arb_matrix(c, d)))
    }

    proptest! {
        #[test]
        fn mat_mul_is_associative((a, b, c) in arb_chain()) {
            let left = a.mat_mul(&b).unwrap().mat_mul(&c).unwrap();
            let right = a.mat_mul(&b.mat_mul(&c).unwrap()).unwrap();
            prop_assert!(left.approx_eq(&right, 1e-12).unwrap().equal);
        }

        #[test]
        fn identity_is_exact_two_sided_unit(
            a in (1usize..=8, 1usize..=8).prop_flat_map(|(r, c)| arb_matrix(r, c))
        ) {
            prop_assert_eq!(Matrix::identity(a.rows()).mat_mul(&a).unwrap(), a.clone());
            prop_assert_eq!(a.mat_mul(&Matrix::identity(a.cols())).unwrap(), a);
        }

        #[test]
        fn block_diag_multiplies_blockwise(
            (a, c, b, d) in (1usize..=4, 1usize..=4, 1usize..=4, 1usize..=4, 1usize..=4, 1usize..=4)
                .prop_flat_map(|(r1, k1, c1, r2, k2, c2)| {
                    (arb_matrix(r1, k1), arb_matrix(k1, c1), arb_matrix(r2, k2), arb_matrix(k2, c2))
                })
        ) {
            let lhs = block_diag(&[&a, &b]).mat_mul(&block_diag(&[&c, &d])).unwrap();
            let rhs = block_diag(&[&a.mat_mul(&c).unwrap(), &b.mat_mul(&d).unwrap()]);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn partition_then_concat_reconstructs(
            (a, r, c) in (1usize..=8, 1usize..=8)
                .prop_flat_map(|(rows, cols)| (arb_matrix(rows, cols), 0..=rows, 0..=cols))
        ) {
            let (rows, cols) = (a.rows(), a.cols());
            let tl = a.submatrix(0..r, 0..c).unwrap();
            let tr = a.submatrix(0..r, c..cols).unwrap();
            let bl = a.submatrix(r..rows, 0..c).unwrap();
            let br = a.submatrix(r..rows, c..cols).unwrap();
            let top = hcat(&[&tl, &tr]).unwrap();
            let bottom = hcat(&[&bl, &br]).unwrap();
            prop_assert_eq!(vcat(&[&top, &bottom]).unwrap(), a);
        }
    }
}

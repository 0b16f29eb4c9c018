//! Matrix-free linear operators.
//!
//! Every operator in the toolkit (forward models, finite differences, the
//! reweighted regularization operators) is a [`LinearOperator`]: an immutable
//! expression tree over a handful of primitive kinds. Kronecker products are
//! never materialized; `kron(A, B) x` is evaluated as `vec(B X Aᵀ)` on the
//! column-major reshape `X` of `x`.
//!
//! Vectorization is column-major throughout: for an `n_v × n_h` frame the
//! vertical index varies fastest, and frames are stacked in time. All the
//! Kronecker orderings used by the regularizers depend on this convention.

mod tensor;

pub use tensor::Tensor3;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};

/// Largest column count accepted by [`LinearOperator::to_dense`].
pub const DENSE_COLUMN_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

impl Shape {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// Compressed sparse row storage, used for ray-traced projection operators.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a CSR matrix from per-row `(column, value)` lists.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in &rows {
            for &(c, v) in row {
                if c >= cols {
                    return Err(Error::InvalidArgument(format!(
                        "column index {c} out of range for {cols} columns"
                    )));
                }
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (c, v) in self.row(i) {
                x[c] += v * yi;
            }
        }
    }
}

/// The primitive building blocks an operator tree is made of.
#[derive(Debug)]
pub enum OperatorKind {
    Dense(DMatrix<f64>),
    /// Scaled first-difference matrix `alpha * [1 -1; ...]`, optionally padded
    /// with a trailing zero row so that it becomes square.
    Diff {
        n: usize,
        alpha: f64,
        padded: bool,
    },
    Identity(usize),
    Kron(LinearOperator, LinearOperator),
    BlockDiag(Vec<LinearOperator>),
    VStack(Vec<LinearOperator>),
    Diagonal(Vec<f64>),
    Scaled(f64, LinearOperator),
    /// `outer * inner`
    Composed(LinearOperator, LinearOperator),
    Sparse(CsrMatrix),
}

/// An immutable, cheaply clonable matrix-free operator.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    shape: Shape,
    kind: Arc<OperatorKind>,
}

impl LinearOperator {
    fn from_kind(shape: Shape, kind: OperatorKind) -> Self {
        Self {
            shape,
            kind: Arc::new(kind),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_kind(Shape::new(n, n), OperatorKind::Identity(n))
    }

    pub fn dense(matrix: DMatrix<f64>) -> Self {
        let shape = Shape::new(matrix.nrows(), matrix.ncols());
        Self::from_kind(shape, OperatorKind::Dense(matrix))
    }

    pub fn diagonal(weights: Vec<f64>) -> Self {
        let n = weights.len();
        Self::from_kind(Shape::new(n, n), OperatorKind::Diagonal(weights))
    }

    pub fn sparse(matrix: CsrMatrix) -> Self {
        let shape = Shape::new(matrix.rows, matrix.cols);
        Self::from_kind(shape, OperatorKind::Sparse(matrix))
    }

    /// First-difference matrix of size `(n-1) x n`, or `n x n` when padded with a
    /// zero last row.
    pub fn diff(n: usize, alpha: f64, padded: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!(
                "difference operator needs at least 2 points, got {n}"
            )));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "difference scale must be positive, got {alpha}"
            )));
        }
        let rows = if padded { n } else { n - 1 };
        Ok(Self::from_kind(
            Shape::new(rows, n),
            OperatorKind::Diff { n, alpha, padded },
        ))
    }

    pub fn kron(left: LinearOperator, right: LinearOperator) -> Self {
        let shape = Shape::new(
            left.shape.rows * right.shape.rows,
            left.shape.cols * right.shape.cols,
        );
        Self::from_kind(shape, OperatorKind::Kron(left, right))
    }

    pub fn block_diag(blocks: Vec<LinearOperator>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidArgument("empty block-diagonal list".into()));
        }
        let rows = blocks.iter().map(|b| b.shape.rows).sum();
        let cols = blocks.iter().map(|b| b.shape.cols).sum();
        Ok(Self::from_kind(
            Shape::new(rows, cols),
            OperatorKind::BlockDiag(blocks),
        ))
    }

    pub fn vstack(blocks: Vec<LinearOperator>) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::InvalidArgument("empty vertical stack".into()));
        };
        let cols = first.shape.cols;
        for b in &blocks {
            check_len("vstack columns", cols, b.shape.cols)?;
        }
        let rows = blocks.iter().map(|b| b.shape.rows).sum();
        Ok(Self::from_kind(
            Shape::new(rows, cols),
            OperatorKind::VStack(blocks),
        ))
    }

    pub fn scaled(factor: f64, op: LinearOperator) -> Self {
        let shape = op.shape;
        Self::from_kind(shape, OperatorKind::Scaled(factor, op))
    }

    /// `outer * inner`
    pub fn compose(outer: LinearOperator, inner: LinearOperator) -> Result<Self> {
        check_len("composition inner dimension", outer.shape.cols, inner.shape.rows)?;
        let shape = Shape::new(outer.shape.rows, inner.shape.cols);
        Ok(Self::from_kind(shape, OperatorKind::Composed(outer, inner)))
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn rows(&self) -> usize {
        self.shape.rows
    }

    pub fn cols(&self) -> usize {
        self.shape.cols
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("apply", self.shape.cols, x.len())?;
        let mut y = vec![0.0; self.shape.rows];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("apply_adjoint", self.shape.rows, y.len())?;
        let mut x = vec![0.0; self.shape.cols];
        self.apply_adjoint_into(y, &mut x);
        Ok(x)
    }

    /// Explicit matrix, for oracle checks on small operators only.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.shape.cols > DENSE_COLUMN_LIMIT {
            return Err(Error::TooLarge {
                cols: self.shape.cols,
                limit: DENSE_COLUMN_LIMIT,
            });
        }
        let mut out = DMatrix::zeros(self.shape.rows, self.shape.cols);
        let mut e = vec![0.0; self.shape.cols];
        let mut col = vec![0.0; self.shape.rows];
        for j in 0..self.shape.cols {
            e[j] = 1.0;
            self.apply_into(&e, &mut col);
            out.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        Ok(out)
    }

    /// Overwrites `y` with `self * x`; lengths must already match.
    pub(crate) fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.shape.cols);
        debug_assert_eq!(y.len(), self.shape.rows);
        match &*self.kind {
            OperatorKind::Dense(m) => {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = m.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
            OperatorKind::Diff { n, alpha, padded } => {
                for i in 0..n - 1 {
                    y[i] = alpha * (x[i] - x[i + 1]);
                }
                if *padded {
                    y[n - 1] = 0.0;
                }
            }
            OperatorKind::Identity(_) => y.copy_from_slice(x),
            OperatorKind::Diagonal(w) => {
                for ((yi, wi), xi) in y.iter_mut().zip(w).zip(x) {
                    *yi = wi * xi;
                }
            }
            OperatorKind::Scaled(c, op) => {
                op.apply_into(x, y);
                y.iter_mut().for_each(|v| *v *= c);
            }
            OperatorKind::Composed(outer, inner) => {
                let mut tmp = vec![0.0; inner.shape.rows];
                inner.apply_into(x, &mut tmp);
                outer.apply_into(&tmp, y);
            }
            OperatorKind::VStack(blocks) => {
                let mut offset = 0;
                for b in blocks {
                    b.apply_into(x, &mut y[offset..offset + b.shape.rows]);
                    offset += b.shape.rows;
                }
            }
            OperatorKind::BlockDiag(blocks) => {
                let (mut r, mut c) = (0, 0);
                for b in blocks {
                    b.apply_into(&x[c..c + b.shape.cols], &mut y[r..r + b.shape.rows]);
                    r += b.shape.rows;
                    c += b.shape.cols;
                }
            }
            OperatorKind::Kron(a, b) => kron_apply(a, b, x, y, false),
            OperatorKind::Sparse(m) => m.apply_into(x, y),
        }
    }

    /// Overwrites `x` with `selfᵀ * y`; lengths must already match.
    pub(crate) fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        debug_assert_eq!(y.len(), self.shape.rows);
        debug_assert_eq!(x.len(), self.shape.cols);
        match &*self.kind {
            OperatorKind::Dense(m) => {
                for (j, xj) in x.iter_mut().enumerate() {
                    *xj = m.column(j).iter().zip(y).map(|(a, b)| a * b).sum();
                }
            }
            OperatorKind::Diff { n, alpha, .. } => {
                // rows beyond n-2 (the padding row) never contribute
                let n = *n;
                x[0] = alpha * y[0];
                for j in 1..n - 1 {
                    x[j] = alpha * (y[j] - y[j - 1]);
                }
                x[n - 1] = -alpha * y[n - 2];
            }
            OperatorKind::Identity(_) => x.copy_from_slice(y),
            OperatorKind::Diagonal(w) => {
                for ((xi, wi), yi) in x.iter_mut().zip(w).zip(y) {
                    *xi = wi * yi;
                }
            }
            OperatorKind::Scaled(c, op) => {
                op.apply_adjoint_into(y, x);
                x.iter_mut().for_each(|v| *v *= c);
            }
            OperatorKind::Composed(outer, inner) => {
                let mut tmp = vec![0.0; outer.shape.cols];
                outer.apply_adjoint_into(y, &mut tmp);
                inner.apply_adjoint_into(&tmp, x);
            }
            OperatorKind::VStack(blocks) => {
                x.iter_mut().for_each(|v| *v = 0.0);
                let mut tmp = vec![0.0; self.shape.cols];
                let mut offset = 0;
                for b in blocks {
                    b.apply_adjoint_into(&y[offset..offset + b.shape.rows], &mut tmp);
                    for (xi, ti) in x.iter_mut().zip(&tmp) {
                        *xi += ti;
                    }
                    offset += b.shape.rows;
                }
            }
            OperatorKind::BlockDiag(blocks) => {
                let (mut r, mut c) = (0, 0);
                for b in blocks {
                    b.apply_adjoint_into(&y[r..r + b.shape.rows], &mut x[c..c + b.shape.cols]);
                    r += b.shape.rows;
                    c += b.shape.cols;
                }
            }
            OperatorKind::Kron(a, b) => kron_apply(a, b, y, x, true),
            OperatorKind::Sparse(m) => m.apply_adjoint_into(y, x),
        }
    }

    fn is_identity(&self) -> bool {
        matches!(&*self.kind, OperatorKind::Identity(_))
    }

    fn rows_for(&self, adjoint: bool) -> usize {
        if adjoint {
            self.shape.cols
        } else {
            self.shape.rows
        }
    }

    fn cols_for(&self, adjoint: bool) -> usize {
        if adjoint {
            self.shape.rows
        } else {
            self.shape.cols
        }
    }

    fn apply_dir(&self, x: &[f64], y: &mut [f64], adjoint: bool) {
        if adjoint {
            self.apply_adjoint_into(x, y)
        } else {
            self.apply_into(x, y)
        }
    }
}

/// `(A ⊗ B) x = vec(B X Aᵀ)` where `X` is the `s × q` column-major reshape of
/// `x`. With `adjoint` set, `Aᵀ ⊗ Bᵀ` is applied instead.
fn kron_apply(a: &LinearOperator, b: &LinearOperator, x: &[f64], y: &mut [f64], adjoint: bool) {
    let (p, q) = (a.rows_for(adjoint), a.cols_for(adjoint));
    let (r, s) = (b.rows_for(adjoint), b.cols_for(adjoint));

    // Z = B X, r × q
    let z_owned;
    let z: &[f64] = if b.is_identity() {
        x
    } else {
        let mut buf = vec![0.0; r * q];
        for j in 0..q {
            b.apply_dir(&x[j * s..(j + 1) * s], &mut buf[j * r..(j + 1) * r], adjoint);
        }
        z_owned = buf;
        &z_owned
    };

    // Y = Z Aᵀ, r × p: each row of Y is A applied to the matching row of Z.
    if a.is_identity() {
        y.copy_from_slice(z);
        return;
    }
    let mut zrow = vec![0.0; q];
    let mut yrow = vec![0.0; p];
    for i in 0..r {
        for (k, zk) in zrow.iter_mut().enumerate() {
            *zk = z[k * r + i];
        }
        a.apply_dir(&zrow, &mut yrow, adjoint);
        for (k, yk) in yrow.iter().enumerate() {
            y[k * r + i] = *yk;
        }
    }
}

/// Spatial derivative operator `[I_{n_h} ⊗ L_v; L_h ⊗ I_{n_v}]` for one frame.
pub fn build_ls(n_v: usize, n_h: usize) -> Result<LinearOperator> {
    let lv = LinearOperator::diff(n_v, 1.0, false)?;
    let lh = LinearOperator::diff(n_h, 1.0, false)?;
    LinearOperator::vstack(vec![
        LinearOperator::kron(LinearOperator::identity(n_h), lv),
        LinearOperator::kron(lh, LinearOperator::identity(n_v)),
    ])
}

/// Mode product of a tensor with an operator; see [`Tensor3::mode_product`].
pub fn mode_product(t: &Tensor3, m: &LinearOperator, mode: usize) -> Result<Tensor3> {
    t.mode_product(m, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn explicit_kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        let (p, q) = a.shape();
        let (r, s) = b.shape();
        let mut k = DMatrix::zeros(p * r, q * s);
        for i in 0..p {
            for j in 0..q {
                for u in 0..r {
                    for v in 0..s {
                        k[(i * r + u, j * s + v)] = a[(i, j)] * b[(u, v)];
                    }
                }
            }
        }
        k
    }

    fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn random_dense(rng: &mut impl Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn diff_stencil() {
        let d = LinearOperator::diff(3, 1.0, false).unwrap();
        assert_eq!(d.shape(), Shape::new(2, 3));
        assert_eq!(d.apply(&[1.0, 1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(d.apply(&[3.0, 1.0, 0.0]).unwrap(), vec![2.0, 1.0]);
        let p = LinearOperator::diff(3, 1.0, true).unwrap();
        assert_eq!(p.apply(&[3.0, 1.0, 0.0]).unwrap(), vec![2.0, 1.0, 0.0]);
    }

    #[test]
    fn diff_rejects_small_or_bad_scale() {
        assert!(matches!(
            LinearOperator::diff(1, 1.0, false),
            Err(Error::InvalidDimension(_))
        ));
        assert!(LinearOperator::diff(4, 0.0, false).is_err());
    }

    #[test]
    fn diff_alpha_scales_rows() {
        let d = LinearOperator::diff(3, 2.5, false).unwrap();
        assert_eq!(d.apply(&[3.0, 1.0, 0.0]).unwrap(), vec![5.0, 2.5]);
    }

    #[test]
    fn diff_null_space_is_constants() {
        for n in 2..9 {
            let d = LinearOperator::diff(n, 1.0, false).unwrap().to_dense().unwrap();
            let rank = d.clone().svd(false, false).rank(1e-10);
            assert_eq!(rank, n - 1);
            let ones = nalgebra::DVector::from_element(n, 1.0);
            assert_eq!((&d * ones).amax(), 0.0);
        }
    }

    #[test]
    fn apply_examples() {
        let id = LinearOperator::identity(4);
        assert_eq!(id.apply(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);

        let k = LinearOperator::kron(
            LinearOperator::identity(2),
            LinearOperator::diff(2, 1.0, false).unwrap(),
        );
        let oracle = explicit_kron(
            &DMatrix::identity(2, 2),
            &DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
        );
        let x = [3.0, 1.0, 5.0, 2.0];
        let expected: Vec<f64> = (&oracle * nalgebra::DVector::from_row_slice(&x))
            .iter()
            .copied()
            .collect();
        assert_eq!(expected, vec![2.0, 3.0]);
        assert_eq!(k.apply(&x).unwrap(), expected);

        let bd = LinearOperator::block_diag(vec![
            LinearOperator::identity(2),
            LinearOperator::scaled(2.0, LinearOperator::identity(2)),
        ])
        .unwrap();
        assert_eq!(bd.apply(&[1.0; 4]).unwrap(), vec![1.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn apply_rejects_wrong_length() {
        let id = LinearOperator::identity(3);
        assert!(matches!(id.apply(&[1.0, 2.0]), Err(Error::Shape { .. })));
        assert!(matches!(id.apply_adjoint(&[1.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn composition_shape_checks() {
        assert!(LinearOperator::vstack(vec![
            LinearOperator::identity(2),
            LinearOperator::identity(3)
        ])
        .is_err());
        assert!(
            LinearOperator::compose(LinearOperator::identity(2), LinearOperator::identity(3))
                .is_err()
        );
        let k = LinearOperator::kron(
            LinearOperator::diff(3, 1.0, false).unwrap(),
            LinearOperator::identity(4),
        );
        assert_eq!(k.shape(), Shape::new(8, 12));
    }

    #[test]
    fn to_dense_refuses_large_operators() {
        let big = LinearOperator::identity(DENSE_COLUMN_LIMIT + 1);
        assert!(matches!(big.to_dense(), Err(Error::TooLarge { .. })));
        assert!(LinearOperator::identity(DENSE_COLUMN_LIMIT).to_dense().is_ok());
    }

    #[test]
    fn ls_shape_and_constant_image() {
        let ls = build_ls(2, 2).unwrap();
        assert_eq!(ls.shape(), Shape::new(4, 4));
        let ls = build_ls(4, 3).unwrap();
        assert_eq!(ls.shape(), Shape::new(3 * 3 + 2 * 4, 12));
        assert!(ls.apply(&[2.5; 12]).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn ls_on_vertical_edge_image() {
        // U = [[1,0],[1,0]]: columns (1,1) and (0,0)
        let u = [1.0, 1.0, 0.0, 0.0];
        let z = build_ls(2, 2).unwrap().apply(&u).unwrap();
        let l1: f64 = z.iter().map(|v| v.abs()).sum();
        assert_eq!(l1, 2.0);
    }

    #[test]
    fn kron_matches_explicit_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, q, r, s) in [(2, 3, 4, 2), (3, 3, 1, 5), (1, 4, 3, 3), (5, 2, 2, 4)] {
            let a = random_dense(&mut rng, p, q);
            let b = random_dense(&mut rng, r, s);
            let k = LinearOperator::kron(LinearOperator::dense(a.clone()), LinearOperator::dense(b.clone()));
            let oracle = explicit_kron(&a, &b);
            assert!((k.to_dense().unwrap() - &oracle).amax() < 1e-12);
            let y = random_vec(&mut rng, p * r);
            let adj = k.apply_adjoint(&y).unwrap();
            let expected = oracle.transpose() * nalgebra::DVector::from_vec(y);
            for (u, v) in adj.iter().zip(expected.iter()) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sparse_matches_dense() {
        let csr = CsrMatrix::from_rows(3, vec![vec![(0, 1.0), (2, 2.0)], vec![], vec![(1, -1.5)]])
            .unwrap();
        assert_eq!(csr.nnz(), 3);
        let op = LinearOperator::sparse(csr);
        let d = op.to_dense().unwrap();
        assert_eq!(d, DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, -1.5, 0.0]));
        assert_eq!(op.apply_adjoint(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, -1.5, 2.0]);
        assert!(CsrMatrix::from_rows(2, vec![vec![(2, 1.0)]]).is_err());
    }

    /// Random operator tree of the given depth with `cols` columns.
    fn random_operator(rng: &mut ChaCha8Rng, depth: usize, cols: usize) -> LinearOperator {
        let leaf = |rng: &mut ChaCha8Rng, cols: usize| -> LinearOperator {
            match rng.random_range(0..5) {
                0 => LinearOperator::identity(cols),
                1 if cols >= 2 => LinearOperator::diff(cols, rng.random_range(0.5..2.0), rng.random()).unwrap(),
                2 => LinearOperator::diagonal(random_vec(rng, cols)),
                _ => {
                    let rows = rng.random_range(1..6);
                    LinearOperator::dense(random_dense(rng, rows, cols))
                }
            }
        };
        if depth == 0 {
            return leaf(rng, cols);
        }
        match rng.random_range(0..6) {
            0 => {
                // kron needs a factorization of cols
                let split = (2..=cols).find(|f| cols % f == 0 && *f < cols);
                match split {
                    Some(f) => LinearOperator::kron(
                        random_operator(rng, depth - 1, cols / f),
                        random_operator(rng, depth - 1, f),
                    ),
                    None => leaf(rng, cols),
                }
            }
            1 => LinearOperator::vstack(vec![
                random_operator(rng, depth - 1, cols),
                random_operator(rng, depth - 1, cols),
            ])
            .unwrap(),
            2 if cols >= 2 => {
                let c1 = rng.random_range(1..cols);
                LinearOperator::block_diag(vec![
                    random_operator(rng, depth - 1, c1),
                    random_operator(rng, depth - 1, cols - c1),
                ])
                .unwrap()
            }
            3 => {
                let inner = random_operator(rng, depth - 1, cols);
                let outer = random_operator(rng, depth - 1, inner.rows());
                LinearOperator::compose(outer, inner).unwrap()
            }
            4 => LinearOperator::scaled(rng.random_range(-2.0..2.0), random_operator(rng, depth - 1, cols)),
            _ => leaf(rng, cols),
        }
    }

    #[test]
    fn adjoint_consistency_random_compositions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let cols = [4, 6, 8, 9, 12][rng.random_range(0..5)];
            let depth = rng.random_range(1..=3);
            let op = random_operator(&mut rng, depth, cols);
            let x = random_vec(&mut rng, op.cols());
            let y = random_vec(&mut rng, op.rows());
            let ax = op.apply(&x).unwrap();
            let aty = op.apply_adjoint(&y).unwrap();
            let lhs: f64 = ax.iter().zip(&y).map(|(a, b)| a * b).sum();
            let rhs: f64 = x.iter().zip(&aty).map(|(a, b)| a * b).sum();
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            assert!((lhs - rhs).abs() <= 1e-10 * scale, "{lhs} vs {rhs}");
        }
    }

    proptest! {
        #[test]
        fn kron_of_diffs_matches_explicit(nv in 2usize..6, nh in 2usize..6, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lv = LinearOperator::diff(nv, 1.0, false).unwrap();
            let lh = LinearOperator::diff(nh, 1.0, true).unwrap();
            let k = LinearOperator::kron(lh.clone(), lv.clone());
            let oracle = explicit_kron(&lh.to_dense().unwrap(), &lv.to_dense().unwrap());
            let x = random_vec(&mut rng, nv * nh);
            let got = k.apply(&x).unwrap();
            let want = &oracle * nalgebra::DVector::from_vec(x);
            for (g, w) in got.iter().zip(want.iter()) {
                prop_assert!((g - w).abs() < 1e-12);
            }
        }
    }
}
